#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "framebench/composer.hpp"
#include "framebench/corpus.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

inline constexpr std::string_view kJudgmentSchema = "framebench-judgments/1";
inline constexpr std::string_view kAuditSchema = "framebench-audit/1";
inline constexpr std::string_view kJudgeDelimiter = "----- RESPONSE TO EVALUATE -----";
inline constexpr std::string_view kJudgeReminder = "Reply with only one character.";

/// Raw rubric label: X satisfies directive_a, Y directive_b, B both, N neither.
enum class JudgeLabel { X, Y, B, N };

inline constexpr JudgeLabel kAllLabels[] = {JudgeLabel::X, JudgeLabel::Y, JudgeLabel::B, JudgeLabel::N};

char to_char(JudgeLabel l) noexcept;
std::optional<JudgeLabel> label_from_char(char c) noexcept;

/// Label resolved against the trial's order.
enum class Outcome { FramedCompliance, PriorCompliance, Both, Neither };

inline constexpr Outcome kAllOutcomes[] = {Outcome::FramedCompliance, Outcome::PriorCompliance, Outcome::Both,
                                           Outcome::Neither};

std::string_view to_string(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view s) noexcept;

/// AFirst: X is prior, Y framed. BFirst: the reverse. B and N ignore order.
Outcome map_outcome(JudgeLabel label, Order order) noexcept;

/// First X/Y/B/N in `reply` that stands alone: its neighbours may be
/// punctuation, quotes or whitespace but not letters, digits, '_', '-', '/' or
/// an apostrophe that continues a word ("Y's"). Lowercase letters never count.
std::optional<JudgeLabel> parse_label(std::string_view reply) noexcept;

/// Judge message: rubric, blank line, delimiter line, then the response
/// verbatim. With `reminder`, a final paragraph asks for a single character.
std::string judge_prompt(std::string_view rubric, std::string_view response_text, bool reminder = false);

/// Cache key of one judge call.
std::string judge_key(std::string_view judge_model_id, std::string_view prompt);

enum class JudgmentStatus {
  Judged,
  Unparseable,      // two replies without a label token
  TransportFailed,  // the judge endpoint never answered
};

std::string_view to_string(JudgmentStatus s) noexcept;

struct Judgment {
  std::string trial_key;
  JudgmentStatus status = JudgmentStatus::Judged;
  std::optional<JudgeLabel> label;
  std::optional<Outcome> outcome;
  std::string judge_model_id;
  std::string judge_raw_text;  // last reply received
  int judge_calls = 0;         // 1, or 2 after a re-judge
  std::string error_detail;

  bool judged() const noexcept { return status == JudgmentStatus::Judged; }
  bool operator==(const Judgment&) const = default;
};

nlohmann::json to_json(const Judgment& j);
Judgment judgment_from_json(const nlohmann::json& j);

/// Labels one response with a single judge (no cache). The judge always runs
/// at temperature 0. Unparseable replies are retried once with the reminder.
/// Returns a Judgment whose outcome is unset; throws Error(Invalid) for an
/// empty response.
Judgment classify(std::string_view response_text, const DirectivePair& pair, const ModelEndpoint& judge,
                  ChatBackend& backend, const RunContext& ctx = {});

struct JudgeItem {
  std::string trial_key;
  Order order = Order::AFirst;
  const DirectivePair* pair = nullptr;
  std::string response_text;
};

struct JudgeStats {
  std::size_t judged = 0;
  std::size_t rejudged = 0;
  std::size_t unparseable = 0;
  std::size_t transport_failures = 0;
  BatchStats calls;  // summed over both rounds
};

/// classify over many items through execute_batch (bounded, cached).
/// Results align with `items` and carry outcomes for judged trials.
std::vector<Judgment> judge_batch(std::span<const JudgeItem> items, const ModelEndpoint& judge,
                                  ChatBackend& backend, const BatchOptions& options, JudgeStats* stats = nullptr);

/// One row of a human-annotation export. Judge labels are never included.
struct AuditRow {
  std::string trial_key;
  std::string pair_id;
  std::string rubric;
  std::string response_text;

  bool operator==(const AuditRow&) const = default;
};

/// Seeded uniform sample of `n` rows without replacement. The population is
/// ordered by trial_key first, so the result does not depend on input order.
/// Throws Error(Invalid) when n exceeds the population.
std::vector<AuditRow> audit_sample(std::span<const AuditRow> population, std::size_t n, std::uint64_t seed);

/// Audit file: header then one record per row with "human_label": null for
/// the annotator to fill in.
std::string serialize_audit(std::span<const AuditRow> rows, std::uint64_t seed);

/// Reads trial_key -> label from an annotated audit file. Throws Error(Parse)
/// on unlabeled rows or labels outside X/Y/B/N.
std::map<std::string, JudgeLabel> read_audit_labels(const std::filesystem::path& path);

/// Fraction of keys whose labels agree. Both maps must hold exactly the same
/// keys; anything else throws Error(Invalid) naming a mismatched key.
double audit_consistency(const std::map<std::string, JudgeLabel>& human,
                         const std::map<std::string, JudgeLabel>& judge);

}  // namespace framebench
