#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace framebench {

inline constexpr std::string_view kCorpusSchema = "framebench-corpus/1";

enum class Mechanism { Hierarchical, SocialContract, Emotional, Narrative };

enum class Strategy {
  AuthorityEndorsement,
  DirectOverrideCommands,
  AuthoritarianStatusClaim,
  CommitmentConsistency,
  RapportLikingTrust,
  Reciprocity,
  SocialProofConsensus,
  DistressUrgency,
  GuiltTripsMoralDilemmas,
  PositiveEthicalFraming,
  ContextualLegitimization,
  FictionalRolePlay,
  Hypotheticals,
};

inline constexpr std::array<Mechanism, 4> kAllMechanisms = {
    Mechanism::Hierarchical, Mechanism::SocialContract, Mechanism::Emotional,
    Mechanism::Narrative};

inline constexpr std::array<Strategy, 13> kAllStrategies = {
    Strategy::AuthorityEndorsement,    Strategy::DirectOverrideCommands,
    Strategy::AuthoritarianStatusClaim, Strategy::CommitmentConsistency,
    Strategy::RapportLikingTrust,      Strategy::Reciprocity,
    Strategy::SocialProofConsensus,    Strategy::DistressUrgency,
    Strategy::GuiltTripsMoralDilemmas, Strategy::PositiveEthicalFraming,
    Strategy::ContextualLegitimization, Strategy::FictionalRolePlay,
    Strategy::Hypotheticals};

Mechanism mechanism_of(Strategy s) noexcept;

/// Identifier form used in files, e.g. "SocialProofConsensus".
std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(Mechanism m) noexcept;

/// Human-readable form used in reports, e.g. "Social Proof & Consensus".
std::string_view display_name(Strategy s) noexcept;
std::string_view display_name(Mechanism m) noexcept;

std::optional<Strategy> parse_strategy(std::string_view label) noexcept;
std::optional<Mechanism> parse_mechanism(std::string_view label) noexcept;

struct InfluencePrefix {
  std::string id;
  std::string text;  // ends where the framed directive is appended
  Strategy strategy = Strategy::AuthorityEndorsement;
  int word_count = 0;

  Mechanism mechanism() const noexcept { return mechanism_of(strategy); }
  bool operator==(const InfluencePrefix&) const = default;
};

struct DirectivePair {
  std::string id;
  std::string directive_a;
  std::string directive_b;
  std::string judge_rubric;  // must mention "X", "Y", "B", "N" once each

  bool operator==(const DirectivePair&) const = default;
};

struct ControlText {
  std::string id;
  std::string text;

  bool operator==(const ControlText&) const = default;
};

struct Corpus {
  std::vector<InfluencePrefix> prefixes;
  std::vector<DirectivePair> pairs;
  std::vector<ControlText> controls;

  const InfluencePrefix* find_prefix(std::string_view id) const noexcept;
  const DirectivePair* find_pair(std::string_view id) const noexcept;
  const ControlText* find_control(std::string_view id) const noexcept;

  bool operator==(const Corpus&) const = default;
};

struct LengthStats {
  int min = 0;
  int max = 0;
  int median = 0;  // lower middle element for even counts
  double mean = 0.0;

  bool operator==(const LengthStats&) const = default;
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<std::string> warnings;
};

/// File names inside a corpus directory.
inline constexpr std::string_view kPrefixesFile = "prefixes.jsonl";
inline constexpr std::string_view kPairsFile = "pairs.jsonl";
inline constexpr std::string_view kControlsFile = "controls.jsonl";

/// Loads prefixes, pairs and controls from `dir`. Word counts are recomputed
/// from the text. Throws Error(Corpus|Parse) naming the file and line for
/// malformed records, duplicate ids, unknown strategy labels, and rubrics
/// missing a label token. Out-of-range word counts and empty files are
/// reported as warnings.
CorpusLoad load_corpus(const std::filesystem::path& dir);

/// Writes the three corpus files into `dir` in canonical form.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::string serialize_prefixes(std::span<const InfluencePrefix> prefixes);
std::string serialize_pairs(std::span<const DirectivePair> pairs);
std::string serialize_controls(std::span<const ControlText> controls);

/// Digest of the canonical serialization of all three lists.
std::string corpus_digest(const Corpus& corpus);

/// Bounds a bundled prefix must respect.
inline constexpr int kMinPrefixWords = 3;
inline constexpr int kMaxPrefixWords = 19;

/// Checks each quoted label token appears exactly once; returns the missing
/// or repeated labels (empty when well-formed).
std::vector<char> rubric_label_problems(std::string_view rubric);

enum class Severity { Info, Warning, Error };
std::string_view to_string(Severity s) noexcept;

struct Finding {
  Severity severity = Severity::Info;
  std::string code;
  std::string message;
};

/// Dataset-size expectations. They are configuration, not invariants.
struct ValidationTargets {
  int per_strategy = 30;
  int per_strategy_tolerance = 3;
  std::optional<int> total_prefixes;
  int min_words = kMinPrefixWords;
  int max_words = kMaxPrefixWords;
};

struct ValidationReport {
  std::map<Strategy, int> strategy_counts;
  std::map<Mechanism, int> mechanism_counts;
  std::size_t prefix_count = 0;
  std::size_t pair_count = 0;
  std::size_t control_count = 0;
  std::optional<LengthStats> length_stats;
  std::vector<Finding> findings;

  bool has_errors() const noexcept;
  std::size_t count(Severity s) const noexcept;
  std::string to_text() const;
};

ValidationReport validate_corpus(const Corpus& corpus, const ValidationTargets& targets = {});

LengthStats corpus_stats(std::span<const InfluencePrefix> prefixes);
LengthStats length_stats(std::span<const int> word_counts);

/// Deterministic length-matched lorem-ipsum controls. The word-count multiset
/// has exactly stats.min, stats.max and (lower) median stats.median. Requires
/// n >= 3 and min <= median <= max.
std::vector<ControlText> generate_controls(const LengthStats& stats, int n);

}  // namespace framebench
