#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "framebench/corpus.hpp"

namespace framebench {

/// Version tag of the prompt layout below; recorded in every manifest.
inline constexpr std::string_view kPromptFormat = "framebench-prompt/1";
inline constexpr std::string_view kPlanSchema = "framebench-plan/1";

/// Which directive of the pair comes first (is "prior").
enum class Order { AFirst, BFirst };

constexpr Order flip(Order o) noexcept { return o == Order::AFirst ? Order::BFirst : Order::AFirst; }
std::string_view to_string(Order o) noexcept;
std::optional<Order> parse_order(std::string_view s) noexcept;

/// Where the prefix goes. Second is the standard structure; First and Both
/// exist only for the position-variance diagnostic.
enum class Placement { Second, First, Both };
std::string_view to_string(Placement p) noexcept;
std::optional<Placement> parse_placement(std::string_view s) noexcept;

enum class ConditionKind { NoPrefix, Control, Influence };

struct Condition {
  ConditionKind kind = ConditionKind::NoPrefix;
  std::string id;  // control or prefix id; empty for NoPrefix

  static Condition no_prefix() { return {}; }
  static Condition control(std::string id) { return {ConditionKind::Control, std::move(id)}; }
  static Condition influence(std::string id) { return {ConditionKind::Influence, std::move(id)}; }

  /// "no-prefix", "control:<id>" or "influence:<id>".
  std::string label() const;
  static std::optional<Condition> parse(std::string_view label);

  auto operator<=>(const Condition&) const = default;
};

std::string_view condition_class(ConditionKind k) noexcept;

struct TrialSpec {
  std::string pair_id;
  Order order = Order::AFirst;
  Condition condition;
  std::string model_id;
  int replicate_index = 0;
  Placement placement = Placement::Second;

  bool operator==(const TrialSpec&) const = default;
};

/// Plan order: model, pair, condition (no-prefix, controls, influences; then
/// id), order, replicate, placement.
bool plan_less(const TrialSpec& a, const TrialSpec& b);

struct PromptText {
  std::string text;
  std::string prior_directive;
  std::string framed_directive;
  std::optional<std::string> prefix_text;

  bool operator==(const PromptText&) const = default;
};

/// Builds the single user message:
///   NoPrefix:        "{prior}\n\n{framed}"
///   Control/Influence (Second): "{prior}\n\n{prefix} {framed}"
///   First:           "{prefix} {prior}\n\n{framed}"
///   Both:            "{prefix} {prior}\n\n{prefix} {framed}"
/// Throws Error(Invalid) when the condition id is not in the corpus.
PromptText compose_prompt(const DirectivePair& pair, Order order, const Condition& condition,
                          const Corpus& corpus, Placement placement = Placement::Second);

/// Convenience overload resolving spec.pair_id in the corpus.
PromptText compose_prompt(const TrialSpec& spec, const Corpus& corpus);

enum class OrderSelector { Both, AFirst, BFirst };
std::optional<OrderSelector> parse_order_selector(std::string_view s) noexcept;

struct ConditionSelector {
  bool no_prefix = true;
  bool control = true;
  bool influence = true;
  std::vector<std::string> prefix_ids;   // empty selects every prefix
  std::vector<std::string> control_ids;  // empty selects every control

  /// "all", "no-prefix", "control", "influence", or a comma list of those.
  static std::optional<ConditionSelector> parse(std::string_view s);
};

struct PlanOptions {
  ConditionSelector conditions;
  OrderSelector orders = OrderSelector::Both;
  Placement placement = Placement::Second;
  std::vector<std::string> pair_ids;  // empty selects every pair
  int replicates = 1;
};

/// Cartesian product pairs x orders x conditions x models x replicates in
/// plan order. Throws Error(Invalid) on an empty selection or unknown ids.
std::vector<TrialSpec> plan_trials(const Corpus& corpus, std::span<const std::string> models,
                                   const PlanOptions& options = {});

/// Injective serialization of a spec (length-prefixed fields).
std::string canonical_spec(const TrialSpec& spec);

/// SHA-256 over the canonical spec plus the composed prompt text, so edits to
/// the corpus produce new keys.
std::string trial_key(const TrialSpec& spec, const PromptText& prompt);
std::string trial_key(const TrialSpec& spec, const Corpus& corpus);

nlohmann::json to_json(const TrialSpec& spec);
TrialSpec trial_spec_from_json(const nlohmann::json& j);

}  // namespace framebench
