#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "framebench/composer.hpp"
#include "framebench/corpus.hpp"
#include "framebench/judge.hpp"

namespace framebench {

/// Four-way outcome shares over judged trials. Percentages keep full
/// precision; rounding happens only when a report is written.
struct Distribution {
  std::uint64_t framed = 0;
  std::uint64_t prior = 0;
  std::uint64_t both = 0;
  std::uint64_t neither = 0;
  std::uint64_t n = 0;         // judged trials
  std::uint64_t unjudged = 0;  // excluded from every denominator
  double framed_pct = 0.0;
  double prior_pct = 0.0;
  double both_pct = 0.0;
  double neither_pct = 0.0;

  static Distribution from_counts(std::uint64_t framed, std::uint64_t prior, std::uint64_t both,
                                  std::uint64_t neither, std::uint64_t unjudged = 0);

  /// For published aggregates with no underlying counts. Each value must lie
  /// in [0, 100] and the four must sum to 100 within 0.5 (printed tables
  /// round every cell independently).
  static Distribution from_percentages(double framed_pct, double prior_pct, double both_pct,
                                       double neither_pct, std::uint64_t n = 0);

  double pct(Outcome o) const noexcept;
  bool operator==(const Distribution&) const = default;
};

nlohmann::json to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

/// Everything metrics needs to know about one trial.
struct ScoredTrial {
  std::string model_id;
  std::string pair_id;
  Condition condition;
  Order order = Order::AFirst;
  std::optional<Strategy> strategy;  // influence trials only
  std::optional<Outcome> outcome;    // unset when unjudged

  bool operator==(const ScoredTrial&) const = default;
};

enum class GroupBy { Model, ConditionClass, Mechanism, Strategy, Prefix, Pair };
std::string_view to_string(GroupBy g) noexcept;
std::optional<GroupBy> parse_group_by(std::string_view s) noexcept;

/// Group key of `t`, or nullopt when the grouping does not apply (e.g. a
/// baseline trial has no mechanism).
std::optional<std::string> group_key(const ScoredTrial& t, GroupBy by);

using TrialFilter = std::function<bool(const ScoredTrial&)>;

/// Per-group distributions. Trials outside the filter or without a key for
/// `by` are skipped; throws Error(Invalid) if nothing remains.
std::map<std::string, Distribution> aggregate(std::span<const ScoredTrial> trials, GroupBy by,
                                              const TrialFilter& filter = {});

struct Boost {
  double absolute_pp = 0.0;
  double relative_pct = 0.0;

  bool operator==(const Boost&) const = default;
};

/// Framed-compliance change from baseline to treatment. Throws Error(Invalid)
/// when the baseline framed rate is zero.
Boost compute_boost(const Distribution& baseline, const Distribution& treatment);

/// Mean of the per-model relative boosts. Throws on an empty list.
double average_relative_boost(std::span<const Boost> boosts);

/// All 13 strategies by framed share, highest first; ties by strategy name.
/// Throws Error(Invalid) naming a missing strategy.
std::vector<std::pair<Strategy, double>> strategy_ranking(const std::map<Strategy, Distribution>& per_strategy);

enum class PValueMethod {
  Auto,              // exact for n <= kExactSpearmanDefaultN, t otherwise
  ExactPermutation,  // n <= kernels::kMaxPermutationN
  TApproximation,
};

inline constexpr std::size_t kExactSpearmanDefaultN = 9;

struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  std::string stars;
  bool exact = false;
};

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

std::string significance_stars(double p) noexcept;

/// Two-sided p-value of rho under the t-approximation with n - 2 degrees of
/// freedom. Requires n >= 3.
double spearman_t_pvalue(double rho, std::size_t n);

/// Spearman's rho with a two-sided p-value. Throws Error(Invalid) on a length
/// mismatch, n < 3, a constant list, or an exact request beyond the
/// enumeration limit.
RankCorrelation spearman(std::span<const double> a, std::span<const double> b,
                         PValueMethod method = PValueMethod::Auto);

/// Population variance of per-prefix framed rates. Throws on fewer than two.
double compliance_variance(std::span<const double> rates);

/// Framed rate in [0, 1] per influence prefix over judged trials.
std::map<std::string, double> per_prefix_framed_rates(std::span<const ScoredTrial> trials);

/// The per-instance alternative: variance of the 0/1 framed indicator over
/// judged influence trials, p(1 - p).
double instance_variance(std::span<const ScoredTrial> trials);

}  // namespace framebench
