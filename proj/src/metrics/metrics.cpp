#include "framebench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "framebench/error.hpp"
#include "framebench/kernels.hpp"

namespace framebench {

using nlohmann::json;

namespace {

double share(std::uint64_t k, std::uint64_t n) {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n);
}

// Outcome codes for the histogram kernel; 4 marks an unjudged trial.
std::uint8_t outcome_code(const std::optional<Outcome>& o) {
  if (!o) return 4;
  switch (*o) {
    case Outcome::FramedCompliance: return 0;
    case Outcome::PriorCompliance: return 1;
    case Outcome::Both: return 2;
    case Outcome::Neither: return 3;
  }
  return 4;
}

constexpr std::pair<GroupBy, std::string_view> kGroupNames[] = {
    {GroupBy::Model, "model"},         {GroupBy::ConditionClass, "condition-class"},
    {GroupBy::Mechanism, "mechanism"}, {GroupBy::Strategy, "strategy"},
    {GroupBy::Prefix, "prefix"},       {GroupBy::Pair, "pair"},
};

}  // namespace

Distribution Distribution::from_counts(std::uint64_t framed, std::uint64_t prior, std::uint64_t both,
                                       std::uint64_t neither, std::uint64_t unjudged) {
  Distribution d;
  d.framed = framed;
  d.prior = prior;
  d.both = both;
  d.neither = neither;
  d.n = framed + prior + both + neither;
  d.unjudged = unjudged;
  d.framed_pct = share(framed, d.n);
  d.prior_pct = share(prior, d.n);
  d.both_pct = share(both, d.n);
  d.neither_pct = share(neither, d.n);
  return d;
}

Distribution Distribution::from_percentages(double framed_pct, double prior_pct, double both_pct,
                                            double neither_pct, std::uint64_t n) {
  for (double v : {framed_pct, prior_pct, both_pct, neither_pct}) {
    if (!(v >= 0.0 && v <= 100.0)) throw Error(ErrorKind::Invalid, "percentage outside [0, 100]");
  }
  if (std::abs(framed_pct + prior_pct + both_pct + neither_pct - 100.0) > 0.5) {
    throw Error(ErrorKind::Invalid, "percentages do not sum to 100");
  }
  Distribution d;
  d.n = n;
  d.framed_pct = framed_pct;
  d.prior_pct = prior_pct;
  d.both_pct = both_pct;
  d.neither_pct = neither_pct;
  return d;
}

double Distribution::pct(Outcome o) const noexcept {
  switch (o) {
    case Outcome::FramedCompliance: return framed_pct;
    case Outcome::PriorCompliance: return prior_pct;
    case Outcome::Both: return both_pct;
    case Outcome::Neither: return neither_pct;
  }
  return 0.0;
}

json to_json(const Distribution& d) {
  return {{"framed", d.framed},         {"prior", d.prior},           {"both", d.both},
          {"neither", d.neither},       {"n", d.n},                   {"unjudged", d.unjudged},
          {"framed_pct", d.framed_pct}, {"prior_pct", d.prior_pct},   {"both_pct", d.both_pct},
          {"neither_pct", d.neither_pct}};
}

Distribution distribution_from_json(const json& j) {
  try {
    Distribution d = Distribution::from_counts(j.at("framed").get<std::uint64_t>(), j.at("prior").get<std::uint64_t>(),
                                               j.at("both").get<std::uint64_t>(), j.at("neither").get<std::uint64_t>(),
                                               j.at("unjudged").get<std::uint64_t>());
    if (d.n != j.at("n").get<std::uint64_t>()) throw Error(ErrorKind::Parse, "distribution n disagrees with counts");
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("distribution record: ") + e.what());
  }
}

std::string_view to_string(GroupBy g) noexcept {
  for (const auto& [v, name] : kGroupNames) {
    if (v == g) return name;
  }
  return "?";
}

std::optional<GroupBy> parse_group_by(std::string_view s) noexcept {
  for (const auto& [v, name] : kGroupNames) {
    if (name == s) return v;
  }
  return std::nullopt;
}

std::optional<std::string> group_key(const ScoredTrial& t, GroupBy by) {
  const bool influence = t.condition.kind == ConditionKind::Influence;
  switch (by) {
    case GroupBy::Model: return t.model_id;
    case GroupBy::ConditionClass: return std::string(condition_class(t.condition.kind));
    case GroupBy::Mechanism:
      if (!influence || !t.strategy) return std::nullopt;
      return std::string(to_string(mechanism_of(*t.strategy)));
    case GroupBy::Strategy:
      if (!influence || !t.strategy) return std::nullopt;
      return std::string(to_string(*t.strategy));
    case GroupBy::Prefix:
      if (!influence) return std::nullopt;
      return t.condition.id;
    case GroupBy::Pair: return t.pair_id;
  }
  return std::nullopt;
}

std::map<std::string, Distribution> aggregate(std::span<const ScoredTrial> trials, GroupBy by,
                                              const TrialFilter& filter) {
  std::map<std::string, std::vector<std::uint8_t>> codes;
  for (const auto& t : trials) {
    if (filter && !filter(t)) continue;
    auto key = group_key(t, by);
    if (!key) continue;
    codes[*key].push_back(outcome_code(t.outcome));
  }
  if (codes.empty()) {
    throw Error(ErrorKind::Invalid, "no trials left to aggregate by " + std::string(to_string(by)));
  }
  std::map<std::string, Distribution> out;
  for (const auto& [key, c] : codes) {
    const auto h = kernels::count_codes(c);
    out.emplace(key, Distribution::from_counts(h[0], h[1], h[2], h[3], h[4]));
  }
  return out;
}

Boost compute_boost(const Distribution& baseline, const Distribution& treatment) {
  if (!(baseline.framed_pct > 0.0)) {
    throw Error(ErrorKind::Invalid, "relative boost is undefined at a zero baseline framed rate");
  }
  Boost b;
  b.absolute_pp = treatment.framed_pct - baseline.framed_pct;
  b.relative_pct = 100.0 * b.absolute_pp / baseline.framed_pct;
  return b;
}

double average_relative_boost(std::span<const Boost> boosts) {
  if (boosts.empty()) throw Error(ErrorKind::Invalid, "average of no boosts");
  std::vector<double> rel;
  rel.reserve(boosts.size());
  for (const auto& b : boosts) rel.push_back(b.relative_pct);
  return kernels::sum(rel) / static_cast<double>(rel.size());
}

std::vector<std::pair<Strategy, double>> strategy_ranking(const std::map<Strategy, Distribution>& per_strategy) {
  std::vector<std::pair<Strategy, double>> out;
  for (Strategy s : kAllStrategies) {
    auto it = per_strategy.find(s);
    if (it == per_strategy.end()) {
      throw Error(ErrorKind::Invalid, "ranking is missing strategy " + std::string(to_string(s)));
    }
    out.emplace_back(s, it->second.framed_pct);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return to_string(x.first) < to_string(y.first);
  });
  return out;
}

double compliance_variance(std::span<const double> rates) {
  if (rates.size() < 2) throw Error(ErrorKind::Invalid, "variance needs at least two rates");
  const double n = static_cast<double>(rates.size());
  const double mean = kernels::sum(rates) / n;
  return kernels::sum_squared_deviation(rates, mean) / n;
}

std::map<std::string, double> per_prefix_framed_rates(std::span<const ScoredTrial> trials) {
  std::map<std::string, double> out;
  for (const auto& [prefix, d] : aggregate(trials, GroupBy::Prefix)) {
    if (d.n > 0) out.emplace(prefix, static_cast<double>(d.framed) / static_cast<double>(d.n));
  }
  return out;
}

double instance_variance(std::span<const ScoredTrial> trials) {
  std::uint64_t framed = 0;
  std::uint64_t n = 0;
  for (const auto& t : trials) {
    if (t.condition.kind != ConditionKind::Influence || !t.outcome) continue;
    ++n;
    if (*t.outcome == Outcome::FramedCompliance) ++framed;
  }
  if (n < 2) throw Error(ErrorKind::Invalid, "variance needs at least two judged influence trials");
  const double p = static_cast<double>(framed) / static_cast<double>(n);
  return p * (1.0 - p);
}

}  // namespace framebench
