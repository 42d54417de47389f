#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "framebench/error.hpp"
#include "framebench/metrics.hpp"

using namespace framebench;

namespace {

ScoredTrial trial(std::optional<Outcome> outcome, Condition c = Condition::no_prefix(),
                  std::optional<Strategy> s = std::nullopt, std::string model = "m", std::string pair = "pair-01") {
  return {std::move(model), std::move(pair), std::move(c), Order::AFirst, s, outcome};
}

ScoredTrial influence(std::string prefix, Strategy s, std::optional<Outcome> outcome) {
  return trial(outcome, Condition::influence(std::move(prefix)), s);
}

// Independent oracle: plain counting loop.
std::array<double, 4> oracle_pct(const std::vector<ScoredTrial>& ts) {
  std::array<double, 4> counts{};
  double n = 0;
  for (const auto& t : ts) {
    if (!t.outcome) continue;
    n += 1;
    counts[static_cast<int>(*t.outcome)] += 1;
  }
  for (auto& c : counts) c = 100.0 * c / n;
  return counts;
}

}  // namespace

TEST_CASE("distribution from trials") {
  std::vector<ScoredTrial> ts{trial(Outcome::FramedCompliance), trial(Outcome::FramedCompliance),
                              trial(Outcome::FramedCompliance), trial(Outcome::PriorCompliance)};
  const auto d = aggregate(ts, GroupBy::Model).at("m");
  CHECK(d.framed_pct == 75.0);
  CHECK(d.prior_pct == 25.0);
  CHECK(d.both_pct == 0.0);
  CHECK(d.neither_pct == 0.0);
  CHECK(d.n == 4);

  std::vector<ScoredTrial> both(7, trial(Outcome::Both));
  CHECK(aggregate(both, GroupBy::Model).at("m").both_pct == 100.0);

  ts.push_back(trial(std::nullopt));
  ts.push_back(trial(std::nullopt));
  const auto u = aggregate(ts, GroupBy::Model).at("m");
  CHECK(u.n == 4);
  CHECK(u.unjudged == 2);
  CHECK(u.framed_pct == 75.0);
}

TEST_CASE("shares sum to 100 and ignore trial order") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    const int n = 1 + static_cast<int>(rng() % 300);
    std::vector<ScoredTrial> ts;
    for (int i = 0; i < n; ++i) {
      const auto k = rng() % 5;
      ts.push_back(trial(k == 4 ? std::nullopt : std::optional<Outcome>(kAllOutcomes[k])));
    }
    if (std::none_of(ts.begin(), ts.end(), [](const auto& t) { return t.outcome.has_value(); })) continue;
    const auto d = aggregate(ts, GroupBy::Model).at("m");
    CHECK(d.framed_pct + d.prior_pct + d.both_pct + d.neither_pct == doctest::Approx(100.0).epsilon(1e-12));
    const auto want = oracle_pct(ts);
    for (auto o : kAllOutcomes) CHECK(d.pct(o) == doctest::Approx(want[static_cast<int>(o)]).epsilon(1e-12));
    std::shuffle(ts.begin(), ts.end(), rng);
    CHECK(aggregate(ts, GroupBy::Model).at("m") == d);
  }
}

TEST_CASE("grouping keys by model, condition class, mechanism, strategy, prefix and pair") {
  std::vector<ScoredTrial> ts{
      trial(Outcome::FramedCompliance),
      trial(Outcome::PriorCompliance, Condition::control("lorem-01")),
      influence("p1", Strategy::Reciprocity, Outcome::FramedCompliance),
      influence("p2", Strategy::Reciprocity, Outcome::PriorCompliance),
      influence("p3", Strategy::Hypotheticals, Outcome::Both),
      trial(Outcome::Neither, Condition::no_prefix(), std::nullopt, "other", "pair-02"),
  };
  const auto by_class = aggregate(ts, GroupBy::ConditionClass);
  CHECK(by_class.at("no-prefix").n == 2);
  CHECK(by_class.at("control").n == 1);
  CHECK(by_class.at("influence").n == 3);

  const auto by_mech = aggregate(ts, GroupBy::Mechanism);
  CHECK(by_mech.size() == 2);
  CHECK(by_mech.at("SocialContract").framed_pct == 50.0);
  CHECK(by_mech.at("Narrative").both_pct == 100.0);

  CHECK(aggregate(ts, GroupBy::Strategy).at("Reciprocity").n == 2);
  CHECK(aggregate(ts, GroupBy::Prefix).size() == 3);
  CHECK(aggregate(ts, GroupBy::Pair).at("pair-02").neither_pct == 100.0);
  CHECK(aggregate(ts, GroupBy::Model).at("other").n == 1);

  const auto filtered = aggregate(ts, GroupBy::Model, [](const ScoredTrial& t) { return t.pair_id == "pair-01"; });
  CHECK(filtered.size() == 1);
  CHECK_THROWS_AS(aggregate(ts, GroupBy::Model, [](const ScoredTrial&) { return false; }), Error);
  for (auto g : {GroupBy::Model, GroupBy::ConditionClass, GroupBy::Mechanism, GroupBy::Strategy, GroupBy::Prefix,
                 GroupBy::Pair}) {
    CHECK(parse_group_by(to_string(g)) == g);
  }
}

TEST_CASE("published percentages are accepted within rounding") {
  const auto d = Distribution::from_percentages(40.0, 21.9, 37.0, 1.1);
  CHECK(d.framed_pct == 40.0);
  CHECK_NOTHROW(Distribution::from_percentages(33.3, 33.3, 33.3, 0.0));
  CHECK_THROWS_AS(Distribution::from_percentages(50, 50, 50, 0), Error);
  CHECK_THROWS_AS(Distribution::from_percentages(-1, 51, 50, 0), Error);
  const auto c = Distribution::from_counts(3, 1, 0, 0, 2);
  CHECK(distribution_from_json(to_json(c)) == c);
}

TEST_CASE("boosts from baseline to treatment") {
  const auto b = compute_boost(Distribution::from_percentages(12.0, 61.2, 26.8, 0.0),
                               Distribution::from_percentages(40.0, 21.9, 37.0, 1.1));
  CHECK(b.absolute_pp == doctest::Approx(28.0));
  CHECK(b.relative_pct == doctest::Approx(700.0 / 3.0));

  const auto q = compute_boost(Distribution::from_percentages(42.1, 42.3, 13.0, 2.6),
                               Distribution::from_percentages(63.7, 22.0, 12.6, 1.7));
  CHECK(q.absolute_pp == doctest::Approx(21.6));
  CHECK(q.relative_pct == doctest::Approx(51.3).epsilon(0.001));

  const auto same = Distribution::from_counts(1, 1, 0, 0);
  CHECK(compute_boost(same, same) == Boost{0.0, 0.0});
  CHECK_THROWS_AS(compute_boost(Distribution::from_counts(0, 4, 0, 0), same), Error);
}

TEST_CASE("average relative boost is the mean of relatives") {
  const std::vector<Boost> published{{28.0, 233.0}, {21.6, 51.4}, {18.0, 42.7}, {23.0, 107.9}, {12.4, 87.5}};
  CHECK(average_relative_boost(published) == doctest::Approx(104.5).epsilon(1e-3));
  const std::vector<Boost> one{{1.0, 17.0}};
  CHECK(average_relative_boost(one) == 17.0);
  const std::vector<Boost> two{{0, 0}, {0, 100}};
  CHECK(average_relative_boost(two) == 50.0);
  CHECK_THROWS_AS(average_relative_boost({}), Error);
}

TEST_CASE("strategy ranking orders by framed share with name ties") {
  std::map<Strategy, Distribution> equal;
  for (auto s : kAllStrategies) equal[s] = Distribution::from_counts(1, 1, 0, 0);
  const auto alpha = strategy_ranking(equal);
  REQUIRE(alpha.size() == 13);
  for (std::size_t i = 1; i < alpha.size(); ++i) CHECK(to_string(alpha[i - 1].first) < to_string(alpha[i].first));

  auto uneven = equal;
  uneven[Strategy::Hypotheticals] = Distribution::from_counts(3, 2, 0, 0);
  uneven[Strategy::Reciprocity] = Distribution::from_counts(2, 3, 0, 0);
  const auto r = strategy_ranking(uneven);
  CHECK(r.front().first == Strategy::Hypotheticals);
  CHECK(r.front().second == 60.0);
  CHECK(r.back().first == Strategy::Reciprocity);

  uneven.erase(Strategy::Reciprocity);
  CHECK_THROWS_WITH_AS(strategy_ranking(uneven), doctest::Contains("Reciprocity"), Error);
}

TEST_CASE("compliance variance is the population variance of prefix rates") {
  const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
  CHECK(compliance_variance(flat) == 0.0);
  const std::vector<double> split{0.0, 1.0};
  CHECK(compliance_variance(split) == doctest::Approx(0.25));
  const std::vector<double> mixed{0.1, 0.2, 0.6};
  CHECK(compliance_variance(mixed) == doctest::Approx((0.04 + 0.01 + 0.09) / 3.0));
  const std::vector<double> single{0.3};
  CHECK_THROWS_AS(compliance_variance(single), Error);

  std::vector<ScoredTrial> ts{influence("p1", Strategy::Reciprocity, Outcome::FramedCompliance),
                              influence("p1", Strategy::Reciprocity, Outcome::FramedCompliance),
                              influence("p2", Strategy::Reciprocity, Outcome::PriorCompliance),
                              influence("p2", Strategy::Reciprocity, Outcome::FramedCompliance),
                              influence("p3", Strategy::Reciprocity, std::nullopt),
                              trial(Outcome::FramedCompliance)};
  const auto rates = per_prefix_framed_rates(ts);
  CHECK(rates.size() == 2);
  CHECK(rates.at("p1") == 1.0);
  CHECK(rates.at("p2") == 0.5);
  CHECK(instance_variance(ts) == doctest::Approx(0.75 * 0.25));
}
