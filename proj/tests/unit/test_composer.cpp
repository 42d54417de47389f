#include <doctest.h>

#include <map>
#include <set>
#include <tuple>

#include "framebench/composer.hpp"
#include "framebench/error.hpp"
#include "helpers.hpp"

using namespace framebench;

TEST_CASE("order and placement names round-trip") {
  for (Order o : {Order::AFirst, Order::BFirst}) {
    CHECK(parse_order(to_string(o)) == o);
    CHECK(flip(flip(o)) == o);
    CHECK(flip(o) != o);
  }
  for (Placement p : {Placement::Second, Placement::First, Placement::Both}) CHECK(parse_placement(to_string(p)) == p);
  CHECK_FALSE(parse_order("sideways").has_value());
}

TEST_CASE("condition labels round-trip") {
  for (const auto& c : {Condition::no_prefix(), Condition::control("lorem-01"), Condition::influence("reciprocity-01")}) {
    CHECK(Condition::parse(c.label()) == c);
  }
  CHECK_FALSE(Condition::parse("influence:").has_value());
  CHECK_FALSE(Condition::parse("bogus:x").has_value());
}

TEST_CASE("prompt layout puts the prefix directly before the framed directive") {
  const auto& c = testing::bundled_corpus();
  const auto& pair = *c.find_pair("pair-03");
  const auto& prefix = *c.find_prefix("reciprocity-01");

  auto p = compose_prompt(pair, Order::AFirst, Condition::no_prefix(), c);
  CHECK(p.text == pair.directive_a + "\n\n" + pair.directive_b);
  CHECK(p.prior_directive == pair.directive_a);
  CHECK(p.framed_directive == pair.directive_b);
  CHECK_FALSE(p.prefix_text.has_value());

  p = compose_prompt(pair, Order::BFirst, Condition::influence("reciprocity-01"), c);
  CHECK(p.text == pair.directive_b + "\n\n" + prefix.text + " " + pair.directive_a);
  CHECK(p.prefix_text == prefix.text);

  const auto& lorem = *c.find_control("lorem-05");
  p = compose_prompt(pair, Order::AFirst, Condition::control("lorem-05"), c);
  CHECK(p.text == pair.directive_a + "\n\n" + lorem.text + " " + pair.directive_b);

  p = compose_prompt(pair, Order::AFirst, Condition::influence("reciprocity-01"), c, Placement::First);
  CHECK(p.text == prefix.text + " " + pair.directive_a + "\n\n" + pair.directive_b);
  p = compose_prompt(pair, Order::AFirst, Condition::influence("reciprocity-01"), c, Placement::Both);
  CHECK(p.text == prefix.text + " " + pair.directive_a + "\n\n" + prefix.text + " " + pair.directive_b);

  CHECK_THROWS_AS(compose_prompt(pair, Order::AFirst, Condition::influence("nope"), c), Error);
  CHECK_THROWS_AS(compose_prompt(pair, Order::AFirst, Condition::control("reciprocity-01"), c), Error);
}

TEST_CASE("plans are counterbalanced, sorted and complete") {
  const auto& c = testing::bundled_corpus();
  const std::vector<std::string> models{"m-b", "m-a"};
  PlanOptions opts;
  opts.pair_ids = {"pair-01", "pair-02", "pair-03"};
  const auto plan = plan_trials(c, models, opts);
  CHECK(plan.size() == 3 * 2 * (1 + 10 + 400) * 2);
  CHECK(std::is_sorted(plan.begin(), plan.end(), plan_less));
  std::map<std::tuple<std::string, std::string, std::string>, std::set<Order>> orders;
  for (const auto& s : plan) orders[{s.pair_id, s.condition.label(), s.model_id}].insert(s.order);
  CHECK(orders.size() == plan.size() / 2);
  for (const auto& [key, set] : orders) CHECK(set.size() == 2);

  std::set<std::string> keys;
  for (const auto& s : plan) keys.insert(trial_key(s, c));
  CHECK(keys.size() == plan.size());
}

TEST_CASE("plan selectors narrow the matrix") {
  const auto& c = testing::bundled_corpus();
  const std::vector<std::string> models{"m"};
  PlanOptions opts;
  opts.pair_ids = {"pair-01"};
  opts.conditions = *ConditionSelector::parse("no-prefix,control");
  opts.orders = OrderSelector::BFirst;
  const auto plan = plan_trials(c, models, opts);
  CHECK(plan.size() == 11);
  for (const auto& s : plan) {
    CHECK(s.order == Order::BFirst);
    CHECK(s.condition.kind != ConditionKind::Influence);
  }
  opts.conditions = *ConditionSelector::parse("influence");
  opts.conditions.prefix_ids = {"reciprocity-01", "hypotheticals-01"};
  opts.orders = OrderSelector::Both;
  CHECK(plan_trials(c, models, opts).size() == 4);

  opts.conditions.prefix_ids = {"nope"};
  CHECK_THROWS_AS(plan_trials(c, models, opts), Error);
  opts.conditions.prefix_ids = {};
  opts.pair_ids = {"pair-99"};
  CHECK_THROWS_AS(plan_trials(c, models, opts), Error);
  CHECK_THROWS_AS(plan_trials(c, std::vector<std::string>{}, PlanOptions{}), Error);
  CHECK_FALSE(ConditionSelector::parse("sometimes").has_value());
}

TEST_CASE("trial keys are stable and sensitive to every field and the prompt") {
  const auto& c = testing::bundled_corpus();
  TrialSpec s{"pair-01", Order::AFirst, Condition::influence("reciprocity-01"), "model", 0, Placement::Second};
  const auto key = trial_key(s, c);
  CHECK(key.size() == 64);
  CHECK(key == trial_key(s, c));

  auto t = s;
  t.order = Order::BFirst;
  CHECK(trial_key(t, c) != key);
  t = s;
  t.model_id = "model2";
  CHECK(trial_key(t, c) != key);
  t = s;
  t.replicate_index = 1;
  CHECK(trial_key(t, c) != key);
  t = s;
  t.placement = Placement::First;
  CHECK(trial_key(t, c) != key);

  auto prompt = compose_prompt(s, c);
  prompt.text += " ";
  CHECK(trial_key(s, prompt) != key);
}

TEST_CASE("canonical spec is injective across field boundaries") {
  TrialSpec a{"ab", Order::AFirst, Condition::influence("c"), "m", 0, Placement::Second};
  TrialSpec b{"a", Order::AFirst, Condition::influence("bc"), "m", 0, Placement::Second};
  CHECK(canonical_spec(a) != canonical_spec(b));
}

TEST_CASE("trial specs round-trip through JSON") {
  TrialSpec s{"pair-07", Order::BFirst, Condition::control("lorem-03"), "qwen", 2, Placement::Both};
  CHECK(trial_spec_from_json(to_json(s)) == s);
  CHECK_THROWS_AS(trial_spec_from_json(nlohmann::json{{"pair_id", "x"}}), Error);
}
