#include <doctest.h>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/scripted.hpp"
#include "helpers.hpp"

using namespace framebench;
using Match = ScriptRule::Match;

namespace {

ScriptRule rule(Match m, std::vector<std::string> needles, std::string reply, ScriptBlock block = ScriptBlock::Any,
                double p = 1.0) {
  return {m, std::move(needles), block, p, std::move(reply)};
}

ScriptRule fallback(std::string reply) { return rule(Match::Default, {}, std::move(reply)); }

}  // namespace

TEST_CASE("first matching rule wins") {
  ScriptedModel m({rule(Match::Contains, {"apple"}, "A"), rule(Match::Contains, {"pear"}, "P"), fallback("D")});
  CHECK(m.respond("an apple and a pear") == "A");
  CHECK(m.respond("a pear") == "P");
  CHECK(m.respond("a plum") == "D");
}

TEST_CASE("any, all and regex matching") {
  ScriptedModel m({rule(Match::ContainsAll, {"red", "blue"}, "both"), rule(Match::ContainsAny, {"red", "blue"}, "one"),
                   rule(Match::Regex, {"^[0-9]+$"}, "digits"), fallback("none")});
  CHECK(m.respond("red and blue") == "both");
  CHECK(m.respond("only blue") == "one");
  CHECK(m.respond("12345") == "digits");
  CHECK(m.respond("12a45") == "none");
}

TEST_CASE("block scopes restrict matching to the first or last paragraph") {
  ScriptedModel m({rule(Match::Contains, {"alpha"}, "first", ScriptBlock::First),
                   rule(Match::Contains, {"alpha"}, "last", ScriptBlock::Last), fallback("middle")});
  CHECK(m.respond("alpha\n\nbeta\n\ngamma") == "first");
  CHECK(m.respond("beta\n\ngamma\n\nalpha") == "last");
  CHECK(m.respond("beta\n\nalpha\n\ngamma") == "middle");
  CHECK(m.respond("alpha") == "first");
}

TEST_CASE("reply templates expand the prompt and its blocks") {
  ScriptedModel m({fallback("<{first}|{last}|{prompt}|{other}>")});
  CHECK(m.respond("one\n\ntwo\n\nthree") == "<one|three|one\n\ntwo\n\nthree|{other}>");
  CHECK(m.respond("single") == "<single|single|single|{other}>");
}

TEST_CASE("probability gates are deterministic and follow the hash") {
  ScriptedModel m({rule(Match::Default, {}, "gated", ScriptBlock::Any, 0.3), fallback("open")});
  int gated = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::string prompt = "prompt number " + std::to_string(i);
    const auto reply = m.respond(prompt);
    CHECK(reply == m.respond(prompt));
    const bool expect = unit_interval_hash(prompt + '\x1f' + "0") < 0.3;
    CHECK((reply == "gated") == expect);
    gated += reply == "gated";
  }
  CHECK(gated > 500);
  CHECK(gated < 700);

  ScriptedModel never({rule(Match::Default, {}, "never", ScriptBlock::Any, 0.0), fallback("open")});
  CHECK(never.respond("anything") == "open");
}

TEST_CASE("malformed scripts are rejected") {
  CHECK_THROWS_AS(ScriptedModel({}), Error);
  CHECK_THROWS_AS(ScriptedModel({rule(Match::Contains, {"x"}, "y")}), Error);
  CHECK_THROWS_AS(ScriptedModel({rule(Match::Contains, {}, "y"), fallback("d")}), Error);
  CHECK_THROWS_AS(ScriptedModel({rule(Match::Regex, {"("}, "y"), fallback("d")}), Error);
  CHECK_THROWS_AS(ScriptedModel({rule(Match::Default, {}, "y", ScriptBlock::Any, 1.5)}), Error);
  CHECK_THROWS_AS(ScriptedModel::from_json({{"rules", {{{"match", "sometimes"}, {"reply", "x"}}}}}), Error);
  CHECK_THROWS_AS(ScriptedModel::from_json({{"rules", {{{"match", "default"}}}}}), Error);
}

TEST_CASE("scripts round-trip through JSON and load from disk") {
  ScriptedModel m({rule(Match::ContainsAll, {"a", "b"}, "B", ScriptBlock::Last, 0.25),
                   rule(Match::Regex, {"x+"}, "X"), fallback("{last}")});
  const auto j = m.to_json();
  CHECK(j["schema"] == kScriptSchema);
  CHECK(ScriptedModel::from_json(j).to_json() == j);

  testing::TempDir dir;
  testing::write_text(dir / "s.json", j.dump());
  const auto loaded = ScriptedModel::load(dir / "s.json");
  CHECK(loaded.rules().size() == 3);
  CHECK(loaded.respond("p\n\nq") == m.respond("p\n\nq"));

  testing::write_text(dir / "bad.json", R"({"rules":[{"reply":"x"}]})");
  CHECK_THROWS_AS(ScriptedModel::load(dir / "bad.json"), Error);
}

TEST_CASE("scripted backend replies to the last user message") {
  ScriptedBackend backend(ScriptedModel({rule(Match::Contains, {"silent"}, ""), fallback("echo: {prompt}")}));
  ChatRequest req;
  req.messages = {{"user", "first"}, {"assistant", "ignored"}, {"user", "second"}};
  const auto reply = backend.complete(req);
  CHECK(reply.status == TransportStatus::Ok);
  CHECK(reply.text == "echo: second");

  req.messages = {{"user", "silent please"}};
  CHECK(backend.complete(req).status == TransportStatus::ProviderError);
  req.messages = {{"system", "no user"}};
  CHECK(backend.complete(req).status == TransportStatus::BadRequest);
}
