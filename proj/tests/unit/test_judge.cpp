#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/judge.hpp"
#include "framebench/scripted.hpp"
#include "helpers.hpp"

using namespace framebench;
using Match = ScriptRule::Match;
using nlohmann::json;

namespace {

const DirectivePair kPair{"pair-t", "Answer in French.", "Answer in German.",
                          "Reply X if French, Y if German, B if both, N if neither."};

ModelEndpoint judge_endpoint() {
  ModelEndpoint e;
  e.model_id = "judge";
  e.kind = BackendKind::Scripted;
  e.decoding.temperature = 0.9;  // the judge overrides this
  return e;
}

std::shared_ptr<InstrumentedBackend> scripted(std::vector<ScriptRule> rules) {
  return std::make_shared<InstrumentedBackend>(std::make_shared<ScriptedBackend>(ScriptedModel(std::move(rules))));
}

ScriptRule on(std::string needle, std::string reply) {
  return {Match::Contains, {std::move(needle)}, ScriptBlock::Any, 1.0, std::move(reply)};
}

ScriptRule otherwise(std::string reply) { return {Match::Default, {}, ScriptBlock::Any, 1.0, std::move(reply)}; }

}  // namespace

TEST_CASE("label tokens must stand alone") {
  struct Case {
    const char* reply;
    std::optional<JudgeLabel> want;
  };
  const Case cases[] = {
      {"X", JudgeLabel::X},
      {"  Y\n", JudgeLabel::Y},
      {"The answer is B.", JudgeLabel::B},
      {"\"N\"", JudgeLabel::N},
      {"(X)", JudgeLabel::X},
      {"**Y**", JudgeLabel::Y},
      {"Label: X", JudgeLabel::X},
      {"X-ray vision, so Y", JudgeLabel::Y},
      {"Xavier says N", JudgeLabel::N},
      {"MAX is not a label; B is", JudgeLabel::B},
      {"x y b n", std::nullopt},
      {"N/A", std::nullopt},
      {"Y's reply", std::nullopt},
      {"'Y'", JudgeLabel::Y},
      {"I'd pick 'N'", JudgeLabel::N},
      {"don'X", std::nullopt},
      {"X_1", std::nullopt},
      {"", std::nullopt},
      {"maybe", std::nullopt},
      {"XY", std::nullopt},
      {"\xC3\xA9X\xC3\xA9", JudgeLabel::X},
      {"I'd say: N. Definitely not X.", JudgeLabel::N},
  };
  for (const auto& c : cases) {
    CAPTURE(c.reply);
    CHECK(parse_label(c.reply) == c.want);
  }
}

TEST_CASE("every label and order maps to exactly one outcome") {
  // Oracle: under AFirst the prior directive is A (label X); under BFirst it is B (label Y).
  for (auto order : {Order::AFirst, Order::BFirst}) {
    std::set<Outcome> seen;
    for (auto label : kAllLabels) {
      Outcome want;
      switch (label) {
        case JudgeLabel::B:
          want = Outcome::Both;
          break;
        case JudgeLabel::N:
          want = Outcome::Neither;
          break;
        default: {
          const bool satisfied_a = label == JudgeLabel::X;
          const bool a_is_prior = order == Order::AFirst;
          want = satisfied_a == a_is_prior ? Outcome::PriorCompliance : Outcome::FramedCompliance;
        }
      }
      CHECK(map_outcome(label, order) == want);
      seen.insert(map_outcome(label, order));
    }
    CHECK(seen.size() == 4);
  }
  for (auto label : {JudgeLabel::X, JudgeLabel::Y}) {
    CHECK(map_outcome(label, Order::AFirst) != map_outcome(label, Order::BFirst));
  }
  for (auto o : kAllOutcomes) CHECK(parse_outcome(to_string(o)) == o);
  for (auto l : kAllLabels) CHECK(label_from_char(to_char(l)) == l);
}

TEST_CASE("judge prompt shows the rubric and the response only") {
  const auto p = judge_prompt("RUBRIC", "response body");
  CHECK(p == "RUBRIC\n\n----- RESPONSE TO EVALUATE -----\nresponse body");
  CHECK(judge_prompt("RUBRIC", "r", true) == "RUBRIC\n\n----- RESPONSE TO EVALUATE -----\nr\n\nReply with only one character.");
  CHECK(judge_key("j", p) == sha256_hex(std::string("framebench-judge/1\x1f") + "j\x1f" + p));
  CHECK(judge_key("j", p) != judge_key("k", p));
}

TEST_CASE("classify re-judges once with a reminder") {
  auto backend = scripted({on(std::string(kJudgeReminder), "Y"), otherwise("maybe")});
  const auto j = classify("Guten Tag", kPair, judge_endpoint(), *backend);
  CHECK(j.judged());
  CHECK(j.label == JudgeLabel::Y);
  CHECK(j.judge_calls == 2);
  CHECK(j.judge_raw_text == "Y");
  CHECK(backend->calls() == 2);
  for (const auto& req : backend->captured()) {
    CHECK(req.temperature == 0.0);
    REQUIRE(req.messages.size() == 1);
    CHECK(req.messages[0].content.find("Guten Tag") != std::string::npos);
  }

  auto stubborn = scripted({otherwise("hmm")});
  const auto u = classify("Bonjour", kPair, judge_endpoint(), *stubborn);
  CHECK(u.status == JudgmentStatus::Unparseable);
  CHECK_FALSE(u.label.has_value());
  CHECK(u.judge_calls == 2);

  auto direct = scripted({otherwise("X")});
  CHECK(classify("Bonjour", kPair, judge_endpoint(), *direct).judge_calls == 1);
  CHECK_THROWS_AS(classify("", kPair, judge_endpoint(), *direct), Error);
}

TEST_CASE("judge batches resolve outcomes, re-judge and stay idempotent") {
  testing::TempDir dir;
  ResponseCache cache(dir.path());
  auto backend = scripted({on("Bonjour", "X"), on("Guten", "Y"), on("sort of", "B"),
                           on(std::string(kJudgeReminder), "N"), on("unsure", "well"), otherwise("???")});
  std::vector<JudgeItem> items{{"t1", Order::AFirst, &kPair, "Bonjour"},
                               {"t2", Order::BFirst, &kPair, "Bonjour"},
                               {"t3", Order::AFirst, &kPair, "Guten Tag"},
                               {"t4", Order::AFirst, &kPair, "both, sort of"},
                               {"t5", Order::BFirst, &kPair, "unsure"}};
  BatchOptions opts;
  opts.cache = &cache;
  opts.parallelism = 3;
  JudgeStats stats;
  const auto out = judge_batch(items, judge_endpoint(), *backend, opts, &stats);
  REQUIRE(out.size() == 5);
  CHECK(out[0].outcome == Outcome::PriorCompliance);
  CHECK(out[1].outcome == Outcome::FramedCompliance);
  CHECK(out[2].outcome == Outcome::FramedCompliance);
  CHECK(out[3].outcome == Outcome::Both);
  CHECK(out[4].outcome == Outcome::Neither);
  CHECK(out[4].judge_calls == 2);
  CHECK(stats.judged == 5);
  CHECK(stats.rejudged == 1);
  // t1 and t2 send the same judge prompt; the judge never sees the order.
  CHECK(backend->calls() == 5);

  const auto again = judge_batch(items, judge_endpoint(), *backend, opts, &stats);
  CHECK(backend->calls() == 5);
  CHECK(stats.calls.executed == 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(again[i].outcome == out[i].outcome);
    CHECK(judgment_from_json(to_json(again[i])) == again[i]);
  }
}

TEST_CASE("unanswered judges leave trials unjudged") {
  auto backend = scripted({otherwise("")});
  std::vector<JudgeItem> items{{"t1", Order::AFirst, &kPair, "Bonjour"}};
  JudgeStats stats;
  const auto out = judge_batch(items, judge_endpoint(), *backend, {}, &stats);
  CHECK(out[0].status == JudgmentStatus::TransportFailed);
  CHECK_FALSE(out[0].outcome.has_value());
  CHECK(stats.transport_failures == 1);
  const auto round = judgment_from_json(to_json(out[0]));
  CHECK(round == out[0]);
  CHECK(to_json(out[0])["label"].is_null());
}

TEST_CASE("audit samples are seeded, unique and order independent") {
  std::vector<AuditRow> pop;
  for (int i = 0; i < 40000; ++i) {
    pop.push_back({sha256_hex(std::to_string(i)), "pair-" + std::to_string(i % 50), "rubric", "resp"});
  }
  const auto a = audit_sample(pop, 200, 7);
  CHECK(a.size() == 200);
  std::set<std::string> keys;
  for (const auto& r : a) keys.insert(r.trial_key);
  CHECK(keys.size() == 200);

  auto shuffled = pop;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(audit_sample(shuffled, 200, 7) == a);
  CHECK(audit_sample(pop, 200, 8) != a);

  // Roughly uniform over the sorted population: each half gets a fair share.
  std::vector<std::string> sorted_keys;
  for (const auto& r : pop) sorted_keys.push_back(r.trial_key);
  std::sort(sorted_keys.begin(), sorted_keys.end());
  const auto& median = sorted_keys[20000];
  const auto low = std::count_if(a.begin(), a.end(), [&](const AuditRow& r) { return r.trial_key < median; });
  CHECK(low > 70);
  CHECK(low < 130);

  CHECK_THROWS_AS(audit_sample(pop, 40001, 7), Error);
  pop.push_back(pop.front());
  CHECK_THROWS_AS(audit_sample(pop, 10, 7), Error);
}

TEST_CASE("audit files hide judge labels and score agreement") {
  std::vector<AuditRow> rows;
  for (int i = 0; i < 200; ++i) rows.push_back({"k" + std::to_string(1000 + i), "pair-01", "rubric", "text"});
  const auto text = serialize_audit(rows, 7);
  CHECK(text.find("\"human_label\":null") != std::string::npos);
  CHECK(text.find("judge") == std::string::npos);

  testing::TempDir dir;
  std::istringstream in(text);
  std::string line, annotated;
  std::map<std::string, JudgeLabel> judge;
  std::getline(in, line);
  annotated += line + "\n";
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    j["human_label"] = "X";
    judge[j["trial_key"]] = JudgeLabel::X;
    annotated += j.dump() + "\n";
  }
  testing::write_text(dir / "audit.jsonl", annotated);
  const auto human = read_audit_labels(dir / "audit.jsonl");
  CHECK(human.size() == 200);
  CHECK(audit_consistency(human, judge) == 1.0);
  judge["k1000"] = JudgeLabel::N;
  CHECK(audit_consistency(human, judge) == doctest::Approx(0.995));
  judge.erase("k1000");
  CHECK_THROWS_AS(audit_consistency(human, judge), Error);
  CHECK_THROWS_AS(audit_consistency({}, {}), Error);

  testing::write_text(dir / "raw.jsonl", text);
  CHECK_THROWS_AS(read_audit_labels(dir / "raw.jsonl"), Error);
}
