#include "framebench/judge.hpp"

#include <algorithm>
#include <cctype>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"

namespace framebench {

using nlohmann::json;

char to_char(JudgeLabel l) noexcept {
  switch (l) {
    case JudgeLabel::X: return 'X';
    case JudgeLabel::Y: return 'Y';
    case JudgeLabel::B: return 'B';
    case JudgeLabel::N: return 'N';
  }
  return '?';
}

std::optional<JudgeLabel> label_from_char(char c) noexcept {
  switch (c) {
    case 'X': return JudgeLabel::X;
    case 'Y': return JudgeLabel::Y;
    case 'B': return JudgeLabel::B;
    case 'N': return JudgeLabel::N;
    default: return std::nullopt;
  }
}

namespace {

constexpr std::pair<Outcome, std::string_view> kOutcomeNames[] = {
    {Outcome::FramedCompliance, "framed"},
    {Outcome::PriorCompliance, "prior"},
    {Outcome::Both, "both"},
    {Outcome::Neither, "neither"},
};

constexpr std::pair<JudgmentStatus, std::string_view> kStatusNames[] = {
    {JudgmentStatus::Judged, "judged"},
    {JudgmentStatus::Unparseable, "unparseable"},
    {JudgmentStatus::TransportFailed, "transport-failed"},
};

bool joins_token(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x80) return false;  // curly quotes and other non-ASCII punctuation
  return std::isalnum(u) || c == '_' || c == '-' || c == '/';
}

bool word_char(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

// An apostrophe quotes a token unless it continues a word, as in "Y's" or "I'd".
bool joined_by_apostrophe(std::string_view s, std::size_t quote, bool after) noexcept {
  if (s[quote] != '\'') return false;
  if (after) return quote + 1 < s.size() && word_char(s[quote + 1]);
  return quote > 0 && word_char(s[quote - 1]);
}

}  // namespace

std::string_view to_string(Outcome o) noexcept {
  for (const auto& [v, name] : kOutcomeNames) {
    if (v == o) return name;
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) noexcept {
  for (const auto& [v, name] : kOutcomeNames) {
    if (name == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(JudgmentStatus s) noexcept {
  for (const auto& [v, name] : kStatusNames) {
    if (v == s) return name;
  }
  return "?";
}

Outcome map_outcome(JudgeLabel label, Order order) noexcept {
  switch (label) {
    case JudgeLabel::B: return Outcome::Both;
    case JudgeLabel::N: return Outcome::Neither;
    case JudgeLabel::X:
      return order == Order::AFirst ? Outcome::PriorCompliance : Outcome::FramedCompliance;
    case JudgeLabel::Y:
      return order == Order::AFirst ? Outcome::FramedCompliance : Outcome::PriorCompliance;
  }
  return Outcome::Neither;
}

std::optional<JudgeLabel> parse_label(std::string_view reply) noexcept {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    auto label = label_from_char(reply[i]);
    if (!label) continue;
    if (i > 0 && (joins_token(reply[i - 1]) || joined_by_apostrophe(reply, i - 1, false))) continue;
    if (i + 1 < reply.size() && (joins_token(reply[i + 1]) || joined_by_apostrophe(reply, i + 1, true))) continue;
    return label;
  }
  return std::nullopt;
}

std::string judge_prompt(std::string_view rubric, std::string_view response_text, bool reminder) {
  std::string out;
  out.reserve(rubric.size() + response_text.size() + kJudgeDelimiter.size() + 64);
  out += rubric;
  out += "\n\n";
  out += kJudgeDelimiter;
  out += '\n';
  out += response_text;
  if (reminder) {
    out += "\n\n";
    out += kJudgeReminder;
  }
  return out;
}

std::string judge_key(std::string_view judge_model_id, std::string_view prompt) {
  std::string material = "framebench-judge/1";
  material += '\x1f';
  material += judge_model_id;
  material += '\x1f';
  material += prompt;
  return sha256_hex(material);
}

json to_json(const Judgment& j) {
  json out = {{"trial_key", j.trial_key},
              {"status", std::string(to_string(j.status))},
              {"judge_model_id", j.judge_model_id},
              {"judge_raw_text", j.judge_raw_text},
              {"judge_calls", j.judge_calls},
              {"label", j.label ? json(std::string(1, to_char(*j.label))) : json(nullptr)},
              {"outcome", j.outcome ? json(std::string(to_string(*j.outcome))) : json(nullptr)}};
  if (!j.error_detail.empty()) out["error_detail"] = j.error_detail;
  return out;
}

Judgment judgment_from_json(const json& j) {
  Judgment out;
  try {
    out.trial_key = j.at("trial_key").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    auto it = std::find_if(std::begin(kStatusNames), std::end(kStatusNames),
                           [&](const auto& e) { return e.second == status; });
    if (it == std::end(kStatusNames)) throw Error(ErrorKind::Parse, "unknown judgment status \"" + status + "\"");
    out.status = it->first;
    out.judge_model_id = j.at("judge_model_id").get<std::string>();
    out.judge_raw_text = j.value("judge_raw_text", std::string());
    out.judge_calls = j.value("judge_calls", 0);
    out.error_detail = j.value("error_detail", std::string());
    if (const auto& l = j.at("label"); !l.is_null()) {
      const auto s = l.get<std::string>();
      auto label = s.size() == 1 ? label_from_char(s[0]) : std::nullopt;
      if (!label) throw Error(ErrorKind::Parse, "bad label \"" + s + "\"");
      out.label = label;
    }
    if (const auto& o = j.at("outcome"); !o.is_null()) {
      auto outcome = parse_outcome(o.get<std::string>());
      if (!outcome) throw Error(ErrorKind::Parse, "bad outcome \"" + o.get<std::string>() + "\"");
      out.outcome = outcome;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("judgment record: ") + e.what());
  }
  if (out.judged() != (out.label && out.outcome)) {
    throw Error(ErrorKind::Parse, "judgment " + out.trial_key + ": label presence disagrees with status");
  }
  return out;
}

namespace {

ModelEndpoint deterministic(const ModelEndpoint& judge) {
  ModelEndpoint e = judge;
  e.decoding.temperature = 0.0;
  return e;
}

void absorb(Judgment& j, const RawResponse& r) {
  ++j.judge_calls;
  if (!r.ok()) {
    j.status = JudgmentStatus::TransportFailed;
    j.error_detail = std::string(to_string(r.status)) + ": " + r.error_detail;
    return;
  }
  j.judge_raw_text = r.response_text;
  j.label = parse_label(r.response_text);
  if (j.label) {
    j.status = JudgmentStatus::Judged;
    j.error_detail.clear();
  } else {
    j.status = JudgmentStatus::Unparseable;
    j.error_detail = "no label token in judge reply";
  }
}

}  // namespace

Judgment classify(std::string_view response_text, const DirectivePair& pair, const ModelEndpoint& judge,
                  ChatBackend& backend, const RunContext& ctx) {
  if (response_text.empty()) throw Error(ErrorKind::Invalid, "cannot judge an empty response");
  const auto endpoint = deterministic(judge);
  Judgment out;
  out.judge_model_id = judge.model_id;
  for (bool reminder : {false, true}) {
    const auto prompt = judge_prompt(pair.judge_rubric, response_text, reminder);
    absorb(out, execute_request({judge_key(judge.model_id, prompt), prompt}, endpoint, backend, ctx));
    if (out.status != JudgmentStatus::Unparseable) break;
  }
  return out;
}

std::vector<Judgment> judge_batch(std::span<const JudgeItem> items, const ModelEndpoint& judge,
                                  ChatBackend& backend, const BatchOptions& options, JudgeStats* stats) {
  const auto endpoint = deterministic(judge);
  std::vector<Judgment> out(items.size());
  JudgeStats local;

  auto run_round = [&](const std::vector<std::size_t>& which, bool reminder) {
    std::vector<RequestJob> jobs;
    jobs.reserve(which.size());
    for (std::size_t i : which) {
      auto prompt = judge_prompt(items[i].pair->judge_rubric, items[i].response_text, reminder);
      jobs.push_back({judge_key(judge.model_id, prompt), std::move(prompt)});
    }
    BatchStats bs;
    const auto replies = execute_batch(jobs, endpoint, backend, options, &bs);
    local.calls.cache_hits += bs.cache_hits;
    local.calls.executed += bs.executed;
    local.calls.failures += bs.failures;
    for (std::size_t k = 0; k < which.size(); ++k) absorb(out[which[k]], replies[k]);
  };

  std::vector<std::size_t> all(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].pair == nullptr) throw Error(ErrorKind::Invalid, "judge item " + items[i].trial_key + " has no pair");
    if (items[i].response_text.empty()) {
      throw Error(ErrorKind::Invalid, "cannot judge an empty response (" + items[i].trial_key + ")");
    }
    out[i].trial_key = items[i].trial_key;
    out[i].judge_model_id = judge.model_id;
    all[i] = i;
  }
  run_round(all, false);

  std::vector<std::size_t> retry;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].status == JudgmentStatus::Unparseable) retry.push_back(i);
  }
  local.rejudged = retry.size();
  if (!retry.empty()) run_round(retry, true);

  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& j = out[i];
    if (j.judged()) {
      j.outcome = map_outcome(*j.label, items[i].order);
      ++local.judged;
    } else {
      j.label.reset();
      j.outcome.reset();
      if (j.status == JudgmentStatus::Unparseable) ++local.unparseable;
      else ++local.transport_failures;
    }
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace framebench
