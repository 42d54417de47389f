#include "framebench/scripted.hpp"

#include <algorithm>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/jsonl.hpp"

namespace framebench {

using nlohmann::json;

namespace {

constexpr std::pair<ScriptRule::Match, std::string_view> kMatchNames[] = {
    {ScriptRule::Match::Default, "default"},
    {ScriptRule::Match::Contains, "contains"},
    {ScriptRule::Match::ContainsAny, "contains_any"},
    {ScriptRule::Match::ContainsAll, "contains_all"},
    {ScriptRule::Match::Regex, "regex"},
};

constexpr std::pair<ScriptBlock, std::string_view> kBlockNames[] = {
    {ScriptBlock::Any, "any"},
    {ScriptBlock::First, "first"},
    {ScriptBlock::Last, "last"},
};

std::string_view first_block(std::string_view prompt) {
  return prompt.substr(0, prompt.find("\n\n"));
}

std::string_view last_block(std::string_view prompt) {
  const auto pos = prompt.rfind("\n\n");
  return pos == std::string_view::npos ? prompt : prompt.substr(pos + 2);
}

std::string expand(std::string_view tmpl, std::string_view prompt) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        if (name == "prompt") {
          out += prompt;
          i = close + 1;
          continue;
        }
        if (name == "first") {
          out += first_block(prompt);
          i = close + 1;
          continue;
        }
        if (name == "last") {
          out += last_block(prompt);
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace

ScriptedModel::ScriptedModel(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty() || rules_.back().match != ScriptRule::Match::Default) {
    throw Error(ErrorKind::Invalid, "script must end with a default rule");
  }
  patterns_.reserve(rules_.size());
  for (const auto& r : rules_) {
    if (r.match == ScriptRule::Match::Regex) {
      if (r.needles.size() != 1) throw Error(ErrorKind::Invalid, "regex rule needs exactly one pattern");
      try {
        patterns_.emplace_back(r.needles.front(), std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw Error(ErrorKind::Invalid, "bad regex \"" + r.needles.front() + "\": " + e.what());
      }
    } else {
      if (r.match != ScriptRule::Match::Default && r.needles.empty()) {
        throw Error(ErrorKind::Invalid, "match rule without needles");
      }
      patterns_.emplace_back();
    }
    if (!(r.probability >= 0.0 && r.probability <= 1.0)) {
      throw Error(ErrorKind::Invalid, "rule probability must lie in [0, 1]");
    }
  }
}

ScriptedModel ScriptedModel::from_json(const json& j) {
  std::vector<ScriptRule> rules;
  try {
    for (const auto& r : j.at("rules")) {
      ScriptRule rule;
      const std::string match = r.value("match", std::string("default"));
      auto m = std::find_if(std::begin(kMatchNames), std::end(kMatchNames),
                            [&](const auto& e) { return e.second == match; });
      if (m == std::end(kMatchNames)) throw Error(ErrorKind::Parse, "unknown match \"" + match + "\"");
      rule.match = m->first;
      if (auto it = r.find("needles"); it != r.end()) {
        if (it->is_string()) {
          rule.needles.push_back(it->get<std::string>());
        } else {
          rule.needles = it->get<std::vector<std::string>>();
        }
      }
      const std::string block = r.value("block", std::string("any"));
      auto b = std::find_if(std::begin(kBlockNames), std::end(kBlockNames),
                            [&](const auto& e) { return e.second == block; });
      if (b == std::end(kBlockNames)) throw Error(ErrorKind::Parse, "unknown block \"" + block + "\"");
      rule.block = b->first;
      rule.probability = r.value("probability", 1.0);
      rule.reply = r.at("reply").get<std::string>();
      rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("script: ") + e.what());
  }
  return ScriptedModel(std::move(rules));
}

ScriptedModel ScriptedModel::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(jsonl::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  if (j.value("schema", std::string()) != kScriptSchema) {
    throw Error(ErrorKind::Parse, path.string() + ": expected schema " + std::string(kScriptSchema));
  }
  return from_json(j);
}

json ScriptedModel::to_json() const {
  json rules = json::array();
  for (const auto& r : rules_) {
    json j = {{"reply", r.reply}};
    for (const auto& [m, name] : kMatchNames) {
      if (m == r.match) j["match"] = std::string(name);
    }
    for (const auto& [b, name] : kBlockNames) {
      if (b == r.block) j["block"] = std::string(name);
    }
    if (!r.needles.empty()) j["needles"] = r.needles;
    if (r.probability != 1.0) j["probability"] = r.probability;
    rules.push_back(std::move(j));
  }
  return {{"schema", std::string(kScriptSchema)}, {"rules", std::move(rules)}};
}

bool ScriptedModel::matches(std::size_t index, std::string_view prompt) const {
  const auto& rule = rules_[index];
  const std::string_view scope = rule.block == ScriptBlock::First  ? first_block(prompt)
                                 : rule.block == ScriptBlock::Last ? last_block(prompt)
                                                                   : prompt;
  const auto has = [&](const std::string& n) { return scope.find(n) != std::string_view::npos; };
  bool hit = false;
  switch (rule.match) {
    case ScriptRule::Match::Default:
      hit = true;
      break;
    case ScriptRule::Match::Contains:
      hit = has(rule.needles.front());
      break;
    case ScriptRule::Match::ContainsAny:
      hit = std::any_of(rule.needles.begin(), rule.needles.end(), has);
      break;
    case ScriptRule::Match::ContainsAll:
      hit = std::all_of(rule.needles.begin(), rule.needles.end(), has);
      break;
    case ScriptRule::Match::Regex:
      hit = std::regex_search(scope.begin(), scope.end(), patterns_[index]);
      break;
  }
  if (!hit || rule.probability >= 1.0) return hit;
  std::string seed(prompt);
  seed += '\x1f';
  seed += std::to_string(index);
  return unit_interval_hash(seed) < rule.probability;
}

std::string ScriptedModel::respond(std::string_view prompt) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (matches(i, prompt)) return expand(rules_[i].reply, prompt);
  }
  return expand(rules_.back().reply, prompt);
}

ChatReply ScriptedBackend::complete(const ChatRequest& request) {
  ChatReply reply;
  auto it = std::find_if(request.messages.rbegin(), request.messages.rend(),
                         [](const ChatMessage& m) { return m.role == "user"; });
  if (it == request.messages.rend()) {
    reply.status = TransportStatus::BadRequest;
    reply.detail = "no user message";
    return reply;
  }
  reply.text = model_.respond(it->content);
  reply.http_status = 200;
  if (reply.text.empty()) {
    reply.status = TransportStatus::ProviderError;
    reply.detail = "empty completion";
  }
  return reply;
}

}  // namespace framebench
