#pragma once

// Offline stand-in for a chat model: an ordered rule list mapping prompt text
// to canned replies. Used for tests and dry runs of the pipeline.

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "framebench/runtime.hpp"

namespace framebench {

inline constexpr std::string_view kScriptSchema = "framebench-script/1";

/// Which part of the prompt a rule inspects. Blocks are the pieces between
/// blank lines ("\n\n").
enum class ScriptBlock { Any, First, Last };

struct ScriptRule {
  enum class Match { Default, Contains, ContainsAny, ContainsAll, Regex };

  Match match = Match::Default;
  std::vector<std::string> needles;  // strings, or a single pattern for Regex
  ScriptBlock block = ScriptBlock::Any;
  /// The rule fires only when a deterministic hash of (prompt, rule index)
  /// falls below this value. 1 means always.
  double probability = 1.0;
  /// Reply template; {prompt}, {first} and {last} expand to the whole prompt
  /// and its first/last block.
  std::string reply;
};

class ScriptedModel {
 public:
  /// Throws Error(Invalid) unless the last rule is a Default rule.
  explicit ScriptedModel(std::vector<ScriptRule> rules);

  static ScriptedModel from_json(const nlohmann::json& j);
  static ScriptedModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// First matching rule wins.
  std::string respond(std::string_view prompt) const;

  const std::vector<ScriptRule>& rules() const noexcept { return rules_; }

 private:
  bool matches(std::size_t index, std::string_view prompt) const;

  std::vector<ScriptRule> rules_;
  std::vector<std::regex> patterns_;  // parallel to rules_
};

class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(ScriptedModel model) : model_(std::move(model)) {}
  /// Replies to the content of the last user message.
  ChatReply complete(const ChatRequest& request) override;

 private:
  ScriptedModel model_;
};

}  // namespace framebench
