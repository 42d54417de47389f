#include <algorithm>
#include <set>

#include "framebench/error.hpp"
#include "framebench/jsonl.hpp"
#include "framebench/runtime.hpp"
#include "framebench/scripted.hpp"

namespace framebench {

using nlohmann::json;

namespace {

constexpr std::pair<TransportStatus, std::string_view> kStatusNames[] = {
    {TransportStatus::Ok, "ok"},
    {TransportStatus::Timeout, "timeout"},
    {TransportStatus::RateLimited, "rate-limited"},
    {TransportStatus::ServerError, "server-error"},
    {TransportStatus::NetworkError, "network-error"},
    {TransportStatus::AuthError, "auth-error"},
    {TransportStatus::BadRequest, "bad-request"},
    {TransportStatus::ProviderError, "provider-error"},
};

}  // namespace

std::string_view to_string(TransportStatus s) noexcept {
  for (const auto& [status, name] : kStatusNames) {
    if (status == s) return name;
  }
  return "?";
}

std::optional<TransportStatus> parse_transport_status(std::string_view s) noexcept {
  for (const auto& [status, name] : kStatusNames) {
    if (name == s) return status;
  }
  return std::nullopt;
}

bool is_retryable(TransportStatus s) noexcept {
  switch (s) {
    case TransportStatus::Timeout:
    case TransportStatus::RateLimited:
    case TransportStatus::ServerError:
    case TransportStatus::NetworkError:
      return true;
    default:
      return false;
  }
}

json to_json(const ModelEndpoint& e) {
  json j = {{"model_id", e.model_id},
            {"kind", e.kind == BackendKind::Scripted ? "scripted" : "openai"},
            {"base_url", e.base_url},
            {"api_key_env", e.api_key_env},
            {"temperature", e.decoding.temperature},
            {"max_output_tokens", e.decoding.max_output_tokens},
            {"request_timeout_s", e.request_timeout_s},
            {"max_retries", e.max_retries},
            {"backoff_base_s", e.backoff_base_s}};
  if (!e.script.empty()) j["script"] = e.script.string();
  return j;
}

ModelEndpoint endpoint_from_json(const json& j, const std::filesystem::path& base_dir) {
  ModelEndpoint e;
  try {
    e.model_id = j.at("model_id").get<std::string>();
    const std::string kind = j.value("kind", std::string("openai"));
    if (kind == "openai") {
      e.kind = BackendKind::OpenAI;
    } else if (kind == "scripted") {
      e.kind = BackendKind::Scripted;
    } else {
      throw Error(ErrorKind::Parse, "endpoint \"" + e.model_id + "\": unknown kind \"" + kind + "\"");
    }
    e.base_url = j.value("base_url", std::string());
    e.api_key_env = j.value("api_key_env", std::string());
    e.decoding.temperature = j.value("temperature", 0.0);
    e.decoding.max_output_tokens = j.value("max_output_tokens", 2048);
    e.request_timeout_s = j.value("request_timeout_s", 120.0);
    e.max_retries = j.value("max_retries", 3);
    e.backoff_base_s = j.value("backoff_base_s", 1.0);
    if (auto it = j.find("script"); it != j.end()) {
      std::filesystem::path p = it->get<std::string>();
      e.script = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Parse, std::string("endpoint record: ") + ex.what());
  }
  if (e.model_id.empty()) throw Error(ErrorKind::Parse, "endpoint record: empty model_id");
  if (e.kind == BackendKind::OpenAI && e.base_url.empty()) {
    throw Error(ErrorKind::Parse, "endpoint \"" + e.model_id + "\": missing base_url");
  }
  if (e.kind == BackendKind::Scripted && e.script.empty()) {
    throw Error(ErrorKind::Parse, "endpoint \"" + e.model_id + "\": scripted endpoint needs a script");
  }
  if (e.max_retries < 0 || e.decoding.max_output_tokens < 1 || e.request_timeout_s <= 0) {
    throw Error(ErrorKind::Parse, "endpoint \"" + e.model_id + "\": invalid limits");
  }
  return e;
}

std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path) {
  const auto doc = jsonl::read(path, kEndpointsSchema);
  std::vector<ModelEndpoint> out;
  std::set<std::string> seen;
  for (const auto& rec : doc.records) {
    ModelEndpoint e;
    try {
      e = endpoint_from_json(rec.value, path.parent_path());
    } catch (const Error& err) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) + ": " + err.what());
    }
    if (!seen.insert(e.model_id).second) {
      throw Error(ErrorKind::Parse, path.filename().string() + ":" + std::to_string(rec.line) +
                                        ": duplicate model_id \"" + e.model_id + "\"");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void require_replication_decoding(const ModelEndpoint& endpoint) {
  if (endpoint.decoding.temperature != 0.0) {
    throw Error(ErrorKind::Invalid, "endpoint \"" + endpoint.model_id +
                                        "\" must decode at temperature 0 for replication runs");
  }
}

std::shared_ptr<ChatBackend> make_backend(const ModelEndpoint& endpoint) {
  if (endpoint.kind == BackendKind::Scripted) {
    return std::make_shared<ScriptedBackend>(ScriptedModel::load(endpoint.script));
  }
  return std::make_shared<OpenAICompatibleBackend>(endpoint.base_url);
}

ChatReply InstrumentedBackend::complete(const ChatRequest& request) {
  ++calls_;
  const int now = ++in_flight_;
  int peak = max_in_flight_.load();
  while (now > peak && !max_in_flight_.compare_exchange_weak(peak, now)) {
  }
  {
    std::lock_guard lock(mu_);
    captured_.push_back(request);
  }
  ChatReply reply = inner_->complete(request);
  --in_flight_;
  return reply;
}

std::vector<ChatRequest> InstrumentedBackend::captured() const {
  std::lock_guard lock(mu_);
  return captured_;
}

json to_json(const RawResponse& r) {
  json j = {{"trial_key", r.trial_key},
            {"response_text", r.response_text},
            {"model_id", r.model_id},
            {"latency_ms", r.latency_ms},
            {"fetched_at", r.fetched_at},
            {"transport_status", std::string(to_string(r.status))},
            {"attempts", r.attempts}};
  if (!r.error_detail.empty()) j["error_detail"] = r.error_detail;
  if (r.usage) {
    j["token_usage"] = {{"prompt_tokens", r.usage->prompt_tokens},
                        {"completion_tokens", r.usage->completion_tokens},
                        {"total_tokens", r.usage->total_tokens}};
  }
  return j;
}

RawResponse raw_response_from_json(const json& j) {
  RawResponse r;
  try {
    r.trial_key = j.at("trial_key").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<double>();
    r.fetched_at = j.at("fetched_at").get<std::string>();
    r.attempts = j.value("attempts", 1);
    r.error_detail = j.value("error_detail", std::string());
    auto status = parse_transport_status(j.at("transport_status").get<std::string>());
    if (!status) throw Error(ErrorKind::Parse, "unknown transport_status");
    r.status = *status;
    if (auto it = j.find("token_usage"); it != j.end()) {
      r.usage = TokenUsage{it->at("prompt_tokens").get<int>(), it->at("completion_tokens").get<int>(),
                           it->at("total_tokens").get<int>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("response record: ") + e.what());
  }
  if (r.status == TransportStatus::Ok && r.response_text.empty()) {
    throw Error(ErrorKind::Parse, "response record: ok status with empty text");
  }
  return r;
}

void RunLog::record(const RawResponse& r, bool cache_hit) {
  json entry = {{"key", r.trial_key},
                {"model_id", r.model_id},
                {"status", std::string(to_string(r.status))},
                {"latency_ms", r.latency_ms},
                {"retries", std::max(0, r.attempts - 1)},
                {"cache_hit", cache_hit}};
  if (!r.error_detail.empty()) entry["error"] = r.error_detail;
  std::lock_guard lock(mu_);
  if (out_) *out_ << jsonl::line(entry) << std::flush;
  entries_.push_back(std::move(entry));
}

void RunLog::note(std::string_view event, const json& fields) {
  json entry = fields;
  entry["event"] = std::string(event);
  std::lock_guard lock(mu_);
  if (out_) *out_ << jsonl::line(entry) << std::flush;
  entries_.push_back(std::move(entry));
}

std::vector<json> RunLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

}  // namespace framebench
