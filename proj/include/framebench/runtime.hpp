#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "framebench/composer.hpp"
#include "framebench/corpus.hpp"

namespace framebench {

inline constexpr std::string_view kEndpointsSchema = "framebench-endpoints/1";

enum class TransportStatus {
  Ok,
  Timeout,
  RateLimited,
  ServerError,
  NetworkError,
  AuthError,
  BadRequest,
  ProviderError,
};

std::string_view to_string(TransportStatus s) noexcept;
std::optional<TransportStatus> parse_transport_status(std::string_view s) noexcept;

/// Timeouts, 429, 5xx and connection failures are retried; everything else
/// is final on the first attempt.
bool is_retryable(TransportStatus s) noexcept;

enum class BackendKind { OpenAI, Scripted };

struct Decoding {
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

struct ModelEndpoint {
  std::string model_id;
  BackendKind kind = BackendKind::OpenAI;
  std::string base_url;     // e.g. "https://host/v1"; "/chat/completions" is appended
  std::string api_key_env;  // name of the environment variable; empty for none
  Decoding decoding;
  double request_timeout_s = 120.0;
  int max_retries = 3;  // retries after the first attempt
  double backoff_base_s = 1.0;
  std::filesystem::path script;  // Scripted backends only
};

/// Reads an endpoints file: header {"schema": "framebench-endpoints/1"} then
/// one record per endpoint. Relative script paths resolve against the file's
/// directory. Duplicate model ids are rejected.
std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path);
nlohmann::json to_json(const ModelEndpoint& endpoint);
ModelEndpoint endpoint_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Throws Error(Invalid) when the endpoint does not decode at temperature 0.
void require_replication_decoding(const ModelEndpoint& endpoint);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 2048;
  double timeout_s = 120.0;
  std::string api_key;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int total_tokens = 0;

  bool operator==(const TokenUsage&) const = default;
};

struct ChatReply {
  TransportStatus status = TransportStatus::Ok;
  int http_status = 0;
  std::string text;
  std::optional<TokenUsage> usage;
  std::string detail;  // error description when status != Ok
};

/// One chat-completions round trip. Implementations must be callable from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

/// OpenAI-compatible chat completions over HTTP(S).
class OpenAICompatibleBackend final : public ChatBackend {
 public:
  explicit OpenAICompatibleBackend(std::string base_url);
  ChatReply complete(const ChatRequest& request) override;

  /// Request body sent for `request` (exposed for inspection in tests).
  static nlohmann::json request_body(const ChatRequest& request);

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix + "/chat/completions"
};

/// Wraps a backend and counts calls, tracking the peak number in flight.
class InstrumentedBackend final : public ChatBackend {
 public:
  explicit InstrumentedBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}
  ChatReply complete(const ChatRequest& request) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  int max_in_flight() const noexcept { return max_in_flight_.load(); }
  std::vector<ChatRequest> captured() const;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  mutable std::mutex mu_;
  std::vector<ChatRequest> captured_;
};

/// Builds the backend an endpoint describes (HTTP or scripted).
std::shared_ptr<ChatBackend> make_backend(const ModelEndpoint& endpoint);

struct RawResponse {
  std::string trial_key;
  std::string response_text;
  std::string model_id;
  double latency_ms = 0.0;
  std::optional<TokenUsage> usage;
  std::string fetched_at;  // UTC, ISO 8601
  TransportStatus status = TransportStatus::Ok;
  std::string error_detail;
  int attempts = 0;

  bool ok() const noexcept { return status == TransportStatus::Ok; }
  bool operator==(const RawResponse&) const = default;
};

nlohmann::json to_json(const RawResponse& r);
RawResponse raw_response_from_json(const nlohmann::json& j);

/// One structured line per request: key, status, latency, retries.
class RunLog {
 public:
  explicit RunLog(std::ostream* out = nullptr) : out_(out) {}
  void record(const RawResponse& r, bool cache_hit);
  void note(std::string_view event, const nlohmann::json& fields);
  std::vector<nlohmann::json> entries() const;

 private:
  std::ostream* out_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> entries_;
};

using SleepFn = std::function<void(std::chrono::duration<double>)>;

struct RunContext {
  SleepFn sleep;          // defaults to std::this_thread::sleep_for
  RunLog* log = nullptr;
};

/// A single request to execute: the cache key and the user message text.
struct RequestJob {
  std::string key;
  std::string prompt;
};

/// Sends `job.prompt` as the only (user) message to the endpoint, retrying
/// transient failures with exponential backoff. Never throws for transport
/// problems; they are recorded in the returned status.
RawResponse execute_request(const RequestJob& job, const ModelEndpoint& endpoint,
                            ChatBackend& backend, const RunContext& ctx = {});

RawResponse run_trial(const TrialSpec& spec, const PromptText& prompt,
                      const ModelEndpoint& endpoint, ChatBackend& backend,
                      const RunContext& ctx = {});

/// Content-addressed, append-only store of successful responses: one JSON
/// file per key under <dir>/<key[0:2]>/<key>.json. Safe for concurrent
/// writers of distinct keys.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  /// Returns the stored response, or nullopt on a miss. A corrupt entry is
  /// reported via corruption_reports() and treated as a miss.
  std::optional<RawResponse> lookup(std::string_view key) const;

  /// Stores `response` under its trial_key. Storing an equal value again is
  /// a no-op; a different value throws Error(Conflict). Corrupt entries are
  /// moved aside and replaced.
  void store(const RawResponse& response);

  bool contains(std::string_view key) const;
  std::vector<std::string> corruption_reports() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path entry_path(std::string_view key) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::vector<std::string> corrupt_;
};

/// Token bucket; a rate of 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second, SleepFn sleep = {});
  void acquire();

 private:
  double rate_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  SleepFn sleep_;
  std::mutex mu_;
};

struct BatchOptions {
  int parallelism = 1;
  double rate_limit = 0.0;  // requests per second, 0 = unlimited
  ResponseCache* cache = nullptr;
  RunContext context;
};

struct BatchStats {
  std::size_t cache_hits = 0;
  std::size_t executed = 0;
  std::size_t failures = 0;
};

/// Cache-first execution of `jobs` with at most `parallelism` requests in
/// flight. Results are aligned with `jobs`. Successes are stored before
/// return; a failing job never aborts the batch.
std::vector<RawResponse> execute_batch(std::span<const RequestJob> jobs,
                                       const ModelEndpoint& endpoint, ChatBackend& backend,
                                       const BatchOptions& options, BatchStats* stats = nullptr);

/// Composes the prompt of every spec, keys it, and runs execute_batch. Every
/// spec must target endpoint.model_id.
std::vector<RawResponse> run_batch(std::span<const TrialSpec> specs, const Corpus& corpus,
                                   const ModelEndpoint& endpoint, ChatBackend& backend,
                                   const BatchOptions& options, BatchStats* stats = nullptr);

}  // namespace framebench
