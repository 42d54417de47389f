#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <thread>
#include <unordered_map>

#include "framebench/error.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

void default_sleep(std::chrono::duration<double> d) { std::this_thread::sleep_for(d); }

}  // namespace

RawResponse execute_request(const RequestJob& job, const ModelEndpoint& endpoint, ChatBackend& backend,
                            const RunContext& ctx) {
  RawResponse out;
  out.trial_key = job.key;
  out.model_id = endpoint.model_id;

  ChatRequest request;
  request.model = endpoint.model_id;
  request.messages = {{"user", job.prompt}};
  request.temperature = endpoint.decoding.temperature;
  request.max_tokens = endpoint.decoding.max_output_tokens;
  request.timeout_s = endpoint.request_timeout_s;
  if (!endpoint.api_key_env.empty()) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      out.status = TransportStatus::AuthError;
      out.error_detail = "environment variable " + endpoint.api_key_env + " is not set";
      out.fetched_at = utc_now();
      if (ctx.log) ctx.log->record(out, false);
      return out;
    }
    request.api_key = key;
  }

  const SleepFn& sleep = ctx.sleep ? ctx.sleep : SleepFn(default_sleep);
  for (int attempt = 0;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    ChatReply reply;
    try {
      reply = backend.complete(request);
    } catch (const std::exception& e) {
      reply.status = TransportStatus::NetworkError;
      reply.detail = e.what();
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    out.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    out.attempts = attempt + 1;
    out.status = reply.status;
    out.fetched_at = utc_now();
    if (reply.status == TransportStatus::Ok) {
      out.response_text = std::move(reply.text);
      out.usage = reply.usage;
      out.error_detail.clear();
      break;
    }
    out.response_text.clear();
    out.usage.reset();
    out.error_detail = reply.detail;
    if (!is_retryable(reply.status) || attempt >= endpoint.max_retries) break;
    sleep(std::chrono::duration<double>(endpoint.backoff_base_s * std::ldexp(1.0, attempt)));
  }
  if (ctx.log) ctx.log->record(out, false);
  return out;
}

RawResponse run_trial(const TrialSpec& spec, const PromptText& prompt, const ModelEndpoint& endpoint,
                      ChatBackend& backend, const RunContext& ctx) {
  if (spec.model_id != endpoint.model_id) {
    throw Error(ErrorKind::Invalid, "trial targets \"" + spec.model_id + "\" but endpoint is \"" +
                                        endpoint.model_id + "\"");
  }
  return execute_request({trial_key(spec, prompt), prompt.text}, endpoint, backend, ctx);
}

RateLimiter::RateLimiter(double per_second, SleepFn sleep)
    : rate_(per_second),
      tokens_(per_second > 0 ? std::max(1.0, per_second) : 0.0),
      last_(std::chrono::steady_clock::now()),
      sleep_(sleep ? std::move(sleep) : SleepFn(default_sleep)) {
  if (per_second < 0 || !std::isfinite(per_second)) {
    throw Error(ErrorKind::Invalid, "rate limit must be a finite non-negative number");
  }
}

void RateLimiter::acquire() {
  if (rate_ <= 0) return;
  std::chrono::duration<double> wait{0};
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    const double burst = std::max(1.0, rate_);
    tokens_ = std::min(burst, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    tokens_ -= 1.0;
    // A negative balance is a debt the caller pays by waiting.
    if (tokens_ < 0) wait = std::chrono::duration<double>(-tokens_ / rate_);
  }
  if (wait.count() > 0) sleep_(wait);
}

std::vector<RawResponse> execute_batch(std::span<const RequestJob> jobs, const ModelEndpoint& endpoint,
                                       ChatBackend& backend, const BatchOptions& options,
                                       BatchStats* stats) {
  if (options.parallelism < 1) throw Error(ErrorKind::Invalid, "parallelism must be at least 1");
  std::vector<RawResponse> results(jobs.size());
  BatchStats local;

  // Identical keys run once; later duplicates copy the first result.
  std::unordered_map<std::string, std::size_t> first_of;
  std::vector<std::size_t> pending;
  std::vector<std::pair<std::size_t, std::size_t>> duplicates;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto [it, fresh] = first_of.emplace(jobs[i].key, i);
    if (!fresh) {
      duplicates.emplace_back(i, it->second);
      continue;
    }
    if (options.cache) {
      if (auto hit = options.cache->lookup(jobs[i].key)) {
        results[i] = std::move(*hit);
        ++local.cache_hits;
        if (options.context.log) options.context.log->record(results[i], true);
        continue;
      }
    }
    pending.push_back(i);
  }

  RateLimiter limiter(options.rate_limit, options.context.sleep);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t i = pending[slot];
      try {
        limiter.acquire();
        results[i] = execute_request(jobs[i], endpoint, backend, options.context);
        if (results[i].ok() && options.cache) options.cache->store(results[i]);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), pending.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  for (auto [dup, src] : duplicates) results[dup] = results[src];
  for (std::size_t i : pending) {
    ++local.executed;
    if (!results[i].ok()) ++local.failures;
  }
  if (stats) *stats = local;
  return results;
}

std::vector<RawResponse> run_batch(std::span<const TrialSpec> specs, const Corpus& corpus,
                                   const ModelEndpoint& endpoint, ChatBackend& backend,
                                   const BatchOptions& options, BatchStats* stats) {
  std::vector<RequestJob> jobs;
  jobs.reserve(specs.size());
  for (const auto& spec : specs) {
    if (spec.model_id != endpoint.model_id) {
      throw Error(ErrorKind::Invalid, "trial targets \"" + spec.model_id + "\" but endpoint is \"" +
                                          endpoint.model_id + "\"");
    }
    auto prompt = compose_prompt(spec, corpus);
    jobs.push_back({trial_key(spec, prompt), std::move(prompt.text)});
  }
  return execute_batch(jobs, endpoint, backend, options, stats);
}

}  // namespace framebench
