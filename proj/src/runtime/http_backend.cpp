#include <httplib.h>

#include <cmath>

#include "framebench/error.hpp"
#include "framebench/runtime.hpp"

namespace framebench {

using nlohmann::json;

OpenAICompatibleBackend::OpenAICompatibleBackend(std::string base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::Invalid, "base_url needs a scheme: \"" + base_url + "\"");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  origin_ = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

json OpenAICompatibleBackend::request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", request.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"stream", false}};
}

namespace {

TransportStatus classify_http(int code) {
  if (code == 429) return TransportStatus::RateLimited;
  if (code == 408) return TransportStatus::Timeout;
  if (code >= 500) return TransportStatus::ServerError;
  if (code == 401 || code == 403) return TransportStatus::AuthError;
  return TransportStatus::BadRequest;
}

std::string error_message(const json& body) {
  if (auto it = body.find("error"); it != body.end()) {
    if (it->is_object() && it->contains("message") && (*it)["message"].is_string()) {
      return (*it)["message"].get<std::string>();
    }
    return it->dump();
  }
  return {};
}

}  // namespace

ChatReply OpenAICompatibleBackend::complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(request.timeout_s);
  const auto usecs = static_cast<time_t>((request.timeout_s - std::floor(request.timeout_s)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers = {{"Accept", "application/json"}};
  if (!request.api_key.empty()) headers.emplace("Authorization", "Bearer " + request.api_key);

  ChatReply reply;
  auto res = client.Post(path_, headers, request_body(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    reply.status = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                       ? TransportStatus::Timeout
                       : TransportStatus::NetworkError;
    reply.detail = httplib::to_string(err);
    return reply;
  }
  reply.http_status = res->status;

  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error&) {
    body = json();
  }

  if (res->status != 200) {
    reply.status = classify_http(res->status);
    std::string msg = body.is_object() ? error_message(body) : std::string();
    reply.detail = "HTTP " + std::to_string(res->status) + (msg.empty() ? "" : ": " + msg);
    return reply;
  }
  if (!body.is_object()) {
    reply.status = TransportStatus::ProviderError;
    reply.detail = "response body is not JSON";
    return reply;
  }
  if (std::string msg = error_message(body); !msg.empty()) {
    reply.status = TransportStatus::ProviderError;
    reply.detail = msg;
    return reply;
  }
  try {
    const auto& content = body.at("choices").at(0).at("message").at("content");
    reply.text = content.is_string() ? content.get<std::string>() : std::string();
    if (auto u = body.find("usage"); u != body.end() && u->is_object()) {
      reply.usage = TokenUsage{u->value("prompt_tokens", 0), u->value("completion_tokens", 0),
                               u->value("total_tokens", 0)};
    }
  } catch (const json::exception& e) {
    reply.status = TransportStatus::ProviderError;
    reply.detail = std::string("unexpected response shape: ") + e.what();
    return reply;
  }
  if (reply.text.empty()) {
    reply.status = TransportStatus::ProviderError;
    reply.detail = "empty completion";
  }
  return reply;
}

}  // namespace framebench
