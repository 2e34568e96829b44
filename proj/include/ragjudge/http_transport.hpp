// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "ragjudge/backend.hpp"
#include "ragjudge/errors.hpp"

namespace ragjudge::backend {

struct HttpConfig {
  // Base URL of an OpenAI-compatible server, e.g. "http://127.0.0.1:8080/v1".
  std::string endpoint{"http://127.0.0.1:8080/v1"};
  std::string api_key;
  std::chrono::seconds timeout{600};
  // Forward request schemas as `response_format` json_schema constraints.
  bool native_schema{false};
};

struct ParsedUrl {
  std::string scheme_host_port;  // "http://host:port"
  std::string base_path;         // "/v1" (no trailing slash)
};

inline ParsedUrl parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported endpoint scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  out.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  if (out.scheme_host_port.size() <= scheme_end + 3) throw ConfigError("endpoint has no host: " + url);
  return out;
}

// Request body for POST {endpoint}/chat/completions.
inline json chat_completion_body(const GenerationRequest& r, bool native_schema) {
  json messages = json::array();
  if (r.system_text) messages.push_back({{"role", "system"}, {"content", *r.system_text}});
  messages.push_back({{"role", "user"}, {"content", r.user_text}});
  json body = {{"model", r.model_id},
               {"messages", messages},
               {"temperature", r.temperature},
               {"max_tokens", r.max_tokens}};
  if (r.seed) body["seed"] = *r.seed;
  if (native_schema && r.schema) {
    body["response_format"] = {{"type", "json_schema"},
                               {"json_schema", {{"name", "verdicts"}, {"strict", true}, {"schema", *r.schema}}}};
  }
  return body;
}

inline std::string completion_text(const std::string& response_body) {
  const auto doc = json::parse(response_body, nullptr, false);
  if (doc.is_discarded()) throw BackendError("response is not JSON", 200);
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected response shape: ") + e.what(), 200);
  }
}

class HttpChatTransport : public Transport {
 public:
  explicit HttpChatTransport(HttpConfig config) : config_(std::move(config)), url_(parse_endpoint(config_.endpoint)) {}

  std::string complete(const GenerationRequest& request) override {
    httplib::Client cli(url_.scheme_host_port);
    const auto secs = static_cast<time_t>(config_.timeout.count());
    cli.set_connection_timeout(std::min<time_t>(secs, 30), 0);
    cli.set_read_timeout(secs, 0);
    cli.set_write_timeout(secs, 0);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto body = chat_completion_body(request, config_.native_schema).dump();
    auto res = cli.Post(url_.base_path + "/chat/completions", headers, body, "application/json");
    if (!res) throw NetworkError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw BackendError("backend returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300),
                         res->status);
    }
    return completion_text(res->body);
  }

  std::string describe() const override { return "openai-chat(" + config_.endpoint + ")"; }

 private:
  HttpConfig config_;
  ParsedUrl url_;
};

}  // namespace ragjudge::backend
