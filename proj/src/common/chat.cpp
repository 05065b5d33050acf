// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/chat.hpp"

#include <cstdlib>

#include <httplib.h>

#include "simuhome/common/error.hpp"

namespace simuhome {

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "url needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorCode::ConfigError, "unsupported scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts p;
  p.origin = url.substr(0, path_start);
  p.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
  if (p.origin.size() <= scheme_end + 3) throw Error(ErrorCode::ConfigError, "url has no host: " + url);
  return p;
}

void check_chat_config(const ChatConfig& cfg) {
  if (cfg.base_url.empty()) throw Error(ErrorCode::ConfigError, "no provider url configured");
  split_url(cfg.base_url);
  if (cfg.model.empty()) throw Error(ErrorCode::ConfigError, "no model configured");
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw Error(ErrorCode::ConfigError, "credential variable " + cfg.api_key_env + " is not set");
  }
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const std::string& bearer,
                         int timeout_seconds) {
  const auto parts = split_url(url);
  httplib::Client cli(parts.origin);
  cli.set_connection_timeout(timeout_seconds);
  cli.set_read_timeout(timeout_seconds);
  cli.set_write_timeout(timeout_seconds);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = cli.Post(parts.path.empty() ? "/" : parts.path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::ProviderFailure, "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorCode::ProviderFailure, "HTTP " + std::to_string(res->status) + " from " + url + ": " +
                                                res->body.substr(0, 300));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ProviderFailure, "non-JSON response from " + url);
  }
}

std::string chat_complete(const ChatConfig& cfg, const nlohmann::json& messages) {
  check_chat_config(cfg);
  std::string key;
  if (!cfg.api_key_env.empty()) key = std::getenv(cfg.api_key_env.c_str());
  nlohmann::json body{{"model", cfg.model},
                      {"messages", messages},
                      {"temperature", cfg.temperature},
                      {"max_tokens", cfg.max_tokens}};
  const auto url = split_url(cfg.base_url);
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    try {
      auto res = post_json(url.origin + url.path + "/chat/completions", body, key, cfg.timeout_seconds);
      const auto& content = res.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw Error(ErrorCode::ProviderFailure, "empty completion");
      return content.get<std::string>();
    } catch (const Error& e) {
      last_error = e.what();
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed completion: ") + e.what();
    }
  }
  throw Error(ErrorCode::ProviderFailure, last_error);
}

}  // namespace simuhome
