// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace simuhome {

// OpenAI-compatible chat-completions endpoint.
struct ChatConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model;
  std::string api_key_env;  // name of the variable holding the key; empty for none
  double temperature = 0.0;
  int max_tokens = 1024;
  int timeout_seconds = 120;
  int retries = 2;
};

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

UrlParts split_url(const std::string& url);  // throws ConfigError

// Checks the credential up front; throws ConfigError.
void check_chat_config(const ChatConfig& cfg);

// Returns the first choice's message content. Throws ProviderFailure.
std::string chat_complete(const ChatConfig& cfg, const nlohmann::json& messages);

// POST of a JSON body; returns the parsed response body. Throws ProviderFailure.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const std::string& bearer = "",
                         int timeout_seconds = 60);

}  // namespace simuhome
