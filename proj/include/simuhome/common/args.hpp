// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace simuhome {

// Typed accessors for named-argument maps; failures throw BadArgs.
const nlohmann::json& arg_object(const nlohmann::json& args);
std::string arg_string(const nlohmann::json& args, const std::string& name);
std::int64_t arg_int(const nlohmann::json& args, const std::string& name);
const nlohmann::json& arg_any(const nlohmann::json& args, const std::string& name);

}  // namespace simuhome
