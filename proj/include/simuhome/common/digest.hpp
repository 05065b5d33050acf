// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace simuhome {

std::string sha256_hex(std::string_view data);

// nlohmann::json keeps object keys sorted, so dump() is already canonical.
inline std::string canonical(const nlohmann::json& j) { return j.dump(); }

inline std::string json_digest(const nlohmann::json& j) { return sha256_hex(canonical(j)); }

}  // namespace simuhome
