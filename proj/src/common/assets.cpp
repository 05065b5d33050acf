// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/assets.hpp"

#include <map>

#include "simuhome/common/error.hpp"

namespace simuhome {
namespace assets_detail {
const std::map<std::string, std::string_view>& table();
}

std::string_view asset(std::string_view name) {
  const auto& t = assets_detail::table();
  auto it = t.find(std::string(name));
  if (it == t.end()) throw Error(ErrorCode::ConfigError, "no built-in asset " + std::string(name));
  return it->second;
}

std::vector<std::string> asset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : assets_detail::table()) out.push_back(k);
  return out;
}

}  // namespace simuhome
