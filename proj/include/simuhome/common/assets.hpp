// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace simuhome {

// Built-in data files compiled into the library, keyed by path under data/.
std::string_view asset(std::string_view name);

std::vector<std::string> asset_names();

}  // namespace simuhome
