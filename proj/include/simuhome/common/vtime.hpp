// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace simuhome {

// Virtual timestamps are whole seconds since the Unix epoch (UTC, no zones).
using VSeconds = std::int64_t;

// Parses exactly "YYYY-MM-DD HH:MM:SS"; nullopt on any deviation.
std::optional<VSeconds> parse_vtime(std::string_view text);

std::string format_vtime(VSeconds t);

// "HH:MM" for prose.
std::string format_clock(VSeconds t);

// "12:36 PM" style for prose.
std::string format_clock_12h(VSeconds t);

}  // namespace simuhome
