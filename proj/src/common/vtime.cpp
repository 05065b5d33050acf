// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/vtime.hpp"

#include <chrono>
#include <cstdio>

namespace simuhome {

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

}  // namespace

std::optional<VSeconds> parse_vtime(std::string_view s) {
  using namespace std::chrono;
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != ' ' || s[13] != ':' || s[16] != ':')
    return std::nullopt;
  int y, mo, d, h, mi, se;
  if (!read_digits(s, 0, 4, y) || !read_digits(s, 5, 2, mo) || !read_digits(s, 8, 2, d) ||
      !read_digits(s, 11, 2, h) || !read_digits(s, 14, 2, mi) || !read_digits(s, 17, 2, se))
    return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 59) return std::nullopt;
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<VSeconds>(days) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_vtime(VSeconds t) {
  using namespace std::chrono;
  auto days = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  const auto rem = static_cast<unsigned>(t - days * 86400);
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02u:%02u:%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                rem / 3600, rem % 3600 / 60, rem % 60);
  return buf;
}

std::string format_clock(VSeconds t) { return format_vtime(t).substr(11, 5); }

std::string format_clock_12h(VSeconds t) {
  auto rem = ((t % 86400) + 86400) % 86400;
  int h = static_cast<int>(rem / 3600);
  int m = static_cast<int>(rem % 3600 / 60);
  const char* suffix = h < 12 ? "AM" : "PM";
  int h12 = h % 12 == 0 ? 12 : h % 12;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%d:%02d %s", h12, m, suffix);
  return buf;
}

}  // namespace simuhome
