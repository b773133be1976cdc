#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sjc {

using Date = std::chrono::year_month_day;

/// Strict ISO-8601 calendar date, YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
  auto bad = [&] { return std::invalid_argument("invalid ISO date '" + std::string(s) + "'"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    if (r.ec != std::errc{} || r.ptr != s.data() + pos + len) throw bad();
  };
  field(0, 4, y);
  field(5, 2, m);
  field(8, 2, d);
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw bad();
  return date;
}

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

/// Calendar-month offset; the day is clamped to the end of the target month.
inline Date add_months(const Date& d, int months) {
  const auto ym = std::chrono::year_month{d.year(), d.month()} + std::chrono::months{months};
  const auto last = std::chrono::year_month_day_last{ym.year(), std::chrono::month_day_last{ym.month()}};
  return Date{ym.year(), ym.month(), std::min(d.day(), last.day())};
}

inline Date add_days(const Date& d, int days) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

inline bool is_weekday(const Date& d) {
  const std::chrono::weekday w{std::chrono::sys_days{d}};
  return w != std::chrono::Saturday && w != std::chrono::Sunday;
}

/// Third Thursday of a month (monthly consensus release day).
inline Date third_thursday(std::chrono::year y, std::chrono::month m) {
  const std::chrono::year_month_weekday ymw{y, m, std::chrono::Thursday[3]};
  return Date{std::chrono::sys_days{ymw}};
}

}  // namespace sjc
