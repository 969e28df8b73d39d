// Copyright 2026 The Echoscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "echoscope/error.hpp"

namespace echoscope {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
using Date = std::chrono::sys_days;

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return r.ec == std::errc{};
}

inline bool parse_date_prefix(std::string_view s, Date& out) {
  int y = 0, m = 0, d = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, m) || !read_int(s, 8, 2, d)) return false;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out = Date{ymd};
  return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DD`.
inline Date parse_date(std::string_view s) {
  Date d;
  if (s.size() != 10 || !detail::parse_date_prefix(s, d)) {
    throw ParseError("invalid date '" + std::string(s) + "', expected YYYY-MM-DD");
  }
  return d;
}

/// Parses an ISO-8601 instant: `YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|(+|-)HH[:]MM]`.
/// A bare date is midnight UTC; a missing zone designator means UTC.
inline Instant parse_instant(std::string_view s) {
  auto fail = [&]() -> ParseError {
    return ParseError("invalid timestamp '" + std::string(s) + "'");
  };
  Date day;
  if (!detail::parse_date_prefix(s, day)) throw fail();
  using namespace std::chrono;
  milliseconds tod{0};
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == 't' || s[pos] == ' ')) {
    int hh = 0, mm = 0, ss = 0;
    if (!detail::read_int(s, pos + 1, 2, hh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !detail::read_int(s, pos + 4, 2, mm)) {
      throw fail();
    }
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!detail::read_int(s, pos + 1, 2, ss)) throw fail();
      pos += 3;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        int ms = 0, digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (digits < 3) ms = ms * 10 + (s[pos] - '0');
          ++digits;
          ++pos;
        }
        if (digits == 0) throw fail();
        for (int i = digits; i < 3; ++i) ms *= 10;
        tod += milliseconds{ms};
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) throw fail();
    tod += hours{hh} + minutes{mm} + seconds{ss};
  }
  minutes offset{0};
  if (pos < s.size()) {
    if ((s[pos] == 'Z' || s[pos] == 'z') && pos + 1 == s.size()) {
      pos += 1;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '-' ? -1 : 1;
      int oh = 0, om = 0;
      if (!detail::read_int(s, pos + 1, 2, oh)) throw fail();
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!detail::read_int(s, mpos, 2, om) || mpos + 2 != s.size()) throw fail();
      offset = minutes{sign * (oh * 60 + om)};
      pos = s.size();
    } else {
      throw fail();
    }
  }
  return Instant{day} + tod - offset;
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`, with `.mmm` only when milliseconds are non-zero.
inline std::string format_instant(Instant t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  auto rest = t - day;
  auto h = duration_cast<hours>(rest);
  rest -= h;
  auto m = duration_cast<minutes>(rest);
  rest -= m;
  auto s = duration_cast<seconds>(rest);
  rest -= s;
  char buf[48];
  if (rest.count() != 0) {
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ", format_date(day).c_str(),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(s.count()), static_cast<int>(rest.count()));
  } else {
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(s.count()));
  }
  return buf;
}

}  // namespace echoscope
