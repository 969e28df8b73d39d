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
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "echoscope/error.hpp"

namespace echoscope::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and `""` escapes.
inline std::vector<std::string> split(std::string_view line, std::size_t line_no = 0) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  out.push_back(std::move(field));
  return out;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

inline double to_double(std::string_view s, std::string_view what, std::size_t line_no) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(s) + "' for " + std::string(what), line_no);
  }
  return v;
}

inline unsigned long long to_uint(std::string_view s, std::string_view what, std::size_t line_no) {
  unsigned long long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("invalid count '" + std::string(s) + "' for " + std::string(what), line_no);
  }
  return v;
}

inline bool to_bool(std::string_view s, std::string_view what, std::size_t line_no) {
  if (s == "true" || s == "TRUE" || s == "True" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "FALSE" || s == "False" || s == "0" || s == "no") return false;
  throw ParseError("invalid boolean '" + std::string(s) + "' for " + std::string(what), line_no);
}

/// Shortest round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Fixed-point decimal with `digits` places.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace echoscope::csv
