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

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "echoscope/error.hpp"
#include "echoscope/time.hpp"

namespace echoscope {

inline constexpr std::size_t kMaxHandleLength = 15;

/// One authored message. Handles are lowercase and carry no leading "@".
struct InteractionRecord {
  std::string id;
  Instant timestamp{};
  std::string author;
  std::string text;
  std::vector<std::string> mentions;
  bool is_retweet = false;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

enum class InteractionKind { mention, retweet };

enum class WindowSplit { all, pre, post };

struct CollectionWindow {
  Instant start{};
  Instant end{};
  std::optional<Date> election_date;
};

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_valid_handle(std::string_view h) {
  return !h.empty() && h.size() <= kMaxHandleLength && std::all_of(h.begin(), h.end(), is_word_char);
}

/// Strips one leading "@" and lowercases. Does not validate.
inline std::string normalize_handle(std::string_view h) {
  if (!h.empty() && h.front() == '@') h.remove_prefix(1);
  std::string out(h);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

/// Mentions in `text` in first-occurrence order, lowercased, without duplicates or `author`.
///
/// A mention is "@" followed by a run of 1-15 word characters that is not
/// itself preceded by a word character (so e-mail addresses do not match).
/// Runs longer than 15 characters are not handles and are skipped whole.
inline std::vector<std::string> extract_mentions(std::string_view text, std::string_view author) {
  std::vector<std::string> out;
  const std::string self = normalize_handle(author);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '@' || (i > 0 && is_word_char(text[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && is_word_char(text[j])) ++j;
    std::size_t len = j - i - 1;
    if (len >= 1 && len <= kMaxHandleLength) {
      std::string h = normalize_handle(text.substr(i + 1, len));
      if (h != self && std::find(out.begin(), out.end(), h) == out.end()) out.push_back(std::move(h));
    }
    i = std::max(j, i + 1);
  }
  return out;
}

inline bool has_retweet_prefix(std::string_view text) {
  return text.size() >= 4 && (text[0] == 'R' || text[0] == 'r') && (text[1] == 'T' || text[1] == 't') &&
         text[2] == ' ' && text[3] == '@';
}

inline InteractionKind classify_interaction(const InteractionRecord& r) {
  return (r.is_retweet || has_retweet_prefix(r.text)) ? InteractionKind::retweet
                                                       : InteractionKind::mention;
}

namespace detail {

inline const nlohmann::json& require_string(const nlohmann::json& obj, const char* key,
                                            std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", line_no);
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line_no);
  return *it;
}

}  // namespace detail

/// Parses one JSON line. Explicit `mentions` / `is_retweet` fields override
/// the values derived from the text.
inline InteractionRecord parse_record(std::string_view line, std::size_t line_no = 0) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw SchemaError("record must be a JSON object", line_no);

  InteractionRecord r;
  r.author = normalize_handle(detail::require_string(obj, "author", line_no).get<std::string>());
  if (!is_valid_handle(r.author)) throw SchemaError("invalid author handle '" + r.author + "'", line_no);
  const auto ts = detail::require_string(obj, "timestamp", line_no).get<std::string>();
  try {
    r.timestamp = parse_instant(ts);
  } catch (const ParseError& e) {
    throw SchemaError(e.what(), line_no);
  }
  r.text = detail::require_string(obj, "text", line_no).get<std::string>();
  if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
    if (it->is_string()) {
      r.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      r.id = it->dump();
    } else {
      throw SchemaError("field 'id' must be a string or integer", line_no);
    }
  }

  if (auto it = obj.find("mentions"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError("field 'mentions' must be an array", line_no);
    for (const auto& m : *it) {
      if (!m.is_string()) throw SchemaError("mentions must be strings", line_no);
      std::string h = normalize_handle(m.get<std::string>());
      if (!is_valid_handle(h)) throw SchemaError("invalid mentioned handle '" + h + "'", line_no);
      if (h != r.author && std::find(r.mentions.begin(), r.mentions.end(), h) == r.mentions.end()) {
        r.mentions.push_back(std::move(h));
      }
    }
  } else {
    r.mentions = extract_mentions(r.text, r.author);
  }

  if (auto it = obj.find("is_retweet"); it != obj.end() && !it->is_null()) {
    if (!it->is_boolean()) throw SchemaError("field 'is_retweet' must be a boolean", line_no);
    r.is_retweet = it->get<bool>();
  } else {
    r.is_retweet = has_retweet_prefix(r.text);
  }
  return r;
}

/// Inverse of parse_record: always writes explicit `mentions` and `is_retweet`.
inline std::string serialize_record(const InteractionRecord& r) {
  nlohmann::ordered_json obj;
  if (!r.id.empty()) obj["id"] = r.id;
  obj["author"] = r.author;
  obj["timestamp"] = format_instant(r.timestamp);
  obj["text"] = r.text;
  obj["mentions"] = r.mentions;
  obj["is_retweet"] = r.is_retweet;
  return obj.dump();
}

/// Reads newline-delimited JSON; blank lines are skipped.
inline std::vector<InteractionRecord> read_records(std::istream& in) {
  std::vector<InteractionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(line, line_no));
  }
  return out;
}

inline std::vector<InteractionRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input '" + path + "'");
  try {
    return read_records(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void validate(const CollectionWindow& w, WindowSplit split) {
  if (!(w.start < w.end)) throw ConfigError("collection window start must precede end");
  if (split == WindowSplit::all) return;
  if (!w.election_date) throw ConfigError("pre/post split requires an election date");
  Instant e{*w.election_date};
  if (e < w.start || e > w.end) throw ConfigError("election date lies outside the collection window");
}

/// `all` keeps [start, end]; `pre` keeps timestamps before election-day
/// midnight UTC and `post` keeps the rest, both clipped to [start, end].
inline bool in_window(const InteractionRecord& r, const CollectionWindow& w, WindowSplit split) {
  if (r.timestamp < w.start || r.timestamp > w.end) return false;
  if (split == WindowSplit::all) return true;
  Instant cut{*w.election_date};
  return split == WindowSplit::pre ? r.timestamp < cut : r.timestamp >= cut;
}

inline std::vector<InteractionRecord> filter_window(std::span<const InteractionRecord> records,
                                                    const CollectionWindow& w, WindowSplit split) {
  validate(w, split);
  std::vector<InteractionRecord> out;
  for (const auto& r : records) {
    if (in_window(r, w, split)) out.push_back(r);
  }
  return out;
}

}  // namespace echoscope
