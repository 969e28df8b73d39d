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
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/ingest.hpp"

namespace echoscope {

/// Left-right scale midpoint; extremism is the distance from it.
inline constexpr double kIdeologyCentre = 5.0;

struct Party {
  std::string id;
  std::string country;
  std::string handle;
  double ideology = kIdeologyCentre;  // 0 (far left) .. 10 (far right)
  double vote_share = 0;              // percent
  bool incumbent = false;

  friend bool operator==(const Party&, const Party&) = default;
};

inline void validate(const Party& p) {
  if (!(p.ideology >= 0 && p.ideology <= 10)) {
    throw ValidationError("party '" + p.id + "': ideology " + csv::format_double(p.ideology) +
                          " outside [0, 10]");
  }
  if (!(p.vote_share >= 0 && p.vote_share <= 100)) {
    throw ValidationError("party '" + p.id + "': vote share outside [0, 100]");
  }
  if (!is_valid_handle(p.handle)) throw ValidationError("party '" + p.id + "': invalid handle '" + p.handle + "'");
  if (p.id.empty() || p.country.empty()) throw ValidationError("party id and country must be non-empty");
}

class PartyRegistry {
 public:
  PartyRegistry() = default;

  explicit PartyRegistry(std::vector<Party> parties) {
    for (auto& p : parties) add(std::move(p));
  }

  void add(Party p) {
    p.handle = normalize_handle(p.handle);
    validate(p);
    if (by_handle_.count(p.handle)) throw ValidationError("duplicate handle '" + p.handle + "'");
    for (const auto& q : parties_) {
      if (q.country == p.country && q.id == p.id) {
        throw ValidationError("duplicate party id '" + p.id + "' in country '" + p.country + "'");
      }
    }
    by_handle_[p.handle] = parties_.size();
    parties_.push_back(std::move(p));
  }

  const std::vector<Party>& parties() const { return parties_; }
  std::size_t size() const { return parties_.size(); }

  const Party* find_handle(std::string_view handle) const {
    auto it = by_handle_.find(normalize_handle(handle));
    return it == by_handle_.end() ? nullptr : &parties_[it->second];
  }

  std::vector<std::string> countries() const {
    std::set<std::string> s;
    for (const auto& p : parties_) s.insert(p.country);
    return {s.begin(), s.end()};
  }

  /// Parties of one country in registry order.
  std::vector<Party> in_country(std::string_view country) const {
    std::vector<Party> out;
    for (const auto& p : parties_) {
      if (p.country == country) out.push_back(p);
    }
    return out;
  }

 private:
  std::vector<Party> parties_;
  std::map<std::string, std::size_t> by_handle_;
};

inline constexpr std::string_view kRegistryHeader = "country,party_id,handle,ideology,vote_share,incumbent";

/// Reads `country,party_id,handle,ideology,vote_share,incumbent`.
inline PartyRegistry load_registry(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty registry");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRegistryHeader) throw SchemaError("unexpected registry header '" + line + "'", 1);
  PartyRegistry reg;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = csv::split(line, line_no);
    if (f.size() != 6) throw SchemaError("expected 6 fields, got " + std::to_string(f.size()), line_no);
    Party p;
    p.country = f[0];
    p.id = f[1];
    p.handle = f[2];
    p.ideology = csv::to_double(f[3], "ideology", line_no);
    p.vote_share = csv::to_double(f[4], "vote_share", line_no);
    p.incumbent = csv::to_bool(f[5], "incumbent", line_no);
    try {
      reg.add(std::move(p));
    } catch (const ValidationError& e) {
      throw ValidationError("registry row " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reg;
}

inline PartyRegistry load_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open registry '" + path + "'");
  return load_registry(in);
}

inline void write_registry(std::ostream& out, const PartyRegistry& reg) {
  out << kRegistryHeader << '\n';
  for (const auto& p : reg.parties()) {
    out << csv::join({p.country, p.id, p.handle, csv::format_double(p.ideology),
                      csv::format_double(p.vote_share), p.incumbent ? "true" : "false"})
        << '\n';
  }
}

// ---------------------------------------------------------------------------

enum class IncumbencyPair { II, IO, OO };

inline std::string_view to_string(IncumbencyPair p) {
  switch (p) {
    case IncumbencyPair::II: return "II";
    case IncumbencyPair::IO: return "IO";
    case IncumbencyPair::OO: return "OO";
  }
  return "?";
}

struct PairCovariates {
  double ideological_distance = 0;
  double extremism_sum = 0;
  bool left_right_mismatch = false;
  double size_difference = 0;
  IncumbencyPair incumbency = IncumbencyPair::OO;
  /// Unset when neither party was mentioned.
  std::optional<double> tweet_ratio;

  friend bool operator==(const PairCovariates&, const PairCovariates&) = default;
};

struct PartyCovariates {
  double extremism = 0;
  bool right_wing = false;
  double size = 0;
  bool incumbent = false;
};

inline PartyCovariates party_covariates(const Party& p) {
  // The exact centre counts as left.
  return {std::fabs(p.ideology - kIdeologyCentre), p.ideology > kIdeologyCentre, p.vote_share, p.incumbent};
}

inline std::optional<double> tweet_ratio(std::uint64_t count_a, std::uint64_t count_b) {
  auto hi = std::max(count_a, count_b);
  if (hi == 0) return std::nullopt;
  return static_cast<double>(std::min(count_a, count_b)) / static_cast<double>(hi);
}

inline PairCovariates pair_covariates(const Party& a, const Party& b, std::uint64_t tweet_count_a,
                                      std::uint64_t tweet_count_b) {
  if (a.country != b.country) {
    throw InvalidPairError("parties '" + a.id + "' and '" + b.id + "' are from different countries");
  }
  if (a.handle == b.handle) throw InvalidPairError("a party cannot be paired with itself");
  PairCovariates c;
  const double da = a.ideology - kIdeologyCentre;
  const double db = b.ideology - kIdeologyCentre;
  c.ideological_distance = std::fabs(a.ideology - b.ideology);
  c.extremism_sum = std::fabs(da) + std::fabs(db);
  c.left_right_mismatch = (da > 0 && db < 0) || (da < 0 && db > 0);
  c.size_difference = std::fabs(a.vote_share - b.vote_share);
  c.incumbency = a.incumbent && b.incumbent   ? IncumbencyPair::II
                 : a.incumbent || b.incumbent ? IncumbencyPair::IO
                                              : IncumbencyPair::OO;
  c.tweet_ratio = tweet_ratio(tweet_count_a, tweet_count_b);
  return c;
}

}  // namespace echoscope
