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
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echoscope/covariates.hpp"
#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"
#include "echoscope/partition.hpp"

namespace echoscope {

/// (b_e - i_e) / (b_e + i_e), undefined when both sums are zero.
struct FragmentationScore {
  double value = 0;
  std::uint64_t b_e = 0;
  std::uint64_t i_e = 0;
  bool defined = false;

  friend bool operator==(const FragmentationScore&, const FragmentationScore&) = default;
};

inline FragmentationScore make_score(std::uint64_t boundary, std::uint64_t internal) {
  FragmentationScore s;
  s.b_e = boundary;
  s.i_e = internal;
  s.defined = boundary + internal > 0;
  if (s.defined) {
    // Signed difference of exact integers, one division.
    const double num = boundary >= internal ? static_cast<double>(boundary - internal)
                                            : -static_cast<double>(internal - boundary);
    s.value = num / static_cast<double>(boundary + internal);
  }
  return s;
}

/// Which boundary edges feed B_e. The default follows the direction of the
/// definition (boundary -> internal); `both` also counts internal -> boundary.
enum class BoundaryDirection { outgoing, both };

enum class Side { a, b };

/// Weighted edge sums of a classified pair, by endpoint class.
struct EdgeSums {
  std::uint64_t boundary_to_internal = 0;
  std::uint64_t internal_to_boundary = 0;
  std::uint64_t boundary_to_boundary = 0;
  std::uint64_t within_a = 0;
  std::uint64_t within_b = 0;
  std::uint64_t seed_seed = 0;
  /// Non-seed internal_a <-> internal_b weight; zero for a valid partition.
  std::uint64_t cross_internal = 0;
};

inline EdgeSums edge_sums(const PairNetwork& pair, const PairPartition& part) {
  if (part.assignment.size() != pair.network.node_count()) {
    throw MalformedPairError("partition does not match pair network");
  }
  EdgeSums s;
  for (const auto& e : pair.network.edges()) {
    const Assignment from = part.assignment[e.source];
    const Assignment to = part.assignment[e.target];
    if (pair.is_seed(e.source) && pair.is_seed(e.target)) {
      s.seed_seed += e.weight;
    } else if (from == Assignment::boundary) {
      (to == Assignment::boundary ? s.boundary_to_boundary : s.boundary_to_internal) += e.weight;
    } else if (to == Assignment::boundary) {
      s.internal_to_boundary += e.weight;
    } else if (from != to) {
      s.cross_internal += e.weight;
    } else {
      (from == Assignment::internal_a ? s.within_a : s.within_b) += e.weight;
    }
  }
  return s;
}

inline std::uint64_t boundary_sum(const EdgeSums& s, BoundaryDirection dir) {
  return dir == BoundaryDirection::both ? s.boundary_to_internal + s.internal_to_boundary
                                        : s.boundary_to_internal;
}

inline FragmentationScore fragmentation_f(const EdgeSums& s, BoundaryDirection dir = BoundaryDirection::outgoing) {
  return make_score(boundary_sum(s, dir), s.within_a + s.within_b);
}

inline FragmentationScore fragmentation_f(const PairNetwork& pair, const PairPartition& part,
                                          BoundaryDirection dir = BoundaryDirection::outgoing) {
  return fragmentation_f(edge_sums(pair, part), dir);
}

/// Same B_e as F, with only the chosen side's internal weight.
inline FragmentationScore party_fragmentation_fp(const EdgeSums& s, Side side,
                                                 BoundaryDirection dir = BoundaryDirection::outgoing) {
  return make_score(boundary_sum(s, dir), side == Side::a ? s.within_a : s.within_b);
}

inline FragmentationScore party_fragmentation_fp(const PairNetwork& pair, const PairPartition& part, Side side,
                                                 BoundaryDirection dir = BoundaryDirection::outgoing) {
  return party_fragmentation_fp(edge_sums(pair, part), side, dir);
}

/// Krackhardt-Stern style external/internal ratio for one internal set.
struct EIScore {
  std::uint64_t external = 0;
  std::uint64_t internal = 0;
  double value = 0;
  bool defined = false;
};

/// E counts edges in either direction between the side's internal set and
/// every node outside it; I counts edges inside the set.
inline EIScore ei_index(const PairNetwork& pair, const PairPartition& part, Side side) {
  const Assignment mine = side == Side::a ? Assignment::internal_a : Assignment::internal_b;
  EIScore s;
  for (const auto& e : pair.network.edges()) {
    const bool in_s = part.assignment[e.source] == mine;
    const bool in_t = part.assignment[e.target] == mine;
    if (in_s && in_t) {
      s.internal += e.weight;
    } else if (in_s || in_t) {
      s.external += e.weight;
    }
  }
  const auto f = make_score(s.external, s.internal);
  s.value = f.value;
  s.defined = f.defined;
  return s;
}

// ---------------------------------------------------------------------------
// Observations and descriptive summaries
// ---------------------------------------------------------------------------

/// Network elicitation variants of the robustness models.
enum class Variant { all, mentions, retweets, pre, post, unweighted };

inline constexpr std::array<Variant, 6> kAllVariants = {Variant::all, Variant::mentions, Variant::retweets,
                                                       Variant::pre, Variant::post, Variant::unweighted};

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::all: return "all";
    case Variant::mentions: return "mentions";
    case Variant::retweets: return "retweets";
    case Variant::pre: return "pre";
    case Variant::post: return "post";
    case Variant::unweighted: return "unweighted";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (auto v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

/// Scores of one pair under one variant.
struct VariantScores {
  FragmentationScore f;
  FragmentationScore fp_a;
  FragmentationScore fp_b;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  /// Nodes that mentioned each seed, plus the seed itself.
  std::size_t nodes_a = 0;
  std::size_t nodes_b = 0;
};

/// Classifies the pair and computes F, both F_p and the node counts.
inline VariantScores score_pair(const PairNetwork& pair, const PairPartition& part,
                                BoundaryDirection dir = BoundaryDirection::outgoing) {
  const auto sums = edge_sums(pair, part);
  VariantScores v;
  v.f = fragmentation_f(sums, dir);
  v.fp_a = party_fragmentation_fp(sums, Side::a, dir);
  v.fp_b = party_fragmentation_fp(sums, Side::b, dir);
  v.nodes = pair.network.node_count();
  v.edges = pair.network.edge_count();
  for (NodeId u = 0; u < pair.network.node_count(); ++u) {
    v.nodes_a += u == pair.seed_a_id || pair.direct[u].seed_a > 0;
    v.nodes_b += u == pair.seed_b_id || pair.direct[u].seed_b > 0;
  }
  return v;
}

inline VariantScores score_pair(const PairNetwork& pair) { return score_pair(pair, classify_nodes(pair)); }

/// One party pair: both parties, per-variant scores, derived covariates.
struct PairObservation {
  std::string country;
  Party party_a;
  Party party_b;
  std::uint64_t tweet_count_a = 0;
  std::uint64_t tweet_count_b = 0;
  std::map<Variant, VariantScores> scores;
  PairCovariates covariates;

  const VariantScores* variant(Variant v) const {
    auto it = scores.find(v);
    return it == scores.end() ? nullptr : &it->second;
  }

  std::size_t node_count() const { return scores.count(Variant::all) ? scores.at(Variant::all).nodes : 0; }
  std::size_t edge_count() const { return scores.count(Variant::all) ? scores.at(Variant::all).edges : 0; }
};

struct Summary {
  double min = 0;
  double max = 0;
  double mean = 0;
  /// Sample (n - 1) standard deviation; unset for n == 1.
  std::optional<double> sd;
  std::size_t n = 0;
};

inline Summary describe(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot describe an empty sample");
  Summary s;
  s.n = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

/// Summary of `field(obs)` over the observations for which it has a value.
inline Summary describe(std::span<const PairObservation> obs,
                        const std::function<std::optional<double>(const PairObservation&)>& field) {
  std::vector<double> v;
  for (const auto& o : obs) {
    if (auto x = field(o)) v.push_back(*x);
  }
  return describe(v);
}

}  // namespace echoscope
