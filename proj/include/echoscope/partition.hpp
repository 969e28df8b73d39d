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

#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"

namespace echoscope {

enum class Assignment : std::uint8_t { internal_a, internal_b, boundary };

inline std::string_view to_string(Assignment a) {
  switch (a) {
    case Assignment::internal_a: return "internal_a";
    case Assignment::internal_b: return "internal_b";
    case Assignment::boundary: return "boundary";
  }
  return "?";
}

struct PairPartition {
  /// Indexed by NodeId of the pair network.
  std::vector<Assignment> assignment;
  std::size_t iterations = 0;
  /// Weight of seed_a -> seed_b plus seed_b -> seed_a; counted in no metric sum.
  std::uint64_t seed_seed_edge_weight = 0;

  std::vector<NodeId> members(Assignment which) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < assignment.size(); ++v) {
      if (assignment[v] == which) out.push_back(v);
    }
    return out;
  }

  std::size_t count(Assignment which) const {
    std::size_t n = 0;
    for (auto a : assignment) n += a == which;
    return n;
  }

  friend bool operator==(const PairPartition&, const PairPartition&) = default;
};

/// Out-edge adjacency in CSR form over a canonical network (edges sorted by source).
struct OutAdjacency {
  std::vector<std::size_t> offsets;

  explicit OutAdjacency(const InteractionNetwork& net) : offsets(net.node_count() + 1, 0) {
    for (const auto& e : net.edges()) ++offsets[e.source + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  }
};

/// Splits the pair's nodes into internal_a, internal_b and boundary.
///
/// Each non-seed node starts on the side of the seed(s) it mentioned: one
/// seed puts it on that side, both seeds make it boundary. The seed groups
/// are then refined in synchronous sweeps. An internal node moves to the
/// boundary when it mentions a node that is internal on the opposite side, or
/// when the opposite seed mentions it. Seeds never move. Every sweep decides
/// all moves from the state at the start of the sweep, so the outcome does
/// not depend on `sweep_order`; iteration stops at the first sweep with no
/// moves, and `iterations` counts sweeps including that last one.
///
/// Afterwards no edge, in either direction, joins internal_a and internal_b
/// apart from a seed_a <-> seed_b edge, whose weight is reported separately.
inline PairPartition classify_nodes(const PairNetwork& pair, std::span<const NodeId> sweep_order) {
  const auto& net = pair.network;
  const std::size_t n = net.node_count();
  if (pair.seed_a_id >= n || pair.seed_b_id >= n || pair.seed_a_id == pair.seed_b_id) {
    throw MalformedPairError("pair network does not contain both seeds");
  }
  if (pair.direct.size() != n) throw MalformedPairError("direct mention table size mismatch");
  if (sweep_order.size() != n) throw MalformedPairError("sweep order must list every node once");

  PairPartition part;
  part.assignment.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v == pair.seed_a_id) {
      part.assignment[v] = Assignment::internal_a;
    } else if (v == pair.seed_b_id) {
      part.assignment[v] = Assignment::internal_b;
    } else {
      const auto& d = pair.direct[v];
      if (d.seed_a == 0 && d.seed_b == 0) {
        throw MalformedPairError("node '" + net.name(v) + "' never mentioned either seed");
      }
      part.assignment[v] = d.seed_a > 0 && d.seed_b > 0 ? Assignment::boundary
                           : d.seed_a > 0               ? Assignment::internal_a
                                                        : Assignment::internal_b;
    }
  }

  const auto edges = net.edges();
  const OutAdjacency adj(net);
  std::vector<std::uint8_t> addressed_by_a(n, 0), addressed_by_b(n, 0);
  for (std::size_t i = adj.offsets[pair.seed_a_id]; i < adj.offsets[pair.seed_a_id + 1]; ++i) {
    addressed_by_a[edges[i].target] = 1;
  }
  for (std::size_t i = adj.offsets[pair.seed_b_id]; i < adj.offsets[pair.seed_b_id + 1]; ++i) {
    addressed_by_b[edges[i].target] = 1;
  }
  for (const auto& e : edges) {
    if ((e.source == pair.seed_a_id && e.target == pair.seed_b_id) ||
        (e.source == pair.seed_b_id && e.target == pair.seed_a_id)) {
      part.seed_seed_edge_weight += e.weight;
    }
  }

  std::vector<std::uint8_t> seen(n, 0);
  for (NodeId v : sweep_order) {
    if (v >= n || seen[v]) throw MalformedPairError("sweep order must list every node once");
    seen[v] = 1;
  }

  std::vector<NodeId> moves;
  for (;;) {
    ++part.iterations;
    moves.clear();
    for (NodeId v : sweep_order) {
      const Assignment side = part.assignment[v];
      if (pair.is_seed(v) || side == Assignment::boundary) continue;
      const Assignment opposite =
          side == Assignment::internal_a ? Assignment::internal_b : Assignment::internal_a;
      bool cross = side == Assignment::internal_a ? addressed_by_b[v] : addressed_by_a[v];
      for (std::size_t i = adj.offsets[v]; !cross && i < adj.offsets[v + 1]; ++i) {
        cross = part.assignment[edges[i].target] == opposite;
      }
      if (cross) moves.push_back(v);
    }
    if (moves.empty()) break;
    for (NodeId v : moves) part.assignment[v] = Assignment::boundary;
  }
  return part;
}

inline PairPartition classify_nodes(const PairNetwork& pair) {
  std::vector<NodeId> order(pair.network.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  return classify_nodes(pair, order);
}

inline void write_partition_csv(std::ostream& out, const PairNetwork& pair, const PairPartition& part) {
  out << "node,assignment\n";
  for (NodeId v = 0; v < pair.network.node_count(); ++v) {
    out << csv::escape(pair.network.name(v)) << ',' << to_string(part.assignment[v]) << '\n';
  }
}

}  // namespace echoscope
