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

// Shared fixtures and independent oracles for the test suites.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "echoscope/echoscope.hpp"

namespace echoscope::testing {

/// The three example tweets of the link-formation table.
inline std::vector<std::string> table_one_lines() {
  return {
      R"({"id":"1","author":"blueparty","timestamp":"2014-05-20T09:00:00Z","text":".@stephanie and @emilyw this am delivered a petition calling for prison reform"})",
      R"({"id":"2","author":"john","timestamp":"2014-05-20T09:05:00Z","text":"@blueparty @stephanie @emilyw didn't we have a vote on this? Less than 6 years ago? And the answer was no?"})",
      R"({"id":"3","author":"paul","timestamp":"2014-05-20T09:10:00Z","text":"@john @blueparty @stephanie @emilyw Nope. We had a vote specifically on reducing sentences not on reform in general"})",
  };
}

inline std::vector<InteractionRecord> table_one_records() {
  std::vector<InteractionRecord> out;
  std::size_t line = 0;
  for (const auto& l : table_one_lines()) out.push_back(parse_record(l, ++line));
  return out;
}

/// Builds a pair network from named weighted edges. Direct seed counts are
/// the weights of each node's edges into the seeds.
inline PairNetwork make_pair(const std::vector<std::string>& names,
                             const std::vector<std::tuple<std::string, std::string, std::uint64_t>>& edges,
                             const std::string& seed_a, const std::string& seed_b) {
  std::map<std::string, NodeId> id;
  for (NodeId i = 0; i < names.size(); ++i) id[names[i]] = i;
  std::vector<Edge> es;
  for (const auto& [s, t, w] : edges) es.push_back(Edge{id.at(s), id.at(t), w, w, 0});
  PairNetwork p;
  p.seed_a = seed_a;
  p.seed_b = seed_b;
  p.network = InteractionNetwork::from_edges(names, std::move(es));
  p.seed_a_id = *p.network.find(seed_a);
  p.seed_b_id = *p.network.find(seed_b);
  p.direct.resize(p.network.node_count());
  for (const auto& e : p.network.edges()) {
    if (e.target == p.seed_a_id) {
      p.direct[e.source].seed_a += e.weight;
      p.tweet_count_a += e.weight;
    }
    if (e.target == p.seed_b_id) {
      p.direct[e.source].seed_b += e.weight;
      p.tweet_count_b += e.weight;
    }
  }
  return p;
}

/// Eight-node fixture: internal_a sums 4, internal_b sums 3, boundary x sends 1 to side a and 2 to side b.
inline PairNetwork minus_point_four_fixture() {
  return make_pair({"pa", "pb", "a1", "a2", "a3", "b1", "b2", "x"},
                   {{"a1", "pa", 1}, {"a2", "pa", 1}, {"a3", "pa", 1}, {"a2", "a1", 1},
                    {"b1", "pb", 1}, {"b2", "pb", 2},
                    {"x", "pa", 1}, {"x", "pb", 2}},
                   "pa", "pb");
}

/// Random valid pair network: every non-seed node mentions seed a, seed b or
/// both, plus random extra edges anywhere (seeds included) with weights in [1, max_weight].
inline PairNetwork random_pair(CounterRng& rng, std::size_t non_seed, std::size_t extra_edges,
                               std::uint64_t max_weight = 5) {
  std::vector<std::string> names{"sa", "sb"};
  for (std::size_t i = 0; i < non_seed; ++i) names.push_back("n" + std::to_string(i + 1));
  std::vector<std::tuple<std::string, std::string, std::uint64_t>> edges;
  auto w = [&] { return 1 + rng.below(max_weight); };
  for (std::size_t i = 2; i < names.size(); ++i) {
    const auto which = rng.below(3);
    if (which != 1) edges.emplace_back(names[i], "sa", w());
    if (which != 0) edges.emplace_back(names[i], "sb", w());
  }
  for (std::size_t k = 0; k < extra_edges; ++k) {
    const auto s = rng.below(names.size());
    auto t = rng.below(names.size() - 1);
    if (t >= s) ++t;
    edges.emplace_back(names[s], names[t], w());
  }
  return make_pair(names, edges, "sa", "sb");
}

/// Integer edge sums by brute-force enumeration of all ordered node pairs.
struct OracleSums {
  std::uint64_t boundary_to_internal = 0;
  std::uint64_t within_a = 0;
  std::uint64_t within_b = 0;
};

inline OracleSums oracle_sums(const PairNetwork& pair, const PairPartition& part) {
  OracleSums s;
  const auto n = static_cast<NodeId>(pair.network.node_count());
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u == v) continue;
      const std::uint64_t w = pair.network.weight(u, v);
      if (w == 0) continue;
      const auto lu = part.assignment[u];
      const auto lv = part.assignment[v];
      if (lu == Assignment::boundary && lv != Assignment::boundary) s.boundary_to_internal += w;
      const bool seed_seed = pair.is_seed(u) && pair.is_seed(v);
      if (!seed_seed && lu == Assignment::internal_a && lv == Assignment::internal_a) s.within_a += w;
      if (!seed_seed && lu == Assignment::internal_b && lv == Assignment::internal_b) s.within_b += w;
    }
  }
  return s;
}

/// (b - i) / (b + i) from exact signed integers.
inline std::optional<double> oracle_score(std::uint64_t b, std::uint64_t i) {
  if (b + i == 0) return std::nullopt;
  const auto num = static_cast<std::int64_t>(b) - static_cast<std::int64_t>(i);
  return static_cast<double>(num) / static_cast<double>(b + i);
}

/// Declarative partition oracle.
///
/// Searches all labelings of the non-seed nodes over {internal_a,
/// internal_b, boundary} depth first, keeping those that satisfy:
///   seeds sit on their own side;
///   an internal node mentioned only its own seed and has no cross contact;
///   a boundary node mentioned both seeds or has a cross contact.
/// A cross contact of a node on provisional side S is a mention of a node
/// whose provisional side is the other one, or a mention by the other seed.
/// Returns every consistent labeling.
inline std::vector<std::vector<Assignment>> oracle_partitions(const PairNetwork& pair) {
  const auto& net = pair.network;
  const auto n = static_cast<NodeId>(net.node_count());
  enum Side { none, a, b, both };
  std::vector<Side> provisional(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v == pair.seed_a_id) {
      provisional[v] = a;
    } else if (v == pair.seed_b_id) {
      provisional[v] = b;
    } else {
      const bool ma = net.weight(v, pair.seed_a_id) > 0;
      const bool mb = net.weight(v, pair.seed_b_id) > 0;
      provisional[v] = ma && mb ? both : ma ? a : mb ? b : none;
    }
  }
  auto cross = [&](NodeId v) {
    const Side s = provisional[v];
    if (s != a && s != b) return false;
    const Side other = s == a ? b : a;
    const NodeId other_seed = s == a ? pair.seed_b_id : pair.seed_a_id;
    if (net.weight(other_seed, v) > 0) return true;
    for (NodeId u = 0; u < n; ++u) {
      if (u != v && provisional[u] == other && net.weight(v, u) > 0) return true;
    }
    return false;
  };
  auto admissible = [&](NodeId v, Assignment l) {
    if (v == pair.seed_a_id) return l == Assignment::internal_a;
    if (v == pair.seed_b_id) return l == Assignment::internal_b;
    switch (l) {
      case Assignment::internal_a: return provisional[v] == a && !cross(v);
      case Assignment::internal_b: return provisional[v] == b && !cross(v);
      case Assignment::boundary: return provisional[v] == both || cross(v);
    }
    return false;
  };
  std::vector<std::vector<Assignment>> found;
  std::vector<Assignment> cur(n);
  std::function<void(NodeId)> rec = [&](NodeId v) {
    if (v == n) {
      found.push_back(cur);
      return;
    }
    for (auto l : {Assignment::internal_a, Assignment::internal_b, Assignment::boundary}) {
      if (!admissible(v, l)) continue;
      cur[v] = l;
      rec(v + 1);
    }
  };
  rec(0);
  return found;
}

/// Number of edges, either direction, joining internal_a and internal_b
/// other than seed <-> seed.
inline std::size_t internal_cross_edges(const PairNetwork& pair, const std::vector<Assignment>& l) {
  std::size_t k = 0;
  for (const auto& e : pair.network.edges()) {
    if (pair.is_seed(e.source) && pair.is_seed(e.target)) continue;
    const auto ls = l[e.source], lt = l[e.target];
    k += (ls == Assignment::internal_a && lt == Assignment::internal_b) ||
         (ls == Assignment::internal_b && lt == Assignment::internal_a);
  }
  return k;
}

/// Same network with every tally multiplied by c.
inline PairNetwork scale_weights(const PairNetwork& p, std::uint64_t c) {
  std::vector<std::string> names(p.network.nodes().begin(), p.network.nodes().end());
  std::vector<Edge> edges(p.network.edges().begin(), p.network.edges().end());
  for (auto& e : edges) {
    e.mention_count *= c;
    e.retweet_count *= c;
  }
  PairNetwork out = p;
  out.network = InteractionNetwork::from_edges(names, std::move(edges), p.network.weighting());
  for (auto& d : out.direct) {
    d.seed_a *= c;
    d.seed_b *= c;
  }
  out.tweet_count_a *= c;
  out.tweet_count_b *= c;
  return out;
}

/// Ordinary least squares with classical standard errors.
struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double sigma2 = 0;
};

inline OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  OlsFit f;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  f.beta = xtx.ldlt().solve(x.transpose() * y);
  const Eigen::VectorXd r = y - x * f.beta;
  f.sigma2 = r.squaredNorm() / static_cast<double>(x.rows() - x.cols());
  const Eigen::MatrixXd cov = f.sigma2 * xtx.inverse();
  f.se = cov.diagonal().array().sqrt();
  return f;
}

/// One-way ANOVA estimators for a balanced design (g groups, m per group):
/// sigma2_e = MSW, sigma2_u = (MSB - MSW) / m.
struct AnovaComponents {
  double sigma2_u = 0;
  double sigma2_e = 0;
};

inline AnovaComponents anova_components(const std::vector<std::vector<double>>& groups) {
  const double g = static_cast<double>(groups.size());
  const double m = static_cast<double>(groups.front().size());
  double grand = 0;
  std::vector<double> means;
  for (const auto& grp : groups) {
    double s = 0;
    for (double v : grp) s += v;
    means.push_back(s / m);
    grand += s;
  }
  grand /= g * m;
  double ssb = 0, ssw = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    ssb += m * (means[j] - grand) * (means[j] - grand);
    for (double v : groups[j]) ssw += (v - means[j]) * (v - means[j]);
  }
  const double msb = ssb / (g - 1);
  const double msw = ssw / (g * (m - 1));
  return {(msb - msw) / m, msw};
}

}  // namespace echoscope::testing
