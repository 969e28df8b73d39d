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
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/ingest.hpp"

namespace echoscope {

using NodeId = std::uint32_t;

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  std::uint64_t weight = 0;
  std::uint64_t mention_count = 0;
  std::uint64_t retweet_count = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class KindFilter { all, mention_only, retweet_only };
enum class Weighting { weighted, unweighted };

inline bool passes(KindFilter f, InteractionKind k) {
  switch (f) {
    case KindFilter::all: return true;
    case KindFilter::mention_only: return k == InteractionKind::mention;
    case KindFilter::retweet_only: return k == InteractionKind::retweet;
  }
  return false;
}

/// Directed weighted simple graph of handles.
///
/// Canonical form: nodes sorted by handle (NodeId is the rank), edges sorted
/// by (source, target), no self-loops, every weight >= 1. In weighted mode
/// weight == mention_count + retweet_count; in unweighted mode weight == 1
/// and the tallies keep the raw event counts.
class InteractionNetwork {
 public:
  InteractionNetwork() = default;

  /// Builds from arbitrary node order; edges index into `nodes`. Duplicate
  /// (source, target) pairs are merged by adding tallies.
  static InteractionNetwork from_edges(std::vector<std::string> nodes, std::vector<Edge> edges,
                                       Weighting weighting = Weighting::weighted) {
    const std::size_t n = nodes.size();
    std::vector<NodeId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return nodes[a] < nodes[b]; });
    std::vector<NodeId> rank(n);
    InteractionNetwork net;
    net.weighting_ = weighting;
    net.nodes_.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      if (r > 0 && nodes[order[r]] == nodes[order[r - 1]]) {
        throw ValidationError("duplicate node '" + nodes[order[r]] + "'");
      }
      rank[order[r]] = static_cast<NodeId>(r);
    }
    for (std::size_t r = 0; r < n; ++r) net.nodes_.push_back(std::move(nodes[order[r]]));
    for (auto& e : edges) {
      if (e.source >= n || e.target >= n) throw ValidationError("edge endpoint out of range");
      if (e.source == e.target) throw ValidationError("self-loop on '" + net.nodes_[rank[e.source]] + "'");
      e.source = rank[e.source];
      e.target = rank[e.target];
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    for (const auto& e : edges) {
      if (!net.edges_.empty() && net.edges_.back().source == e.source && net.edges_.back().target == e.target) {
        auto& m = net.edges_.back();
        m.weight += e.weight;
        m.mention_count += e.mention_count;
        m.retweet_count += e.retweet_count;
      } else {
        net.edges_.push_back(e);
      }
    }
    for (auto& e : net.edges_) {
      if (e.mention_count + e.retweet_count == 0) throw ValidationError("edge without events");
      e.weight = weighting == Weighting::weighted ? e.mention_count + e.retweet_count : 1;
    }
    return net;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const std::string> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  const std::string& name(NodeId id) const { return nodes_.at(id); }
  Weighting weighting() const { return weighting_; }

  std::optional<NodeId> find(std::string_view handle) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), handle,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == nodes_.end() || *it != handle) return std::nullopt;
    return static_cast<NodeId>(it - nodes_.begin());
  }

  /// Weight of source -> target, 0 if absent.
  std::uint64_t weight(NodeId source, NodeId target) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{source, target},
                               [](const Edge& e, std::pair<NodeId, NodeId> k) {
                                 return e.source != k.first ? e.source < k.first : e.target < k.second;
                               });
    return (it != edges_.end() && it->source == source && it->target == target) ? it->weight : 0;
  }

  std::uint64_t total_weight() const {
    std::uint64_t s = 0;
    for (const auto& e : edges_) s += e.weight;
    return s;
  }

  /// Same topology and tallies with every weight set to 1.
  InteractionNetwork unweighted() const {
    InteractionNetwork out = *this;
    out.weighting_ = Weighting::unweighted;
    for (auto& e : out.edges_) e.weight = 1;
    return out;
  }

  friend bool operator==(const InteractionNetwork&, const InteractionNetwork&) = default;

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  Weighting weighting_ = Weighting::weighted;
};

/// Mergeable accumulator for network construction.
class NetworkBuilder {
 public:
  void add_node(std::string_view handle) { intern(handle); }

  void add_event(std::string_view source, std::string_view target, InteractionKind kind,
                 std::uint64_t count = 1) {
    NodeId s = intern(source);
    NodeId t = intern(target);
    if (s == t) return;
    auto& tally = edges_[key(s, t)];
    (kind == InteractionKind::retweet ? tally.second : tally.first) += count;
  }

  void add_record(const InteractionRecord& r, KindFilter filter = KindFilter::all) {
    const InteractionKind kind = classify_interaction(r);
    if (!passes(filter, kind) || r.mentions.empty()) return;
    for (const auto& h : r.mentions) add_event(r.author, h, kind);
  }

  void merge(const NetworkBuilder& other) {
    for (const auto& [k, tally] : other.edges_) {
      auto s = intern(other.names_[static_cast<NodeId>(k >> 32)]);
      auto t = intern(other.names_[static_cast<NodeId>(k & 0xffffffffu)]);
      auto& mine = edges_[key(s, t)];
      mine.first += tally.first;
      mine.second += tally.second;
    }
    for (const auto& n : other.names_) intern(n);
  }

  InteractionNetwork finish(Weighting weighting = Weighting::weighted) const {
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& [k, tally] : edges_) {
      edges.push_back(Edge{static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu),
                           tally.first + tally.second, tally.first, tally.second});
    }
    return InteractionNetwork::from_edges(names_, std::move(edges), weighting);
  }

 private:
  static std::uint64_t key(NodeId s, NodeId t) { return (static_cast<std::uint64_t>(s) << 32) | t; }

  NodeId intern(std::string_view h) {
    auto it = ids_.find(std::string(h));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<NodeId>(names_.size());
    names_.emplace_back(h);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> edges_;
};

/// One edge author -> h per mention of each record passing `filter`.
inline InteractionNetwork build_network(std::span<const InteractionRecord> records,
                                        KindFilter filter = KindFilter::all,
                                        Weighting weighting = Weighting::weighted) {
  NetworkBuilder b;
  for (const auto& r : records) b.add_record(r, filter);
  return b.finish(weighting);
}

// ---------------------------------------------------------------------------
// Pair subnetworks
// ---------------------------------------------------------------------------

struct DirectMentions {
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;

  friend bool operator==(const DirectMentions&, const DirectMentions&) = default;
};

/// Subnetwork induced by two party seeds and every author who mentioned one of them.
struct PairNetwork {
  std::string seed_a;
  std::string seed_b;
  InteractionNetwork network;
  NodeId seed_a_id = 0;
  NodeId seed_b_id = 0;
  /// Indexed by NodeId of `network`.
  std::vector<DirectMentions> direct;
  std::uint64_t tweet_count_a = 0;
  std::uint64_t tweet_count_b = 0;

  bool is_seed(NodeId v) const { return v == seed_a_id || v == seed_b_id; }
};

/// Throws MalformedPairError when the structural invariants do not hold.
inline void validate(const PairNetwork& p) {
  const auto& net = p.network;
  if (p.seed_a == p.seed_b) throw MalformedPairError("pair seeds are identical");
  auto a = net.find(p.seed_a);
  auto b = net.find(p.seed_b);
  if (!a || !b || *a != p.seed_a_id || *b != p.seed_b_id) {
    throw MalformedPairError("pair seeds are not nodes of the pair network");
  }
  if (p.direct.size() != net.node_count()) throw MalformedPairError("direct mention table size mismatch");
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (p.is_seed(v)) continue;
    if (p.direct[v].seed_a == 0 && p.direct[v].seed_b == 0) {
      throw MalformedPairError("node '" + net.name(v) + "' never mentioned either seed");
    }
  }
}

/// Seeds plus every author with at least one record mentioning a seed; edges
/// are the subgraph of `network` induced on that node set.
inline PairNetwork pair_subnetwork(const InteractionNetwork& network,
                                   std::span<const InteractionRecord> records, std::string_view seed_a,
                                   std::string_view seed_b) {
  std::string a = normalize_handle(seed_a);
  std::string b = normalize_handle(seed_b);
  if (a == b) throw InvalidPairError("pair seeds must differ (got '" + a + "' twice)");

  std::unordered_map<std::string, DirectMentions> counts;
  counts[a];
  counts[b];
  std::uint64_t ta = 0, tb = 0;
  for (const auto& r : records) {
    bool ma = false, mb = false;
    for (const auto& h : r.mentions) {
      ma = ma || h == a;
      mb = mb || h == b;
    }
    if (!ma && !mb) continue;
    auto& c = counts[r.author];
    if (ma) {
      ++c.seed_a;
      ++ta;
    }
    if (mb) {
      ++c.seed_b;
      ++tb;
    }
  }

  // Map network ids into the subnetwork's node list.
  std::vector<std::string> names;
  names.reserve(counts.size());
  for (const auto& [h, c] : counts) names.push_back(h);
  std::sort(names.begin(), names.end());
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> local(network.node_count(), kAbsent);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (auto id = network.find(names[i])) local[*id] = static_cast<NodeId>(i);
  }
  std::vector<Edge> edges;
  for (const auto& e : network.edges()) {
    if (local[e.source] != kAbsent && local[e.target] != kAbsent) {
      edges.push_back(Edge{local[e.source], local[e.target], e.weight, e.mention_count, e.retweet_count});
    }
  }

  PairNetwork p;
  p.seed_a = a;
  p.seed_b = b;
  // Sorted, so from_edges keeps the local ids.
  p.network = InteractionNetwork::from_edges(names, std::move(edges), network.weighting());
  p.seed_a_id = *p.network.find(a);
  p.seed_b_id = *p.network.find(b);
  p.direct.resize(p.network.node_count());
  for (NodeId v = 0; v < p.network.node_count(); ++v) p.direct[v] = counts.at(p.network.name(v));
  p.tweet_count_a = ta;
  p.tweet_count_b = tb;
  return p;
}

// ---------------------------------------------------------------------------
// Edge list and GraphML I/O
// ---------------------------------------------------------------------------

inline constexpr std::string_view kEdgeCsvHeader = "source,target,weight,mention_count,retweet_count";

inline void write_edge_csv(std::ostream& out, const InteractionNetwork& net) {
  out << kEdgeCsvHeader << '\n';
  for (const auto& e : net.edges()) {
    out << csv::escape(net.name(e.source)) << ',' << csv::escape(net.name(e.target)) << ',' << e.weight
        << ',' << e.mention_count << ',' << e.retweet_count << '\n';
  }
}

/// Isolated nodes are not representable in the edge list and are dropped.
inline InteractionNetwork read_edge_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty edge list");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEdgeCsvHeader) throw SchemaError("unexpected edge list header '" + line + "'", 1);
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& h) {
    auto [it, fresh] = ids.emplace(h, static_cast<NodeId>(names.size()));
    if (fresh) names.push_back(h);
    return it->second;
  };
  std::vector<Edge> edges;
  bool any_unit = false, any_heavy = false, any_collapsed = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = csv::split(line, line_no);
    if (f.size() != 5) throw SchemaError("expected 5 fields", line_no);
    Edge e;
    e.source = intern(normalize_handle(f[0]));
    e.target = intern(normalize_handle(f[1]));
    e.weight = csv::to_uint(f[2], "weight", line_no);
    e.mention_count = csv::to_uint(f[3], "mention_count", line_no);
    e.retweet_count = csv::to_uint(f[4], "retweet_count", line_no);
    if (e.weight == 0) throw ValidationError("line " + std::to_string(line_no) + ": zero weight");
    if (e.weight == e.mention_count + e.retweet_count) {
      (e.weight == 1 ? any_unit : any_heavy) = true;
    } else if (e.weight == 1) {
      any_collapsed = true;
    } else {
      throw ValidationError("line " + std::to_string(line_no) + ": weight does not match tallies");
    }
    edges.push_back(e);
  }
  if (any_collapsed && any_heavy) throw ValidationError("edge list mixes weighted and unweighted edges");
  (void)any_unit;
  return InteractionNetwork::from_edges(std::move(names), std::move(edges),
                                        any_collapsed ? Weighting::unweighted : Weighting::weighted);
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string xml_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos) throw ParseError("bad XML entity");
    auto ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else throw ParseError("unsupported XML entity '&" + std::string(ent) + ";'");
    i = semi;
  }
  return out;
}

/// Value of attribute `name` inside the tag text `tag`.
inline std::optional<std::string> xml_attr(std::string_view tag, std::string_view name) {
  std::string pat = " " + std::string(name) + "=\"";
  auto p = tag.find(pat);
  if (p == std::string_view::npos) return std::nullopt;
  p += pat.size();
  auto q = tag.find('"', p);
  if (q == std::string_view::npos) return std::nullopt;
  return xml_unescape(tag.substr(p, q - p));
}

}  // namespace detail

inline void write_graphml(std::ostream& out, const InteractionNetwork& net) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
         "  <key id=\"mention_count\" for=\"edge\" attr.name=\"mention_count\" attr.type=\"long\"/>\n"
         "  <key id=\"retweet_count\" for=\"edge\" attr.name=\"retweet_count\" attr.type=\"long\"/>\n"
         "  <graph id=\"G\" edgedefault=\"directed\">\n";
  for (const auto& n : net.nodes()) out << "    <node id=\"" << detail::xml_escape(n) << "\"/>\n";
  for (const auto& e : net.edges()) {
    out << "    <edge source=\"" << detail::xml_escape(net.name(e.source)) << "\" target=\""
        << detail::xml_escape(net.name(e.target)) << "\">"
        << "<data key=\"weight\">" << e.weight << "</data>"
        << "<data key=\"mention_count\">" << e.mention_count << "</data>"
        << "<data key=\"retweet_count\">" << e.retweet_count << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

/// Reads the GraphML dialect written by write_graphml (isolated nodes kept).
inline InteractionNetwork read_graphml(std::istream& in) {
  std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& h) {
    auto [it, fresh] = ids.emplace(h, static_cast<NodeId>(names.size()));
    if (fresh) names.push_back(h);
    return it->second;
  };
  std::vector<Edge> edges;
  bool collapsed = false;
  std::size_t pos = 0;
  auto data_value = [&](std::string_view body, std::string_view key) -> std::uint64_t {
    std::string open = "<data key=\"" + std::string(key) + "\">";
    auto p = body.find(open);
    if (p == std::string_view::npos) throw SchemaError("edge lacks '" + std::string(key) + "' data");
    p += open.size();
    auto q = body.find("</data>", p);
    return csv::to_uint(body.substr(p, q - p), key, 0);
  };
  while ((pos = doc.find('<', pos)) != std::string::npos) {
    auto close = doc.find('>', pos);
    if (close == std::string::npos) throw ParseError("unterminated XML tag");
    std::string_view tag(doc.data() + pos, close - pos + 1);
    if (tag.rfind("<node ", 0) == 0) {
      auto id = detail::xml_attr(tag, "id");
      if (!id) throw SchemaError("node without id");
      intern(*id);
    } else if (tag.rfind("<edge ", 0) == 0) {
      auto s = detail::xml_attr(tag, "source");
      auto t = detail::xml_attr(tag, "target");
      if (!s || !t) throw SchemaError("edge without endpoints");
      auto end = doc.find("</edge>", close);
      if (end == std::string::npos) throw ParseError("unterminated edge element");
      std::string_view body(doc.data() + close, end - close);
      Edge e{intern(*s), intern(*t), data_value(body, "weight"), data_value(body, "mention_count"),
             data_value(body, "retweet_count")};
      if (e.weight != e.mention_count + e.retweet_count) collapsed = true;
      edges.push_back(e);
      close = end;
    }
    pos = close + 1;
  }
  return InteractionNetwork::from_edges(std::move(names), std::move(edges),
                                        collapsed ? Weighting::unweighted : Weighting::weighted);
}

}  // namespace echoscope
