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
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"
#include "echoscope/partition.hpp"
#include "echoscope/random.hpp"

namespace echoscope {

struct Point {
  double x = 0;
  double y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Layout {
  /// Indexed by NodeId.
  std::vector<Point> positions;
  std::size_t iterations = 0;
  std::uint64_t rng_seed = 0;
  Point min{0, 0};
  Point max{1, 1};

  friend bool operator==(const Layout&, const Layout&) = default;
};

struct LayoutOptions {
  std::size_t iterations = 500;
  std::uint64_t rng_seed = 0;
  /// k = c * sqrt(area / n).
  double c = 1.0;
  /// Called after every iteration with the iteration index and positions.
  std::function<void(std::size_t, const std::vector<Point>&)> on_iteration;
};

/// Undirected simple edge list (reciprocal edges merged) used for attraction.
inline std::vector<std::pair<NodeId, NodeId>> undirected_edges(const InteractionNetwork& net) {
  std::set<std::pair<NodeId, NodeId>> s;
  for (const auto& e : net.edges()) s.emplace(std::min(e.source, e.target), std::max(e.source, e.target));
  return {s.begin(), s.end()};
}

inline double fr_constant(std::size_t n, double c) { return c * std::sqrt(1.0 / static_cast<double>(n)); }

/// Potential whose negative gradient is the FR force field: d^3/(3k) per
/// edge minus k^2 ln d per node pair.
inline double fr_energy(const InteractionNetwork& net, const std::vector<Point>& pos, double k) {
  double energy = 0;
  const std::size_t n = pos.size();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double d = std::max(std::hypot(pos[u].x - pos[v].x, pos[u].y - pos[v].y), 1e-12);
      energy -= k * k * std::log(d);
    }
  }
  for (const auto& [u, v] : undirected_edges(net)) {
    const double d = std::hypot(pos[u].x - pos[v].x, pos[u].y - pos[v].y);
    energy += d * d * d / (3.0 * k);
  }
  return energy;
}

/// Fruchterman-Reingold layout in the unit square.
///
/// Repulsion k^2/d between every node pair, attraction d^2/k along each
/// undirected edge. Each move is the net force scaled by (t / 0.1)^2 and capped
/// at t, where the temperature t cools linearly from 0.1 to 0 over the
/// iterations. Initial positions are seeded uniform.
inline Layout fruchterman_reingold(const InteractionNetwork& net, const LayoutOptions& opt = {}) {
  const std::size_t n = net.node_count();
  if (n == 0) throw ValidationError("cannot lay out an empty network");
  Layout out;
  out.iterations = opt.iterations;
  out.rng_seed = opt.rng_seed;
  CounterRng rng(opt.rng_seed);
  out.positions.resize(n);
  for (auto& p : out.positions) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  const double k = fr_constant(n, opt.c);
  const double t0 = 0.1;
  const auto edges = undirected_edges(net);
  std::vector<Point> disp(n);
  auto& pos = out.positions;
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    const double t = t0 * (1.0 - static_cast<double>(it) / static_cast<double>(opt.iterations));
    std::fill(disp.begin(), disp.end(), Point{});
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        double dx = pos[u].x - pos[v].x;
        double dy = pos[u].y - pos[v].y;
        double d = std::hypot(dx, dy);
        if (d < 1e-12) {
          // Coincident nodes: push apart along a fixed diagonal.
          dx = dy = 1e-6;
          d = std::hypot(dx, dy);
        }
        const double f = k * k / d;
        disp[u].x += dx / d * f;
        disp[u].y += dy / d * f;
        disp[v].x -= dx / d * f;
        disp[v].y -= dy / d * f;
      }
    }
    for (const auto& [u, v] : edges) {
      const double dx = pos[u].x - pos[v].x;
      const double dy = pos[u].y - pos[v].y;
      const double d = std::hypot(dx, dy);
      if (d < 1e-12) continue;
      const double f = d * d / k;
      disp[u].x -= dx / d * f;
      disp[u].y -= dy / d * f;
      disp[v].x += dx / d * f;
      disp[v].y += dy / d * f;
    }
    for (std::size_t v = 0; v < n; ++v) {
      const double len = std::hypot(disp[v].x, disp[v].y);
      if (len <= 0) continue;
      const double cool = t / t0;
      const double step = std::min(len * cool * cool, t);
      pos[v].x = std::clamp(pos[v].x + disp[v].x / len * step, 0.0, 1.0);
      pos[v].y = std::clamp(pos[v].y + disp[v].y / len * step, 0.0, 1.0);
    }
    if (opt.on_iteration) opt.on_iteration(it, pos);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline constexpr const char* kBoundaryColour = "#404040";
inline constexpr const char* kBoundaryEdgeColour = "#a0a0a0";
inline constexpr const char* kNeutralColour = "#9e9e9e";

/// node handle -> CSS colour.
using ColourMap = std::map<std::string, std::string>;

/// Party colours for internal nodes, dark grey for the boundary.
inline ColourMap partition_colours(const PairNetwork& pair, const PairPartition& part,
                                   const std::string& colour_a = "#1f77b4", const std::string& colour_b = "#d62728") {
  ColourMap m;
  for (NodeId v = 0; v < pair.network.node_count(); ++v) {
    const auto a = part.assignment[v];
    m[pair.network.name(v)] = a == Assignment::internal_a ? colour_a
                              : a == Assignment::internal_b ? colour_b
                                                            : kBoundaryColour;
  }
  return m;
}

enum class FigureFormat { svg, dot, graphml };

namespace detail {

inline std::vector<std::string> node_colours(const InteractionNetwork& net, const ColourMap& colours) {
  for (const auto& [node, c] : colours) {
    if (!net.find(node)) throw ValidationError("colour map names unknown node '" + node + "'");
  }
  std::vector<std::string> out(net.node_count(), kNeutralColour);
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (auto it = colours.find(net.name(v)); it != colours.end()) out[v] = it->second;
  }
  return out;
}

}  // namespace detail

/// Writes a self-contained figure. Edges touching a boundary node are grey;
/// other edges take their source's colour.
inline void render(std::ostream& out, const InteractionNetwork& net, const Layout& layout, const ColourMap& colours,
                   FigureFormat format) {
  if (layout.positions.size() != net.node_count()) throw ValidationError("layout does not cover the network");
  const auto col = detail::node_colours(net, colours);
  auto edge_colour = [&](const Edge& e) {
    return (col[e.source] == kBoundaryColour || col[e.target] == kBoundaryColour) ? std::string(kBoundaryEdgeColour)
                                                                                  : col[e.source];
  };
  const auto& pos = layout.positions;
  switch (format) {
    case FigureFormat::svg: {
      constexpr double size = 800, margin = 20;
      auto sx = [&](double x) { return csv::format_fixed(margin + x * (size - 2 * margin), 2); };
      out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n"
             "<rect width=\"800\" height=\"800\" style=\"fill:#ffffff\"/>\n<g class=\"edges\">\n";
      for (const auto& e : net.edges()) {
        out << "<line x1=\"" << sx(pos[e.source].x) << "\" y1=\"" << sx(pos[e.source].y) << "\" x2=\""
            << sx(pos[e.target].x) << "\" y2=\"" << sx(pos[e.target].y) << "\" style=\"stroke:" << edge_colour(e)
            << ";stroke-opacity:0.5;stroke-width:" << (e.weight > 1 ? "1.5" : "0.7") << "\"/>\n";
      }
      out << "</g>\n<g class=\"nodes\">\n";
      for (NodeId v = 0; v < net.node_count(); ++v) {
        out << "<circle cx=\"" << sx(pos[v].x) << "\" cy=\"" << sx(pos[v].y) << "\" r=\"4\" style=\"fill:" << col[v]
            << "\"><title>" << detail::xml_escape(net.name(v)) << "</title></circle>\n";
      }
      out << "</g>\n</svg>\n";
      break;
    }
    case FigureFormat::dot: {
      out << "digraph G {\n";
      for (NodeId v = 0; v < net.node_count(); ++v) {
        out << "  \"" << net.name(v) << "\" [pos=\"" << csv::format_double(pos[v].x) << ','
            << csv::format_double(pos[v].y) << "!\", color=\"" << col[v] << "\"];\n";
      }
      for (const auto& e : net.edges()) {
        out << "  \"" << net.name(e.source) << "\" -> \"" << net.name(e.target) << "\" [weight=" << e.weight
            << ", color=\"" << edge_colour(e) << "\"];\n";
      }
      out << "}\n";
      break;
    }
    case FigureFormat::graphml: {
      out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
             "  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n"
             "  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n"
             "  <key id=\"color\" for=\"all\" attr.name=\"color\" attr.type=\"string\"/>\n"
             "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
             "  <graph id=\"G\" edgedefault=\"directed\">\n";
      for (NodeId v = 0; v < net.node_count(); ++v) {
        out << "    <node id=\"" << detail::xml_escape(net.name(v)) << "\"><data key=\"x\">"
            << csv::format_double(pos[v].x) << "</data><data key=\"y\">" << csv::format_double(pos[v].y)
            << "</data><data key=\"color\">" << col[v] << "</data></node>\n";
      }
      for (const auto& e : net.edges()) {
        out << "    <edge source=\"" << detail::xml_escape(net.name(e.source)) << "\" target=\""
            << detail::xml_escape(net.name(e.target)) << "\"><data key=\"weight\">" << e.weight
            << "</data><data key=\"color\">" << edge_colour(e) << "</data></edge>\n";
      }
      out << "  </graph>\n</graphml>\n";
      break;
    }
  }
}

inline FigureFormat parse_figure_format(std::string_view s) {
  if (s == "svg") return FigureFormat::svg;
  if (s == "dot") return FigureFormat::dot;
  if (s == "graphml") return FigureFormat::graphml;
  throw ConfigError("unknown figure format '" + std::string(s) + "'");
}

}  // namespace echoscope
