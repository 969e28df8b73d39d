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
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "echoscope/covariates.hpp"
#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"
#include "echoscope/ingest.hpp"
#include "echoscope/metrics.hpp"
#include "echoscope/models.hpp"
#include "echoscope/partition.hpp"
#include "echoscope/random.hpp"
#include "echoscope/time.hpp"
#include "echoscope/viz.hpp"

namespace echoscope {

namespace fs = std::filesystem;

struct RunConfig {
  std::vector<std::string> inputs;
  std::string registry;
  /// country -> election day
  std::map<std::string, Date> elections;
  std::optional<Instant> window_start;
  std::optional<Instant> window_end;
  std::vector<Variant> variants{Variant::all};
  /// Grid ids, or "all" for every cell whose variant is computed.
  std::vector<std::string> models{"all"};
  std::string output = "report";
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;
  bool figures = false;
  /// Pairs above this size are not drawn (layout cost is quadratic).
  std::size_t figure_max_nodes = 1500;
  std::size_t layout_iterations = 300;
  bool cube_response = false;
  BoundaryDirection boundary = BoundaryDirection::outgoing;
};

inline BoundaryDirection parse_boundary_direction(std::string_view s) {
  if (s == "outgoing") return BoundaryDirection::outgoing;
  if (s == "both") return BoundaryDirection::both;
  throw ConfigError("unknown boundary direction '" + std::string(s) + "'");
}

inline std::string_view to_string(BoundaryDirection d) {
  return d == BoundaryDirection::both ? "both" : "outgoing";
}

namespace detail {

inline std::string resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal().string();
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) throw ConfigError(std::string("'") + key + "' must be a string or an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Reads a run configuration; relative paths resolve against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> known = {"inputs",  "registry",         "elections",         "window",
                                              "variants", "models",          "output",            "rng_seed",
                                              "threads",  "figures",         "figure_max_nodes",  "layout_iterations",
                                              "cube_response", "boundary_direction"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown run config key '" + k + "'");
  }
  RunConfig c;
  try {
    if (j.contains("inputs")) {
      for (auto& p : detail::string_list(j["inputs"], "inputs")) c.inputs.push_back(detail::resolve_path(p, base_dir));
    }
    if (j.contains("registry")) c.registry = detail::resolve_path(j["registry"].get<std::string>(), base_dir);
    if (j.contains("elections")) {
      for (const auto& [country, d] : j["elections"].items()) c.elections[country] = parse_date(d.get<std::string>());
    }
    if (j.contains("window")) {
      const auto& w = j["window"];
      if (w.contains("start")) c.window_start = parse_instant(w["start"].get<std::string>());
      if (w.contains("end")) c.window_end = parse_instant(w["end"].get<std::string>());
    }
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : detail::string_list(j["variants"], "variants")) c.variants.push_back(parse_variant(v));
    }
    if (j.contains("models")) c.models = detail::string_list(j["models"], "models");
    if (j.contains("output")) c.output = detail::resolve_path(j["output"].get<std::string>(), base_dir);
    if (j.contains("rng_seed")) c.rng_seed = j["rng_seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    if (j.contains("figures")) c.figures = j["figures"].get<bool>();
    if (j.contains("figure_max_nodes")) c.figure_max_nodes = j["figure_max_nodes"].get<std::size_t>();
    if (j.contains("layout_iterations")) c.layout_iterations = j["layout_iterations"].get<std::size_t>();
    if (j.contains("cube_response")) c.cube_response = j["cube_response"].get<bool>();
    if (j.contains("boundary_direction")) {
      c.boundary = parse_boundary_direction(j["boundary_direction"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("run config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j, fs::path(path).parent_path());
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["inputs"] = c.inputs;
  j["registry"] = c.registry;
  auto& el = j["elections"] = nlohmann::ordered_json::object();
  for (const auto& [k, d] : c.elections) el[k] = format_date(d);
  if (c.window_start || c.window_end) {
    auto& w = j["window"] = nlohmann::ordered_json::object();
    if (c.window_start) w["start"] = format_instant(*c.window_start);
    if (c.window_end) w["end"] = format_instant(*c.window_end);
  }
  auto& vs = j["variants"] = nlohmann::ordered_json::array();
  for (auto v : c.variants) vs.push_back(std::string(to_string(v)));
  j["models"] = c.models;
  j["output"] = c.output;
  j["rng_seed"] = c.rng_seed;
  j["threads"] = c.threads;
  j["figures"] = c.figures;
  j["cube_response"] = c.cube_response;
  j["boundary_direction"] = std::string(to_string(c.boundary));
  return j;
}

/// Model ids to fit: "all" keeps the grid cells whose variant is computed.
inline std::vector<std::string> resolve_models(const RunConfig& c) {
  std::vector<std::string> out;
  auto computed = [&](Variant v) { return std::find(c.variants.begin(), c.variants.end(), v) != c.variants.end(); };
  for (const auto& id : c.models) {
    if (id == "all") {
      for (const auto& s : model_grid()) {
        if (computed(s.variant)) out.push_back(s.id);
      }
    } else {
      out.push_back(model_spec(id).id);
    }
  }
  std::vector<std::string> unique;
  for (auto& id : out) {
    if (std::find(unique.begin(), unique.end(), id) == unique.end()) unique.push_back(id);
  }
  return unique;
}

/// Fails fast on anything that would otherwise surface mid-run.
inline void validate(const RunConfig& c, const PartyRegistry& registry) {
  if (c.inputs.empty()) throw ConfigError("no input files given");
  for (const auto& p : c.inputs) {
    if (!fs::is_regular_file(p)) throw ConfigError("input file '" + p + "' does not exist");
  }
  if (c.threads == 0) throw ConfigError("threads must be at least 1");
  if (c.variants.empty()) throw ConfigError("no variants requested");
  if (c.window_start && c.window_end && !(*c.window_start < *c.window_end)) {
    throw ConfigError("collection window start must precede end");
  }
  for (const auto& id : c.models) {
    if (id == "all") continue;
    const auto spec = model_spec(id);
    if (std::find(c.variants.begin(), c.variants.end(), spec.variant) == c.variants.end()) {
      throw ConfigError("model " + id + " needs variant '" + std::string(to_string(spec.variant)) +
                        "', which is not computed");
    }
  }
  const bool split = std::find(c.variants.begin(), c.variants.end(), Variant::pre) != c.variants.end() ||
                     std::find(c.variants.begin(), c.variants.end(), Variant::post) != c.variants.end();
  if (!split) return;
  for (const auto& country : registry.countries()) {
    if (registry.in_country(country).size() < 2) continue;
    auto it = c.elections.find(country);
    if (it == c.elections.end()) {
      throw ConfigError("country '" + country + "' has no election date but pre/post variants are requested");
    }
    const Instant e{it->second};
    if ((c.window_start && e < *c.window_start) || (c.window_end && e > *c.window_end)) {
      throw ConfigError("election date of country '" + country + "' lies outside the collection window");
    }
  }
}

inline void validate_inputs(const RunConfig& c) {
  if (c.registry.empty()) throw ConfigError("no registry given");
  if (!fs::is_regular_file(c.registry)) throw ConfigError("registry file '" + c.registry + "' does not exist");
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct PairTask {
  std::string country;
  Party party_a;
  Party party_b;
};

struct CountryEligibility {
  std::string country;
  std::vector<Party> eligible;
  std::vector<Party> unmentioned;
};

/// Mentions per registry handle over the records.
inline std::map<std::string, std::uint64_t> mention_counts(std::span<const InteractionRecord> records,
                                                           const PartyRegistry& registry) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& p : registry.parties()) counts[p.handle] = 0;
  for (const auto& r : records) {
    for (const auto& h : r.mentions) {
      if (auto it = counts.find(h); it != counts.end()) ++it->second;
    }
  }
  return counts;
}

/// Parties mentioned at least once; countries need two of them to form pairs.
inline std::vector<CountryEligibility> eligibility(std::span<const InteractionRecord> records,
                                                   const PartyRegistry& registry) {
  const auto counts = mention_counts(records, registry);
  std::vector<CountryEligibility> out;
  for (const auto& country : registry.countries()) {
    CountryEligibility e{country, {}, {}};
    for (const auto& p : registry.in_country(country)) {
      (counts.at(p.handle) > 0 ? e.eligible : e.unmentioned).push_back(p);
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<PairTask> form_pairs(std::span<const CountryEligibility> countries) {
  std::vector<PairTask> out;
  for (const auto& c : countries) {
    for (std::size_t i = 0; i < c.eligible.size(); ++i) {
      for (std::size_t j = i + 1; j < c.eligible.size(); ++j) out.push_back({c.country, c.eligible[i], c.eligible[j]});
    }
  }
  return out;
}

struct Analysis {
  std::size_t records_read = 0;
  std::size_t records_used = 0;
  std::vector<CountryEligibility> countries;
  std::vector<PairObservation> observations;
  /// Parallel to `observations`: the pair network and partition of the `all` variant.
  std::vector<PairNetwork> networks;
  std::vector<PairPartition> partitions;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool keeps(Variant v, const InteractionRecord& r, std::optional<Instant> cut) {
  switch (v) {
    case Variant::all:
    case Variant::unweighted: return true;
    case Variant::mentions: return classify_interaction(r) == InteractionKind::mention;
    case Variant::retweets: return classify_interaction(r) == InteractionKind::retweet;
    case Variant::pre: return r.timestamp < *cut;
    case Variant::post: return r.timestamp >= *cut;
  }
  return false;
}

/// Records relevant to one country: those mentioning any of its party accounts.
inline std::vector<InteractionRecord> country_records(std::span<const InteractionRecord> records,
                                                      const std::vector<Party>& parties) {
  std::set<std::string> handles;
  for (const auto& p : parties) handles.insert(p.handle);
  std::vector<InteractionRecord> out;
  for (const auto& r : records) {
    for (const auto& h : r.mentions) {
      if (handles.count(h)) {
        out.push_back(r);
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Builds every variant network, extracts and scores every eligible pair.
inline Analysis analyse(const RunConfig& cfg, const PartyRegistry& registry,
                        std::vector<InteractionRecord> records) {
  Analysis a;
  a.records_read = records.size();
  if (cfg.window_start || cfg.window_end) {
    std::erase_if(records, [&](const InteractionRecord& r) {
      return (cfg.window_start && r.timestamp < *cfg.window_start) || (cfg.window_end && r.timestamp > *cfg.window_end);
    });
  }
  a.records_used = records.size();
  a.countries = eligibility(records, registry);
  for (const auto& c : a.countries) {
    for (const auto& p : c.unmentioned) {
      a.warnings.push_back("party " + c.country + "/" + p.id + " (@" + p.handle + ") is never mentioned; excluded");
    }
    if (c.eligible.size() < 2) {
      a.warnings.push_back("country " + c.country + " has " + std::to_string(c.eligible.size()) +
                           " eligible part" + (c.eligible.size() == 1 ? "y" : "ies") + "; it contributes no pairs");
    }
  }
  const auto tasks = form_pairs(a.countries);

  // Variant networks. Pre and post networks depend on the election day, so
  // they are keyed by date.
  std::map<std::pair<Variant, std::int64_t>, InteractionNetwork> networks;
  auto cut_of = [&](const std::string& country) -> std::optional<Instant> {
    auto it = cfg.elections.find(country);
    if (it == cfg.elections.end()) return std::nullopt;
    return Instant{it->second};
  };
  auto key_of = [&](Variant v, const std::string& country) {
    std::int64_t day = 0;
    if (v == Variant::pre || v == Variant::post) {
      auto cut = cut_of(country);
      if (!cut) throw ConfigError("country '" + country + "' has no election date but pre/post variants are requested");
      day = cut->time_since_epoch().count();
    }
    return std::pair{v, day};
  };
  for (auto v : cfg.variants) {
    std::set<std::string> seen_countries;
    for (const auto& t : tasks) {
      if (!seen_countries.insert(t.country).second) continue;
      auto key = key_of(v, t.country);
      if (networks.count(key)) continue;
      if (v == Variant::unweighted) {
        auto all_key = std::pair{Variant::all, std::int64_t{0}};
        if (!networks.count(all_key)) networks[all_key] = build_network(records);
        networks[key] = networks[all_key].unweighted();
        continue;
      }
      const auto cut = cut_of(t.country);
      std::vector<InteractionRecord> kept;
      for (const auto& r : records) {
        if (detail::keeps(v, r, cut)) kept.push_back(r);
      }
      networks[key] = build_network(kept);
    }
  }

  std::map<std::string, std::vector<InteractionRecord>> by_country;
  for (const auto& c : a.countries) {
    if (c.eligible.size() >= 2) by_country[c.country] = detail::country_records(records, c.eligible);
  }

  struct Slot {
    std::optional<PairObservation> obs;
    PairNetwork network;
    PairPartition partition;
    std::vector<std::string> warnings;
  };
  std::vector<Slot> slots(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const auto& t = tasks[i];
    Slot& s = slots[i];
    const std::string label = t.country + "/" + t.party_a.id + "-" + t.party_b.id;
    try {
      PairObservation o;
      o.country = t.country;
      o.party_a = t.party_a;
      o.party_b = t.party_b;
      const auto& crecs = by_country.at(t.country);
      const auto cut = cut_of(t.country);
      for (auto v : cfg.variants) {
        std::vector<InteractionRecord> members;
        for (const auto& r : crecs) {
          if (detail::keeps(v, r, cut)) members.push_back(r);
        }
        const auto& net = networks.at(key_of(v, t.country));
        PairNetwork pair = pair_subnetwork(net, members, t.party_a.handle, t.party_b.handle);
        PairPartition part = classify_nodes(pair);
        const auto scores = score_pair(pair, part, cfg.boundary);
        if (!scores.f.defined) {
          s.warnings.push_back("pair " + label + " variant " + std::string(to_string(v)) +
                               ": F undefined (no boundary or internal weight)");
        }
        o.scores[v] = scores;
        if (v == Variant::all || (v == cfg.variants.front() && !o.scores.count(Variant::all))) {
          o.tweet_count_a = pair.tweet_count_a;
          o.tweet_count_b = pair.tweet_count_b;
        }
        if (v == Variant::all) {
          s.network = std::move(pair);
          s.partition = std::move(part);
        }
      }
      o.covariates = pair_covariates(o.party_a, o.party_b, o.tweet_count_a, o.tweet_count_b);
      s.obs = std::move(o);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      s.warnings.push_back("pair " + label + " excluded: " + e.what());
    }
  });
  for (auto& s : slots) {
    a.warnings.insert(a.warnings.end(), s.warnings.begin(), s.warnings.end());
    if (!s.obs) continue;
    a.observations.push_back(std::move(*s.obs));
    a.networks.push_back(std::move(s.network));
    a.partitions.push_back(std::move(s.partition));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Report writers
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPairMetricsHeader = "country,party_a,party_b,f,b_e,i_e,nodes,edges,variant";

inline void write_pair_metrics(std::ostream& out, std::span<const PairObservation> obs) {
  out << kPairMetricsHeader << '\n';
  for (const auto& o : obs) {
    for (auto v : kAllVariants) {
      const auto* s = o.variant(v);
      if (!s) continue;
      out << csv::join({o.country, o.party_a.id, o.party_b.id, s->f.defined ? csv::format_double(s->f.value) : "NA",
                        std::to_string(s->f.b_e), std::to_string(s->f.i_e), std::to_string(s->nodes),
                        std::to_string(s->edges), std::string(to_string(v))})
          << '\n';
    }
  }
}

inline constexpr std::string_view kObservationsHeader =
    "country,party_a,party_b,handle_a,handle_b,ideology_a,ideology_b,vote_share_a,vote_share_b,incumbent_a,"
    "incumbent_b,tweets_a,tweets_b,tweet_ratio,variant,nodes,edges,nodes_a,nodes_b,b_e,i_a,i_b";

/// Long-format observations (one row per pair and variant) carrying every
/// quantity the model suite needs, so `fit` can rerun without the corpus.
inline void write_observations(std::ostream& out, std::span<const PairObservation> obs) {
  out << kObservationsHeader << '\n';
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  for (const auto& o : obs) {
    for (const auto& [v, s] : o.scores) {
      out << csv::join({o.country, o.party_a.id, o.party_b.id, o.party_a.handle, o.party_b.handle,
                        csv::format_double(o.party_a.ideology), csv::format_double(o.party_b.ideology),
                        csv::format_double(o.party_a.vote_share), csv::format_double(o.party_b.vote_share),
                        b(o.party_a.incumbent), b(o.party_b.incumbent), std::to_string(o.tweet_count_a),
                        std::to_string(o.tweet_count_b),
                        o.covariates.tweet_ratio ? csv::format_double(*o.covariates.tweet_ratio) : "NA",
                        std::string(to_string(v)), std::to_string(s.nodes), std::to_string(s.edges),
                        std::to_string(s.nodes_a), std::to_string(s.nodes_b), std::to_string(s.f.b_e),
                        std::to_string(s.fp_a.i_e), std::to_string(s.fp_b.i_e)})
          << '\n';
    }
  }
}

inline std::vector<PairObservation> read_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kObservationsHeader) {
    throw SchemaError("observations header must be '" + std::string(kObservationsHeader) + "'", 1);
  }
  std::vector<PairObservation> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line, line_no);
    if (f.size() != 22) throw SchemaError("expected 22 fields", line_no);
    auto key = std::tuple{f[0], f[1], f[2]};
    auto it = index.find(key);
    if (it == index.end()) {
      PairObservation o;
      o.country = f[0];
      o.party_a = Party{f[1], f[0], f[3], csv::to_double(f[5], "ideology_a", line_no),
                        csv::to_double(f[7], "vote_share_a", line_no), csv::to_bool(f[9], "incumbent_a", line_no)};
      o.party_b = Party{f[2], f[0], f[4], csv::to_double(f[6], "ideology_b", line_no),
                        csv::to_double(f[8], "vote_share_b", line_no), csv::to_bool(f[10], "incumbent_b", line_no)};
      try {
        validate(o.party_a);
        validate(o.party_b);
        o.tweet_count_a = csv::to_uint(f[11], "tweets_a", line_no);
        o.tweet_count_b = csv::to_uint(f[12], "tweets_b", line_no);
        o.covariates = pair_covariates(o.party_a, o.party_b, o.tweet_count_a, o.tweet_count_b);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
      if (f[13] == "NA") {
        o.covariates.tweet_ratio.reset();
      } else {
        o.covariates.tweet_ratio = csv::to_double(f[13], "tweet_ratio", line_no);
      }
      it = index.emplace(key, out.size()).first;
      out.push_back(std::move(o));
    }
    auto& o = out[it->second];
    Variant v;
    try {
      v = parse_variant(f[14]);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (o.scores.count(v)) throw ParseError("duplicate variant row", line_no);
    VariantScores s;
    s.nodes = csv::to_uint(f[15], "nodes", line_no);
    s.edges = csv::to_uint(f[16], "edges", line_no);
    s.nodes_a = csv::to_uint(f[17], "nodes_a", line_no);
    s.nodes_b = csv::to_uint(f[18], "nodes_b", line_no);
    const auto be = csv::to_uint(f[19], "b_e", line_no);
    const auto ia = csv::to_uint(f[20], "i_a", line_no);
    const auto ib = csv::to_uint(f[21], "i_b", line_no);
    s.f = make_score(be, ia + ib);
    s.fp_a = make_score(be, ia);
    s.fp_b = make_score(be, ib);
    o.scores[v] = s;
  }
  return out;
}

namespace detail {

inline std::string table_row(const std::vector<std::string>& cells, const std::vector<std::size_t>& width) {
  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i == 0) {
      out << std::left << std::setw(static_cast<int>(width[i] + 2)) << cells[i];
    } else {
      out << std::right << std::setw(static_cast<int>(width[i] + 2)) << cells[i];
    }
  }
  std::string s = out.str();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s + "\n";
}

inline void write_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) out << table_row(r, width);
}

}  // namespace detail

/// Descriptive statistics of the `all` variant as a summary table with one
/// row per measure.
inline void write_descriptives(std::ostream& out, std::span<const PairObservation> obs) {
  using Field = std::function<std::optional<double>(const PairObservation&)>;
  const std::pair<std::string, Field> numeric[] = {
      {"Observed Nodes", [](const PairObservation& o) -> std::optional<double> {
         return o.variant(Variant::all) ? std::optional<double>(static_cast<double>(o.node_count())) : std::nullopt;
       }},
      {"Observed Edges", [](const PairObservation& o) -> std::optional<double> {
         return o.variant(Variant::all) ? std::optional<double>(static_cast<double>(o.edge_count())) : std::nullopt;
       }},
      {"Fragmentation Score", [](const PairObservation& o) -> std::optional<double> {
         const auto* s = o.variant(Variant::all);
         return s && s->f.defined ? std::optional<double>(s->f.value) : std::nullopt;
       }},
      {"Ideological Distance", [](const PairObservation& o) -> std::optional<double> {
         return o.covariates.ideological_distance;
       }},
      {"Extremism", [](const PairObservation& o) -> std::optional<double> { return o.covariates.extremism_sum; }},
      {"Size Difference", [](const PairObservation& o) -> std::optional<double> {
         return o.covariates.size_difference;
       }},
  };
  std::vector<std::vector<std::string>> rows{{"Numerical Variables", "Min", "Max", "Mean", "SD"}};
  for (const auto& [label, field] : numeric) {
    std::size_t have = 0;
    for (const auto& o : obs) have += field(o).has_value();
    if (have == 0) {
      rows.push_back({label, "NA", "NA", "NA", "NA"});
      continue;
    }
    const auto s = describe(obs, field);
    const int digits = label.rfind("Observed", 0) == 0 ? 0 : 2;
    rows.push_back({label, csv::format_fixed(s.min, digits), csv::format_fixed(s.max, digits),
                    csv::format_fixed(s.mean, 2), s.sd ? csv::format_fixed(*s.sd, 2) : "NA"});
  }
  detail::write_table(out, rows);
  out << '\n';

  std::size_t ii = 0, io = 0, oo = 0, lr = 0;
  for (const auto& o : obs) {
    ii += o.covariates.incumbency == IncumbencyPair::II;
    io += o.covariates.incumbency == IncumbencyPair::IO;
    oo += o.covariates.incumbency == IncumbencyPair::OO;
    lr += o.covariates.left_right_mismatch;
  }
  const double n = static_cast<double>(obs.size());
  auto pct = [&](std::size_t k) { return obs.empty() ? std::string("NA") : csv::format_fixed(100.0 * k / n, 1); };
  std::vector<std::vector<std::string>> cat{{"Categorical Variables", "Count", "Percentage"},
                                            {"I-I Pair", std::to_string(ii), pct(ii)},
                                            {"I-O Pair", std::to_string(io), pct(io)},
                                            {"O-O Pair", std::to_string(oo), pct(oo)},
                                            {"Left-Right Pair", std::to_string(lr), pct(lr)},
                                            {"Total Pairs", std::to_string(obs.size()), obs.empty() ? "NA" : "100.0"}};
  detail::write_table(out, cat);
}

inline nlohmann::ordered_json models_json(std::span<const SuiteEntry> entries) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    if (e.fit) {
      j.push_back(to_json(*e.fit));
    } else {
      j.push_back({{"id", e.spec.id}, {"error", e.error}});
    }
  }
  return j;
}

inline std::string pair_file_stem(const PairObservation& o) {
  return o.country + "_" + o.party_a.id + "_" + o.party_b.id;
}

struct RunResult {
  Analysis analysis;
  std::vector<SuiteEntry> models;
};

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

template <class F>
std::string to_text(F&& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

}  // namespace detail

/// Full pipeline: validation, ingestion, pair scoring, model suite and report.
///
/// Writes into `cfg.output`:
///   pair_metrics.csv, observations.csv, descriptives.txt, models.json,
///   models.txt, metadata.json, warnings.txt, partitions/<pair>.csv and,
///   with `figures`, figures/<pair>.svg.
inline RunResult run(const RunConfig& cfg, std::ostream* log = nullptr) {
  validate_inputs(cfg);
  const auto registry = load_registry_file(cfg.registry);
  validate(cfg, registry);
  const auto model_ids = resolve_models(cfg);

  std::vector<InteractionRecord> records;
  for (const auto& p : cfg.inputs) {
    auto part = read_records_file(p);
    records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }

  RunResult res;
  res.analysis = analyse(cfg, registry, std::move(records));
  auto& a = res.analysis;
  if (log) {
    for (const auto& w : a.warnings) *log << "warning: " << w << '\n';
  }
  DatasetOptions dopt;
  dopt.cube_response = cfg.cube_response;
  res.models = model_suite(a.observations, model_ids, dopt);

  const fs::path out_dir(cfg.output);
  fs::create_directories(out_dir / "partitions");
  detail::write_file(out_dir / "pair_metrics.csv",
                     detail::to_text([&](std::ostream& s) { write_pair_metrics(s, a.observations); }));
  detail::write_file(out_dir / "observations.csv",
                     detail::to_text([&](std::ostream& s) { write_observations(s, a.observations); }));
  detail::write_file(out_dir / "descriptives.txt",
                     detail::to_text([&](std::ostream& s) { write_descriptives(s, a.observations); }));
  detail::write_file(out_dir / "models.json", models_json(res.models).dump(2) + "\n");
  detail::write_file(out_dir / "models.txt", format_model_table(res.models));
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    if (a.partitions[i].assignment.empty()) continue;
    detail::write_file(out_dir / "partitions" / (pair_file_stem(a.observations[i]) + ".csv"),
                       detail::to_text([&](std::ostream& s) { write_partition_csv(s, a.networks[i], a.partitions[i]); }));
  }
  std::string warnings;
  for (const auto& w : a.warnings) warnings += w + "\n";

  if (cfg.figures) {
    fs::create_directories(out_dir / "figures");
    CounterRng root(cfg.rng_seed);
    std::vector<std::string> svgs(a.observations.size());
    std::vector<std::string> skipped(a.observations.size());
    parallel_for(a.observations.size(), cfg.threads, [&](std::size_t i) {
      const auto& net = a.networks[i].network;
      if (a.partitions[i].assignment.empty()) return;
      if (net.node_count() > cfg.figure_max_nodes) {
        skipped[i] = "figure for " + pair_file_stem(a.observations[i]) + " skipped: " +
                     std::to_string(net.node_count()) + " nodes";
        return;
      }
      LayoutOptions lo;
      lo.iterations = cfg.layout_iterations;
      lo.rng_seed = root.split(i)();
      const auto layout = fruchterman_reingold(net, lo);
      std::ostringstream s;
      render(s, net, layout, partition_colours(a.networks[i], a.partitions[i]), FigureFormat::svg);
      svgs[i] = s.str();
    });
    for (std::size_t i = 0; i < svgs.size(); ++i) {
      if (!skipped[i].empty()) warnings += skipped[i] + "\n";
      if (!svgs[i].empty()) {
        detail::write_file(out_dir / "figures" / (pair_file_stem(a.observations[i]) + ".svg"), svgs[i]);
      }
    }
  }
  detail::write_file(out_dir / "warnings.txt", warnings);

  nlohmann::ordered_json meta;
  meta["rng_seed"] = cfg.rng_seed;
  auto& inputs = meta["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : cfg.inputs) inputs.push_back(fs::path(p).filename().string());
  meta["registry"] = fs::path(cfg.registry).filename().string();
  meta["records_read"] = a.records_read;
  meta["records_in_window"] = a.records_used;
  auto& vs = meta["variants"] = nlohmann::ordered_json::array();
  for (auto v : kAllVariants) {
    if (std::find(cfg.variants.begin(), cfg.variants.end(), v) != cfg.variants.end()) {
      vs.push_back(std::string(to_string(v)));
    }
  }
  meta["models"] = model_ids;
  meta["boundary_direction"] = std::string(to_string(cfg.boundary));
  meta["cube_response"] = cfg.cube_response;
  meta["p_value_method"] = "Wald-z";
  meta["standardization"] = "response and numeric predictors standardized within each estimation sample";
  auto& countries = meta["countries"] = nlohmann::ordered_json::object();
  for (const auto& c : a.countries) {
    const std::size_t k = c.eligible.size();
    countries[c.country] = {{"registry_parties", k + c.unmentioned.size()},
                            {"eligible_parties", k},
                            {"pairs", k < 2 ? 0 : k * (k - 1) / 2}};
  }
  meta["pair_count"] = a.observations.size();
  meta["warnings"] = a.warnings;
  detail::write_file(out_dir / "metadata.json", meta.dump(2) + "\n");
  return res;
}

}  // namespace echoscope
