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
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "echoscope/covariates.hpp"
#include "echoscope/error.hpp"
#include "echoscope/graph.hpp"
#include "echoscope/ingest.hpp"
#include "echoscope/metrics.hpp"
#include "echoscope/models.hpp"
#include "echoscope/partition.hpp"
#include "echoscope/random.hpp"
#include "echoscope/stats.hpp"
#include "echoscope/time.hpp"

namespace echoscope {

enum class NoiseMode { deterministic, poisson };

/// Planted two-sided pair network. Weight targets count every edge of the
/// class, including the one-per-node edges that tie a node to its seed(s).
struct PlantedPairSpec {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::uint64_t w_internal_a = 0;
  std::uint64_t w_internal_b = 0;
  std::size_t n_boundary = 0;
  std::uint64_t w_boundary = 0;
  std::uint64_t rng_seed = 0;
  NoiseMode noise = NoiseMode::deterministic;
  /// Probability that a surplus weight unit lands on a fresh random edge
  /// rather than reinforcing an existing one.
  double new_edge_share = 0.5;
  std::string seed_a = "party_a";
  std::string seed_b = "party_b";
};

inline void validate(const PlantedPairSpec& s) {
  auto fail = [](const std::string& why) { throw ValidationError("infeasible planted spec: " + why); };
  if (s.w_internal_a < s.n_a) fail("w_internal_a must cover one seed edge per internal_a node");
  if (s.w_internal_b < s.n_b) fail("w_internal_b must cover one seed edge per internal_b node");
  if (s.w_internal_a > 0 && s.n_a == 0) fail("w_internal_a > 0 needs internal_a nodes");
  if (s.w_internal_b > 0 && s.n_b == 0) fail("w_internal_b > 0 needs internal_b nodes");
  if (s.w_boundary > 0 && s.n_boundary == 0) fail("w_boundary > 0 needs boundary nodes");
  if (s.w_boundary < 2 * s.n_boundary) fail("each boundary node needs one edge to each seed");
  if (s.w_internal_a + s.w_internal_b + s.w_boundary == 0) fail("all weight targets are zero");
  if (!(s.new_edge_share >= 0 && s.new_edge_share <= 1)) fail("new_edge_share outside [0, 1]");
  if (!is_valid_handle(s.seed_a) || !is_valid_handle(s.seed_b) || s.seed_a == s.seed_b) fail("bad seed handles");
}

struct PlantedPair {
  PairNetwork pair;
  PairPartition truth;
};

namespace detail {

/// Edge accumulator that can pick a uniformly random existing edge of a class.
class PlantedEdges {
 public:
  void add(NodeId s, NodeId t, int cls, std::uint64_t w) {
    const std::uint64_t k = (static_cast<std::uint64_t>(s) << 32) | t;
    auto [it, fresh] = index_.emplace(k, edges_.size());
    if (fresh) {
      edges_.push_back(Edge{s, t, 0, 0, 0});
      by_class_[cls].push_back(it->second);
    }
    edges_[it->second].mention_count += w;
  }

  void reinforce(int cls, CounterRng& rng) {
    const auto& pool = by_class_[cls];
    edges_[pool[rng.below(pool.size())]].mention_count += 1;
  }

  std::vector<Edge> take() { return std::move(edges_); }

 private:
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> by_class_[3];
};

}  // namespace detail

/// Generates a pair network whose planted partition is the ground truth.
///
/// Internal nodes mention their own seed (one required unit) and otherwise
/// only nodes of their own side; seeds may mention their own side. Boundary
/// nodes mention both seeds and spend surplus weight on random internal
/// targets of either side. In deterministic mode the class sums equal the
/// targets exactly; in Poisson mode each surplus is a Poisson draw with the
/// target surplus as mean.
inline PlantedPair generate_pair(const PlantedPairSpec& spec) {
  validate(spec);
  CounterRng rng(spec.rng_seed);
  const std::size_t n = 2 + spec.n_a + spec.n_b + spec.n_boundary;
  if (n > std::numeric_limits<NodeId>::max()) throw ValidationError("planted spec too large");
  std::vector<std::string> names;
  names.reserve(n);
  names.push_back(spec.seed_a);
  names.push_back(spec.seed_b);
  std::vector<Assignment> truth;
  truth.reserve(n);
  truth.push_back(Assignment::internal_a);
  truth.push_back(Assignment::internal_b);
  for (std::size_t i = 0; i < spec.n_a; ++i) {
    names.push_back("a" + std::to_string(i + 1));
    truth.push_back(Assignment::internal_a);
  }
  for (std::size_t i = 0; i < spec.n_b; ++i) {
    names.push_back("b" + std::to_string(i + 1));
    truth.push_back(Assignment::internal_b);
  }
  for (std::size_t i = 0; i < spec.n_boundary; ++i) {
    names.push_back("x" + std::to_string(i + 1));
    truth.push_back(Assignment::boundary);
  }

  // Side member lists (seed first) in generation ids.
  std::vector<NodeId> side[2];
  side[0].push_back(0);
  side[1].push_back(1);
  NodeId next = 2;
  for (std::size_t i = 0; i < spec.n_a; ++i) side[0].push_back(next++);
  for (std::size_t i = 0; i < spec.n_b; ++i) side[1].push_back(next++);
  const NodeId first_boundary = next;

  detail::PlantedEdges edges;
  auto surplus = [&](std::uint64_t target) -> std::uint64_t {
    return spec.noise == NoiseMode::deterministic ? target : rng.poisson(static_cast<double>(target));
  };

  const std::uint64_t w_side[2] = {spec.w_internal_a, spec.w_internal_b};
  const std::size_t n_side[2] = {spec.n_a, spec.n_b};
  for (int s = 0; s < 2; ++s) {
    const auto& members = side[s];
    for (std::size_t i = 1; i < members.size(); ++i) edges.add(members[i], members[0], s, 1);
    std::uint64_t extra = surplus(w_side[s] - n_side[s]);
    for (std::uint64_t u = 0; u < extra; ++u) {
      if (rng.bernoulli(spec.new_edge_share)) {
        const auto from = members[rng.below(members.size())];
        auto to = members[rng.below(members.size() - 1)];
        if (to == from) to = members.back();
        edges.add(from, to, s, 1);
      } else {
        edges.reinforce(s, rng);
      }
    }
  }
  if (spec.n_boundary > 0) {
    for (std::size_t i = 0; i < spec.n_boundary; ++i) {
      const NodeId x = first_boundary + static_cast<NodeId>(i);
      edges.add(x, 0, 2, 1);
      edges.add(x, 1, 2, 1);
    }
    const std::size_t internal_total = side[0].size() + side[1].size();
    std::uint64_t extra = surplus(spec.w_boundary - 2 * spec.n_boundary);
    for (std::uint64_t u = 0; u < extra; ++u) {
      if (rng.bernoulli(spec.new_edge_share)) {
        const NodeId x = first_boundary + static_cast<NodeId>(rng.below(spec.n_boundary));
        const std::size_t k = rng.below(internal_total);
        const NodeId to = k < side[0].size() ? side[0][k] : side[1][k - side[0].size()];
        edges.add(x, to, 2, 1);
      } else {
        edges.reinforce(2, rng);
      }
    }
  }

  auto edge_list = edges.take();
  // Each weight unit is one single-mention record, so direct seed counts
  // are the weights of the edges into the seeds.
  std::vector<DirectMentions> direct(n);
  std::uint64_t ta = 0, tb = 0;
  for (const auto& e : edge_list) {
    if (e.target == 0) {
      direct[e.source].seed_a += e.mention_count;
      ta += e.mention_count;
    } else if (e.target == 1) {
      direct[e.source].seed_b += e.mention_count;
      tb += e.mention_count;
    }
  }

  PlantedPair out;
  out.pair.seed_a = spec.seed_a;
  out.pair.seed_b = spec.seed_b;
  out.pair.network = InteractionNetwork::from_edges(names, std::move(edge_list));
  out.pair.seed_a_id = *out.pair.network.find(spec.seed_a);
  out.pair.seed_b_id = *out.pair.network.find(spec.seed_b);
  out.pair.tweet_count_a = ta;
  out.pair.tweet_count_b = tb;
  out.pair.direct.resize(n);
  out.truth.assignment.resize(n);
  out.truth.iterations = 1;
  for (NodeId g = 0; g < n; ++g) {
    const NodeId id = *out.pair.network.find(names[g]);
    out.pair.direct[id] = direct[g];
    out.truth.assignment[id] = truth[g];
  }
  return out;
}

/// One single-mention record per weight unit (retweet tallies become "RT @"
/// records), spaced one second apart from `start`. Ingesting the result and
/// rebuilding reproduces the network and its direct seed counts.
inline std::vector<InteractionRecord> to_records(const InteractionNetwork& net, Instant start,
                                                 std::string_view id_prefix = "r") {
  std::vector<InteractionRecord> out;
  std::uint64_t k = 0;
  for (const auto& e : net.edges()) {
    for (int kind = 0; kind < 2; ++kind) {
      const std::uint64_t count = kind == 0 ? e.mention_count : e.retweet_count;
      for (std::uint64_t c = 0; c < count; ++c, ++k) {
        InteractionRecord r;
        r.id = std::string(id_prefix) + std::to_string(k + 1);
        r.timestamp = start + std::chrono::seconds(k);
        r.author = net.name(e.source);
        r.text = (kind == 1 ? "RT @" : "@") + net.name(e.target);
        r.mentions = {net.name(e.target)};
        r.is_retweet = kind == 1;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planted studies
// ---------------------------------------------------------------------------

/// Moments of the calibrated covariate generator (descriptive table targets).
inline constexpr double kExtremismSumMean = 4.17;
inline constexpr double kExtremismSumSd = 1.42;
inline constexpr double kDistanceMean = 2.95;
inline constexpr double kDistanceSd = 1.91;

struct StudySpec {
  std::size_t countries = 23;
  std::size_t pairs_per_country = 7;
  /// Coefficients on the standardized scale, keyed by pair predictor column.
  std::map<std::string, double> beta;
  double sigma_u = 0;
  double sigma_e = 1;
  std::uint64_t rng_seed = 0;
  /// F = f_centre + f_scale * composed linear predictor.
  double f_centre = 0.0;
  double f_scale = 0.3;
  /// b_e + i_e of every planted pair network.
  std::uint64_t pair_weight = 400;
  std::size_t max_resamples = 1000;
  bool keep_networks = false;
};

struct Study {
  std::vector<PairObservation> observations;
  std::vector<double> country_effects;
  std::vector<double> composed_f;
  std::size_t resamples = 0;
  std::vector<PlantedPair> networks;
};

/// Draws one party's ideology so that pair extremism and distance match the
/// calibrated moments: extremism ~ N(2.085, 1.004) clipped to [0, 5], side
/// opposite to the partner's with probability 0.6.
struct PartyDraw {
  double ideology_a = 0;
  double ideology_b = 0;
};

inline PartyDraw draw_ideologies(CounterRng& rng) {
  auto extremism = [&] { return std::clamp(rng.normal(2.085, 1.004), 0.0, 5.0); };
  const double ea = extremism();
  const double eb = extremism();
  const double sa = rng.bernoulli(0.5) ? 1.0 : -1.0;
  const double sb = rng.bernoulli(0.6) ? -sa : sa;
  return {kIdeologyCentre + sa * ea, kIdeologyCentre + sb * eb};
}

/// Planted pair spec realizing score (b - i) / (b + i) ~= f with b + i == total.
inline PlantedPairSpec spec_for_score(double f, std::uint64_t total, std::uint64_t seed) {
  auto b = static_cast<std::uint64_t>(std::llround(static_cast<double>(total) * (1.0 + f) / 2.0));
  b = std::min(b, total);
  if (b == 1) b = f > -1.0 + 3.0 / static_cast<double>(total) ? 2 : 0;
  const std::uint64_t i = total - b;
  PlantedPairSpec s;
  s.w_internal_a = (i + 1) / 2;
  s.w_internal_b = i - s.w_internal_a;
  s.n_a = s.w_internal_a == 0 ? 0 : std::max<std::size_t>(1, s.w_internal_a / 3);
  s.n_b = s.w_internal_b == 0 ? 0 : std::max<std::size_t>(1, s.w_internal_b / 3);
  s.w_boundary = b;
  s.n_boundary = b == 0 ? 0 : std::max<std::size_t>(1, b / 5);
  s.rng_seed = seed;
  return s;
}

/// Pair-level study with known coefficients.
///
/// Covariates are drawn per pair, the response is composed as
///   y = sum_k beta_k z_k + u_country + e
/// with numeric covariates z standardized over the study and dummies left
/// 0/1, mapped to F, and realized as a planted network whose measured F is
/// stored in the observation. Draws with |F| >= 1 resample the residual.
inline Study generate_study(const StudySpec& spec) {
  if (spec.countries == 0 || spec.pairs_per_country == 0) throw ValidationError("study dimensions must be positive");
  if (spec.sigma_u < 0 || spec.sigma_e < 0 || spec.f_scale <= 0) throw ValidationError("invalid study scales");
  for (const auto& [k, v] : spec.beta) {
    static const std::vector<std::string> known = {"ideological_distance", "extremism_sum", "left_right_mismatch",
                                                   "size_difference",      "io_pair",       "oo_pair",
                                                   "tweet_ratio"};
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ValidationError("unknown study coefficient '" + k + "'");
    }
  }
  CounterRng root(spec.rng_seed);
  CounterRng cov_rng = root.split(1);
  CounterRng noise_rng = root.split(2);
  Study study;

  const std::size_t n = spec.countries * spec.pairs_per_country;
  study.observations.reserve(n);
  for (std::size_t c = 0; c < spec.countries; ++c) {
    const std::string country = "c" + std::to_string(c + 1);
    study.country_effects.push_back(spec.sigma_u * noise_rng.normal());
    for (std::size_t k = 0; k < spec.pairs_per_country; ++k) {
      PairObservation o;
      o.country = country;
      const auto ideo = draw_ideologies(cov_rng);
      const std::string stem = country + "k" + std::to_string(k + 1);
      o.party_a = Party{stem + "a", country, stem + "a", ideo.ideology_a, cov_rng.uniform(1, 30), cov_rng.bernoulli(0.35)};
      o.party_b = Party{stem + "b", country, stem + "b", ideo.ideology_b, cov_rng.uniform(1, 30), cov_rng.bernoulli(0.35)};
      o.covariates = pair_covariates(o.party_a, o.party_b, 1, 1);
      o.covariates.tweet_ratio = cov_rng.uniform(0.02, 1.0);
      study.observations.push_back(std::move(o));
    }
  }

  // Standardize numeric covariates over the study, as the model does.
  std::vector<double> eta(n, 0.0);
  for (const auto& [col, b] : spec.beta) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = detail::pair_value(study.observations[i], col);
    if (!is_dummy_predictor(col)) {
      const double m = sample_mean(x);
      const double sd = sample_sd(x);
      if (!(sd > 0)) throw ValidationError("study covariate '" + col + "' has zero variance");
      for (double& v : x) v = (v - m) / sd;
    }
    for (std::size_t i = 0; i < n; ++i) eta[i] += b * x[i];
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& o = study.observations[i];
    const double base = eta[i] + study.country_effects[i / spec.pairs_per_country];
    double f = spec.f_centre + spec.f_scale * (base + spec.sigma_e * noise_rng.normal());
    std::size_t tries = 0;
    while (!(f > -1.0 && f < 1.0)) {
      if (++tries > spec.max_resamples) throw ValidationError("composed F stays outside (-1, 1); reduce f_scale");
      ++study.resamples;
      f = spec.f_centre + spec.f_scale * (base + spec.sigma_e * noise_rng.normal());
    }
    study.composed_f.push_back(f);
    auto planted = generate_pair(spec_for_score(f, spec.pair_weight, root.split(1000 + i)()));
    o.scores[Variant::all] = score_pair(planted.pair);
    o.tweet_count_a = planted.pair.tweet_count_a;
    o.tweet_count_b = planted.pair.tweet_count_b;
    if (spec.keep_networks) study.networks.push_back(std::move(planted));
  }
  return study;
}

// ---------------------------------------------------------------------------
// Synthetic corpora for the end-to-end pipeline
// ---------------------------------------------------------------------------

struct CorpusCountry {
  std::string name;
  std::size_t parties = 2;
  /// Registry parties nobody mentions.
  std::size_t silent_parties = 0;
};

struct CorpusSpec {
  std::vector<CorpusCountry> countries;
  Instant start{};
  Instant end{};
  std::map<std::string, Date> elections;
  std::uint64_t rng_seed = 0;
  /// Supporters per party: base + per_vote_point * vote share.
  double supporters_base = 30;
  double supporters_per_vote_point = 20;
  double mean_messages = 2.0;
  /// Chance a message also mentions another party's account, scaled by
  /// exp(-ideological distance / 3).
  double cross_share = 0.25;
  double reply_share = 0.3;
  double retweet_share = 0.2;
};

struct Corpus {
  PartyRegistry registry;
  std::vector<InteractionRecord> records;
};

/// Country-level discussion corpus: party accounts, their supporters,
/// replies among supporters and cross-party mentions.
inline Corpus generate_corpus(const CorpusSpec& spec) {
  if (!(spec.start < spec.end)) throw ValidationError("corpus window start must precede end");
  CounterRng root(spec.rng_seed);
  CounterRng reg_rng = root.split(1);
  Corpus corpus;
  const auto span_ms = (spec.end - spec.start).count();
  std::uint64_t next_id = 0;
  auto emit = [&](CounterRng& rng, const std::string& author, std::vector<std::string> mentions, bool retweet) {
    InteractionRecord r;
    r.id = "s" + std::to_string(++next_id);
    r.author = author;
    r.timestamp = spec.start + std::chrono::milliseconds(
                                   static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span_ms) / 1000 + 1)) * 1000);
    std::string text = retweet ? "RT " : "";
    for (std::size_t i = 0; i < mentions.size(); ++i) text += (i ? " @" : "@") + mentions[i];
    r.text = text + (retweet ? ": shared" : " placeholder");
    r.mentions = extract_mentions(r.text, r.author);
    r.is_retweet = retweet;
    corpus.records.push_back(std::move(r));
  };

  for (std::size_t ci = 0; ci < spec.countries.size(); ++ci) {
    const auto& country = spec.countries[ci];
    std::vector<Party> parties;
    for (std::size_t k = 0; k < country.parties + country.silent_parties; ++k) {
      Party p;
      p.country = country.name;
      p.id = "p" + std::to_string(k + 1);
      p.handle = country.name + "_p" + std::to_string(k + 1);
      do {
        p.ideology = std::round(reg_rng.uniform(0.5, 9.5) * 10) / 10;
      } while (p.ideology == kIdeologyCentre);
      p.vote_share = std::round(reg_rng.uniform(1, 35) * 10) / 10;
      p.incumbent = reg_rng.bernoulli(0.4);
      corpus.registry.add(p);
      parties.push_back(p);
    }
    CounterRng rng = root.split(100 + ci);
    std::vector<std::vector<std::string>> supporters(country.parties);
    for (std::size_t k = 0; k < country.parties; ++k) {
      const auto count = static_cast<std::size_t>(spec.supporters_base + spec.supporters_per_vote_point * parties[k].vote_share);
      for (std::size_t j = 0; j < count; ++j) supporters[k].push_back(parties[k].handle + "_u" + std::to_string(j + 1));
    }
    for (std::size_t k = 0; k < country.parties; ++k) {
      for (const auto& user : supporters[k]) {
        const std::uint64_t messages = 1 + rng.poisson(spec.mean_messages - 1.0);
        for (std::uint64_t m = 0; m < messages; ++m) {
          const bool retweet = rng.bernoulli(spec.retweet_share);
          std::vector<std::string> mentions{parties[k].handle};
          if (country.parties > 1) {
            std::size_t other = rng.below(country.parties - 1);
            if (other >= k) ++other;
            const double affinity = std::exp(-std::fabs(parties[k].ideology - parties[other].ideology) / 3.0);
            if (rng.bernoulli(spec.cross_share * affinity)) {
              mentions.push_back(rng.bernoulli(0.5) ? parties[other].handle
                                                    : supporters[other][rng.below(supporters[other].size())]);
            }
          }
          if (!retweet && rng.bernoulli(spec.reply_share)) {
            const auto& peer = supporters[k][rng.below(supporters[k].size())];
            if (peer != user) mentions.push_back(peer);
          }
          emit(rng, user, std::move(mentions), retweet);
        }
      }
      // The party account addresses a few of its supporters.
      const std::size_t shout_outs = 1 + supporters[k].size() / 20;
      for (std::size_t j = 0; j < shout_outs; ++j) {
        emit(rng, parties[k].handle, {supporters[k][rng.below(supporters[k].size())]}, false);
      }
    }
  }
  std::stable_sort(corpus.records.begin(), corpus.records.end(),
                   [](const InteractionRecord& a, const InteractionRecord& b) { return a.timestamp < b.timestamp; });
  return corpus;
}

// ---------------------------------------------------------------------------
// JSON specs
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> keys, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " spec must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(std::string("unknown ") + what + " spec key '" + k + "'");
    }
  }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spec key '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline PlantedPairSpec parse_pair_spec(const nlohmann::json& j) {
  detail::reject_unknown(j, {"n_a", "n_b", "w_internal_a", "w_internal_b", "n_boundary", "w_boundary", "rng_seed",
                             "noise", "new_edge_share", "seed_a", "seed_b"},
                         "pair");
  PlantedPairSpec s;
  detail::read_opt(j, "n_a", s.n_a);
  detail::read_opt(j, "n_b", s.n_b);
  detail::read_opt(j, "w_internal_a", s.w_internal_a);
  detail::read_opt(j, "w_internal_b", s.w_internal_b);
  detail::read_opt(j, "n_boundary", s.n_boundary);
  detail::read_opt(j, "w_boundary", s.w_boundary);
  detail::read_opt(j, "rng_seed", s.rng_seed);
  detail::read_opt(j, "new_edge_share", s.new_edge_share);
  detail::read_opt(j, "seed_a", s.seed_a);
  detail::read_opt(j, "seed_b", s.seed_b);
  std::string noise = "deterministic";
  detail::read_opt(j, "noise", noise);
  if (noise == "poisson") {
    s.noise = NoiseMode::poisson;
  } else if (noise != "deterministic") {
    throw ConfigError("noise must be 'deterministic' or 'poisson'");
  }
  validate(s);
  return s;
}

inline StudySpec parse_study_spec(const nlohmann::json& j) {
  detail::reject_unknown(j, {"countries", "pairs_per_country", "beta", "sigma_u", "sigma_e", "rng_seed", "f_centre",
                             "f_scale", "pair_weight", "max_resamples"},
                         "study");
  StudySpec s;
  detail::read_opt(j, "countries", s.countries);
  detail::read_opt(j, "pairs_per_country", s.pairs_per_country);
  detail::read_opt(j, "beta", s.beta);
  detail::read_opt(j, "sigma_u", s.sigma_u);
  detail::read_opt(j, "sigma_e", s.sigma_e);
  detail::read_opt(j, "rng_seed", s.rng_seed);
  detail::read_opt(j, "f_centre", s.f_centre);
  detail::read_opt(j, "f_scale", s.f_scale);
  detail::read_opt(j, "pair_weight", s.pair_weight);
  detail::read_opt(j, "max_resamples", s.max_resamples);
  return s;
}

inline CorpusSpec parse_corpus_spec(const nlohmann::json& j) {
  detail::reject_unknown(j, {"countries", "start", "end", "elections", "rng_seed", "supporters_base",
                             "supporters_per_vote_point", "mean_messages", "cross_share", "reply_share",
                             "retweet_share"},
                         "corpus");
  CorpusSpec s;
  try {
    for (const auto& c : j.at("countries")) {
      detail::reject_unknown(c, {"name", "parties", "silent_parties"}, "corpus country");
      CorpusCountry cc;
      cc.name = c.at("name").get<std::string>();
      detail::read_opt(c, "parties", cc.parties);
      detail::read_opt(c, "silent_parties", cc.silent_parties);
      s.countries.push_back(cc);
    }
    s.start = parse_instant(j.at("start").get<std::string>());
    s.end = parse_instant(j.at("end").get<std::string>());
    if (j.contains("elections")) {
      for (const auto& [k, v] : j["elections"].items()) s.elections[k] = parse_date(v.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  }
  detail::read_opt(j, "rng_seed", s.rng_seed);
  detail::read_opt(j, "supporters_base", s.supporters_base);
  detail::read_opt(j, "supporters_per_vote_point", s.supporters_per_vote_point);
  detail::read_opt(j, "mean_messages", s.mean_messages);
  detail::read_opt(j, "cross_share", s.cross_share);
  detail::read_opt(j, "reply_share", s.reply_share);
  detail::read_opt(j, "retweet_share", s.retweet_share);
  return s;
}

}  // namespace echoscope
