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

#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

namespace echoscope {
namespace {

PlantedPairSpec minus_point_four(NoiseMode noise = NoiseMode::deterministic, std::uint64_t scale = 1) {
  PlantedPairSpec s;
  s.n_a = 2;
  s.n_b = 1;
  s.w_internal_a = 4 * scale;
  s.w_internal_b = 3 * scale;
  s.n_boundary = 1;
  s.w_boundary = 3 * scale;
  s.noise = noise;
  return s;
}

std::string edge_csv(const InteractionNetwork& net) {
  std::ostringstream out;
  write_edge_csv(out, net);
  return out.str();
}

TEST(CounterRng, StreamsAndMoments) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  CounterRng s1 = a.split(1), s2 = a.split(2), s1b = b.split(1);
  EXPECT_NE(s1(), s2());
  EXPECT_EQ(s1.counter(), 1u);
  s1b();
  EXPECT_EQ(s1(), s1b());

  CounterRng rng(3);
  for (double mean : {0.5, 3.0, 29.0, 30.0, 250.0}) {
    double sum = 0, sq = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      sum += k;
      sq += k * k;
    }
    const double m = sum / n;
    EXPECT_NEAR(m, mean, 5 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(sq / n - m * m, mean, 0.05 * mean + 0.05) << mean;
  }
  double z = 0;
  for (int i = 0; i < 40000; ++i) z += rng.normal();
  EXPECT_NEAR(z / 40000, 0.0, 0.025);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(GeneratePair, MinusPointFourExact) {
  const auto planted = generate_pair(minus_point_four());
  const auto part = classify_nodes(planted.pair);
  EXPECT_EQ(part.assignment, planted.truth.assignment);
  const auto s = score_pair(planted.pair, part);
  EXPECT_EQ(s.f.b_e, 3u);
  EXPECT_EQ(s.f.i_e, 7u);
  EXPECT_EQ(s.f.value, -0.4);
}

TEST(GeneratePair, NoBoundaryWeightGivesMinusOne) {
  PlantedPairSpec s;
  s.n_a = 3;
  s.n_b = 2;
  s.w_internal_a = 10;
  s.w_internal_b = 4;
  const auto planted = generate_pair(s);
  EXPECT_EQ(score_pair(planted.pair).f.value, -1.0);
}

TEST(GeneratePair, InfeasibleSpecs) {
  PlantedPairSpec s = minus_point_four();
  s.n_boundary = 0;
  EXPECT_THROW(generate_pair(s), ValidationError);
  s = minus_point_four();
  s.w_internal_a = 1;
  EXPECT_THROW(generate_pair(s), ValidationError);
  s = minus_point_four();
  s.w_boundary = 1;
  EXPECT_THROW(generate_pair(s), ValidationError);
  EXPECT_THROW(generate_pair(PlantedPairSpec{}), ValidationError);
  s = minus_point_four();
  s.seed_b = s.seed_a;
  EXPECT_THROW(generate_pair(s), ValidationError);
}

TEST(GeneratePair, Reproducible) {
  auto s = minus_point_four(NoiseMode::poisson, 20);
  s.rng_seed = 99;
  const auto a = generate_pair(s);
  const auto b = generate_pair(s);
  EXPECT_EQ(edge_csv(a.pair.network), edge_csv(b.pair.network));
  s.rng_seed = 100;
  EXPECT_NE(edge_csv(generate_pair(s).pair.network), edge_csv(a.pair.network));
}

TEST(GeneratePair, PlantedTruthRecoveredOnRandomSpecs) {
  CounterRng rng(1234);
  for (int t = 0; t < 1000; ++t) {
    PlantedPairSpec s;
    s.n_a = rng.below(15);
    s.n_b = rng.below(15);
    s.n_boundary = rng.below(10);
    s.w_internal_a = s.n_a == 0 ? 0 : s.n_a + rng.below(40);
    s.w_internal_b = s.n_b == 0 ? 0 : s.n_b + rng.below(40);
    s.w_boundary = s.n_boundary == 0 ? 0 : 2 * s.n_boundary + rng.below(40);
    if (s.w_internal_a + s.w_internal_b + s.w_boundary == 0) continue;
    s.new_edge_share = rng.uniform();
    s.rng_seed = rng();
    const auto planted = generate_pair(s);
    validate(planted.pair);
    const auto part = classify_nodes(planted.pair);
    ASSERT_EQ(part.assignment, planted.truth.assignment) << "spec " << t;
    const auto sums = edge_sums(planted.pair, part);
    EXPECT_EQ(sums.boundary_to_internal, s.w_boundary);
    EXPECT_EQ(sums.within_a, s.w_internal_a);
    EXPECT_EQ(sums.within_b, s.w_internal_b);
    EXPECT_EQ(sums.internal_to_boundary, 0u);
  }
}

TEST(GeneratePair, PoissonMeanNearTarget) {
  // Ten-fold weights keep the surplus draws from being dominated by the
  // fixed one-per-node edges.
  auto s = minus_point_four(NoiseMode::poisson, 10);
  s.n_a = 4;
  s.n_b = 3;
  s.n_boundary = 2;
  double total = 0;
  for (int i = 0; i < 200; ++i) {
    s.rng_seed = 5000 + i;
    total += score_pair(generate_pair(s).pair).f.value;
  }
  EXPECT_NEAR(total / 200, -0.4, 0.02);
}

TEST(GeneratePair, RecordsRebuildTheNetwork) {
  auto s = minus_point_four(NoiseMode::deterministic, 15);
  s.n_a = 6;
  s.n_boundary = 3;
  const auto planted = generate_pair(s);
  const auto records = to_records(planted.pair.network, parse_instant("2014-05-01T00:00:00Z"));
  const auto net = build_network(records);
  EXPECT_EQ(edge_csv(net), edge_csv(planted.pair.network));
  const auto pair = pair_subnetwork(net, records, s.seed_a, s.seed_b);
  EXPECT_EQ(edge_csv(pair.network), edge_csv(planted.pair.network));
  for (NodeId v = 0; v < pair.network.node_count(); ++v) {
    EXPECT_EQ(pair.direct[v].seed_a, planted.pair.direct[v].seed_a);
    EXPECT_EQ(pair.direct[v].seed_b, planted.pair.direct[v].seed_b);
  }
  EXPECT_EQ(score_pair(pair).f, score_pair(planted.pair).f);
}

TEST(Study, CovariateMomentsMatchTargets) {
  CounterRng rng(77);
  double ext = 0, ext2 = 0, dist = 0, dist2 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto d = draw_ideologies(rng);
    const double e = std::fabs(d.ideology_a - 5) + std::fabs(d.ideology_b - 5);
    const double g = std::fabs(d.ideology_a - d.ideology_b);
    ext += e;
    ext2 += e * e;
    dist += g;
    dist2 += g * g;
  }
  EXPECT_NEAR(ext / n, kExtremismSumMean, 0.1);
  EXPECT_NEAR(dist / n, kDistanceMean, 0.1);
  EXPECT_NEAR(std::sqrt(ext2 / n - (ext / n) * (ext / n)), kExtremismSumSd, 0.15);
  EXPECT_NEAR(std::sqrt(dist2 / n - (dist / n) * (dist / n)), kDistanceSd, 0.15);
}

TEST(Study, MeasuredScoresTrackComposedScores) {
  StudySpec spec;
  spec.beta = {{"extremism_sum", -0.22}, {"size_difference", 0.1}};
  spec.sigma_u = 0.7;
  spec.sigma_e = 0.6;
  spec.rng_seed = 3;
  spec.keep_networks = true;
  const auto study = generate_study(spec);
  ASSERT_EQ(study.observations.size(), 161u);
  ASSERT_EQ(study.networks.size(), 161u);
  for (std::size_t i = 0; i < study.observations.size(); ++i) {
    const auto& s = study.observations[i].scores.at(Variant::all);
    ASSERT_TRUE(s.f.defined);
    EXPECT_LE(std::fabs(s.f.value - study.composed_f[i]), 0.01);
    EXPECT_EQ(s.f.b_e + s.f.i_e, spec.pair_weight);
    EXPECT_EQ(classify_nodes(study.networks[i].pair).assignment, study.networks[i].truth.assignment);
  }
  const auto again = generate_study(spec);
  for (std::size_t i = 0; i < study.observations.size(); ++i) {
    EXPECT_EQ(again.observations[i].scores.at(Variant::all).f, study.observations[i].scores.at(Variant::all).f);
    EXPECT_EQ(again.observations[i].covariates, study.observations[i].covariates);
  }
}

TEST(Study, NullModelCalibration) {
  // One predictor, so the 5% level applies to a single test per run.
  const ModelSpec null_spec{"null", ModelLevel::pair, Variant::all, {"extremism_sum"}, 0};
  int clean = 0;
  for (int r = 0; r < 100; ++r) {
    StudySpec spec;
    spec.sigma_u = 0;
    spec.sigma_e = 1;
    spec.rng_seed = 9000 + r;
    const auto study = generate_study(spec);
    const auto fit = fit_model(study.observations, null_spec);
    clean += fit.coefficient("extremism_sum").p >= 0.05;
  }
  EXPECT_GE(clean, 90);
}

TEST(Study, Errors) {
  StudySpec spec;
  spec.countries = 0;
  EXPECT_THROW(generate_study(spec), ValidationError);
  spec = StudySpec{};
  spec.beta = {{"shoe_size", 1.0}};
  EXPECT_THROW(generate_study(spec), ValidationError);
  spec = StudySpec{};
  spec.f_scale = 50;
  spec.max_resamples = 3;
  EXPECT_THROW(generate_study(spec), ValidationError);
}

TEST(Specs, ParseJson) {
  const auto p = parse_pair_spec(nlohmann::json::parse(
      R"({"n_a": 2, "n_b": 1, "w_internal_a": 4, "w_internal_b": 3, "n_boundary": 1, "w_boundary": 3,
          "noise": "poisson", "rng_seed": 8})"));
  EXPECT_EQ(p.w_boundary, 3u);
  EXPECT_EQ(p.noise, NoiseMode::poisson);
  EXPECT_EQ(p.rng_seed, 8u);
  EXPECT_THROW(parse_pair_spec(nlohmann::json::parse(R"({"n_a": 1, "w_internal_a": 1, "colour": 1})")), ConfigError);
  EXPECT_THROW(parse_pair_spec(nlohmann::json::parse(R"({"n_a": 1, "w_internal_a": 1, "noise": "gauss"})")),
               ConfigError);
  EXPECT_THROW(parse_pair_spec(nlohmann::json::parse(R"({"w_boundary": 3})")), ValidationError);

  const auto st = parse_study_spec(nlohmann::json::parse(R"({"beta": {"extremism_sum": -0.22}, "sigma_u": 0.7})"));
  EXPECT_EQ(st.beta.at("extremism_sum"), -0.22);
  EXPECT_EQ(st.countries, 23u);
  EXPECT_THROW(parse_study_spec(nlohmann::json::parse(R"({"sigma_u": "big"})")), ConfigError);

  const auto c = parse_corpus_spec(nlohmann::json::parse(
      R"({"countries": [{"name": "aa", "parties": 3}], "start": "2014-05-01T00:00:00Z",
          "end": "2014-05-10T00:00:00Z", "elections": {"aa": "2014-05-05"}, "rng_seed": 4})"));
  ASSERT_EQ(c.countries.size(), 1u);
  EXPECT_EQ(c.countries[0].parties, 3u);
  EXPECT_THROW(parse_corpus_spec(nlohmann::json::parse(R"({"countries": []})")), ConfigError);
}

TEST(Corpus, GeneratedRecordsAreConsistent) {
  auto spec = parse_corpus_spec(nlohmann::json::parse(
      R"({"countries": [{"name": "aa", "parties": 3}, {"name": "bb", "parties": 2, "silent_parties": 1}],
          "start": "2014-05-01T00:00:00Z", "end": "2014-05-10T00:00:00Z", "rng_seed": 4})"));
  const auto corpus = generate_corpus(spec);
  EXPECT_EQ(corpus.registry.size(), 6u);
  ASSERT_FALSE(corpus.records.empty());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    if (i > 0) EXPECT_LE(corpus.records[i - 1].timestamp, r.timestamp);
    EXPECT_GE(r.timestamp, spec.start);
    EXPECT_LT(r.timestamp, spec.end);
    EXPECT_EQ(parse_record(serialize_record(r)), r);
  }
  const auto again = generate_corpus(spec);
  ASSERT_EQ(again.records.size(), corpus.records.size());
  EXPECT_EQ(again.records.back(), corpus.records.back());
}

}  // namespace
}  // namespace echoscope
