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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support.hpp"

namespace echoscope {
namespace {

using ::echoscope::testing::make_pair;
using ::echoscope::testing::minus_point_four_fixture;

TEST(Fragmentation, MinusPointFourFixture) {
  const auto p = minus_point_four_fixture();
  const auto part = classify_nodes(p);
  const auto sums = edge_sums(p, part);
  EXPECT_EQ(sums.boundary_to_internal, 3u);
  EXPECT_EQ(sums.within_a, 4u);
  EXPECT_EQ(sums.within_b, 3u);
  const auto f = fragmentation_f(sums);
  ASSERT_TRUE(f.defined);
  EXPECT_DOUBLE_EQ(f.value, -0.4);
  EXPECT_DOUBLE_EQ(party_fragmentation_fp(sums, Side::a).value, -1.0 / 7.0);
  EXPECT_DOUBLE_EQ(party_fragmentation_fp(sums, Side::b).value, 0.0);
  EXPECT_DOUBLE_EQ(ei_index(p, part, Side::a).value, -0.6);
}

TEST(Fragmentation, BothDirectionsCountsInboundBoundaryEdges) {
  const auto p = make_pair({"sa", "sb", "a1", "x"}, {{"a1", "sa", 1}, {"x", "sa", 1}, {"x", "sb", 1}, {"a1", "x", 2}},
                           "sa", "sb");
  const auto part = classify_nodes(p);
  EXPECT_DOUBLE_EQ(fragmentation_f(p, part).value, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(fragmentation_f(p, part, BoundaryDirection::both).value, 3.0 / 5.0);
}

TEST(Fragmentation, Limits) {
  const auto no_boundary = make_pair({"sa", "sb", "a1", "b1"}, {{"a1", "sa", 3}, {"b1", "sb", 1}}, "sa", "sb");
  EXPECT_DOUBLE_EQ(score_pair(no_boundary).f.value, -1.0);

  const auto all_boundary = make_pair({"sa", "sb", "x"}, {{"x", "sa", 1}, {"x", "sb", 1}}, "sa", "sb");
  EXPECT_DOUBLE_EQ(score_pair(all_boundary).f.value, 1.0);

  const auto empty = make_pair({"sa", "sb"}, {{"sa", "sb", 2}}, "sa", "sb");
  const auto s = score_pair(empty);
  EXPECT_FALSE(s.f.defined);
  EXPECT_FALSE(s.fp_a.defined);
}

TEST(Fragmentation, MonotoneInBoundaryAndInternalWeight) {
  double previous = -2;
  for (std::uint64_t w = 1; w <= 20; ++w) {
    const auto p = make_pair({"sa", "sb", "a1", "x"}, {{"a1", "sa", 5}, {"x", "sa", w}, {"x", "sb", 1}}, "sa", "sb");
    const double f = score_pair(p).f.value;
    EXPECT_GT(f, previous);
    previous = f;
  }
  previous = 2;
  for (std::uint64_t w = 1; w <= 20; ++w) {
    const auto p = make_pair({"sa", "sb", "a1", "x"}, {{"a1", "sa", w}, {"x", "sa", 3}, {"x", "sb", 1}}, "sa", "sb");
    const double f = score_pair(p).f.value;
    EXPECT_LT(f, previous);
    previous = f;
  }
}

TEST(Fragmentation, MatchesBruteForceSums) {
  CounterRng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const auto p = testing::random_pair(rng, rng.below(40), rng.below(120));
    const auto part = classify_nodes(p);
    const auto oracle = testing::oracle_sums(p, part);
    const auto sums = edge_sums(p, part);
    ASSERT_EQ(sums.boundary_to_internal, oracle.boundary_to_internal);
    ASSERT_EQ(sums.within_a, oracle.within_a);
    ASSERT_EQ(sums.within_b, oracle.within_b);
    EXPECT_EQ(sums.cross_internal, 0u);

    const auto f = fragmentation_f(sums);
    const auto expected = testing::oracle_score(oracle.boundary_to_internal, oracle.within_a + oracle.within_b);
    ASSERT_EQ(f.defined, expected.has_value());
    if (f.defined) {
      EXPECT_EQ(f.value, *expected);
      EXPECT_GE(f.value, -1.0);
      EXPECT_LE(f.value, 1.0);
    }
    const auto fa = party_fragmentation_fp(sums, Side::a);
    const auto fb = party_fragmentation_fp(sums, Side::b);
    if (f.defined && fa.defined) EXPECT_GE(fa.value, f.value);
    if (f.defined && fb.defined) EXPECT_GE(fb.value, f.value);
  }
}

TEST(Fragmentation, ScaleInvariant) {
  CounterRng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto p = testing::random_pair(rng, 3 + rng.below(30), rng.below(80));
    const std::uint64_t c = 2 + rng.below(50);
    const auto base = score_pair(p);
    const auto scaled = score_pair(testing::scale_weights(p, c));
    ASSERT_EQ(base.f.defined, scaled.f.defined);
    if (base.f.defined) EXPECT_NEAR(base.f.value, scaled.f.value, 1e-15);
    if (base.fp_a.defined) EXPECT_NEAR(base.fp_a.value, scaled.fp_a.value, 1e-15);
  }
}

TEST(Fragmentation, UnweightedEqualsWeightedForUnitWeights) {
  CounterRng rng(6);
  for (int t = 0; t < 200; ++t) {
    auto p = testing::random_pair(rng, 3 + rng.below(30), rng.below(80), 1);
    // Repeated random edges merge into heavier ones; reset every tally to 1.
    std::vector<std::string> names(p.network.nodes().begin(), p.network.nodes().end());
    std::vector<Edge> edges(p.network.edges().begin(), p.network.edges().end());
    for (auto& e : edges) e.mention_count = 1, e.retweet_count = 0;
    p.network = InteractionNetwork::from_edges(names, std::move(edges));
    auto q = p;
    q.network = p.network.unweighted();
    const auto a = score_pair(p);
    const auto b = score_pair(q);
    EXPECT_EQ(a.f, b.f);
    EXPECT_EQ(a.fp_a, b.fp_a);
    EXPECT_EQ(a.fp_b, b.fp_b);
  }
}

TEST(Fragmentation, ExactForLargeSums) {
  const std::uint64_t big = std::uint64_t{1} << 53;
  const auto s = make_score(big + 1, big - 1);
  EXPECT_DOUBLE_EQ(s.value, 2.0 / static_cast<double>(2 * big));
}

TEST(ScorePair, NodeCounts) {
  const auto s = score_pair(minus_point_four_fixture());
  EXPECT_EQ(s.nodes, 8u);
  EXPECT_EQ(s.edges, 8u);
  EXPECT_EQ(s.nodes_a, 5u);
  EXPECT_EQ(s.nodes_b, 4u);
}

TEST(Describe, Examples) {
  const std::vector<double> two{-1.0, 1.0};
  const auto s = describe(two);
  EXPECT_EQ(s.n, 2u);
  EXPECT_DOUBLE_EQ(s.mean, 0.0);
  EXPECT_DOUBLE_EQ(s.min, -1.0);
  EXPECT_DOUBLE_EQ(s.max, 1.0);
  ASSERT_TRUE(s.sd.has_value());
  EXPECT_DOUBLE_EQ(*s.sd, std::sqrt(2.0));

  const std::vector<double> one{0.3};
  EXPECT_FALSE(describe(one).sd.has_value());
  EXPECT_THROW(describe(std::span<const double>{}), ValidationError);
}

TEST(Variants, RoundTripNames) {
  for (auto v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("weekly"), ConfigError);
}

}  // namespace
}  // namespace echoscope
