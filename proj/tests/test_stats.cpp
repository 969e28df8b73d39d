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

#include <gtest/gtest.h>

#include "support.hpp"

namespace echoscope {
namespace {

std::vector<std::string> balanced_groups(int g, int m) {
  std::vector<std::string> out;
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < m; ++i) out.push_back("g" + std::to_string(j));
  }
  return out;
}

Eigen::MatrixXd random_design(CounterRng& rng, int n, int k) {
  Eigen::MatrixXd x(n, k + 1);
  x.col(0).setOnes();
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= k; ++j) x(i, j) = rng.normal();
  }
  return x;
}

std::vector<std::string> coef_names(int k) {
  std::vector<std::string> out{"(Intercept)"};
  for (int j = 1; j <= k; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

/// y = X beta + u_group + e.
Eigen::VectorXd simulate(CounterRng& rng, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                         const std::vector<std::string>& groups, double sd_u, double sd_e) {
  std::map<std::string, double> u;
  for (const auto& g : groups) u.emplace(g, 0.0);
  for (auto& [g, v] : u) v = sd_u * rng.normal();
  Eigen::VectorXd y = x * beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += u[groups[i]] + sd_e * rng.normal();
  return y;
}

TEST(Standardize, Examples) {
  ModelDataset ds(balanced_groups(1, 3));
  ds.add_numeric("x", {1, 2, 3});
  ds.add_dummy("d", {0, 1, 1});
  standardize(ds);
  EXPECT_EQ(ds.column("x"), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(ds.column("d"), (std::vector<double>{0, 1, 1}));
  const auto before = ds.column("x");
  standardize(ds);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ds.column("x")[i], before[i], 1e-12);

  ModelDataset flat(balanced_groups(1, 3));
  flat.add_numeric("const_col", {2, 2, 2});
  try {
    standardize(flat);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("const_col"), std::string::npos);
  }
  EXPECT_THROW(ds.add_dummy("bad", {0, 2, 1}), ValidationError);
}

TEST(CubeTransform, Examples) {
  ModelDataset ds(balanced_groups(1, 3));
  ds.add_numeric("y", {-1, 0, 2});
  cube_transform(ds, "y");
  EXPECT_EQ(ds.column("y"), (std::vector<double>{-1, 0, 8}));
  standardize(ds);
  EXPECT_NEAR(sample_mean(ds.column("y")), 0.0, 1e-15);
  EXPECT_NEAR(sample_sd(ds.column("y")), 1.0, 1e-15);
}

TEST(RandomIntercept, MatchesOlsWithoutGroupVariance) {
  CounterRng rng(11);
  for (int t = 0; t < 20; ++t) {
    const int g = 6, m = 10, k = 3;
    const auto groups = balanced_groups(g, m);
    const Eigen::MatrixXd x = random_design(rng, g * m, k);
    // Residual orthogonal to both X and the group indicators: the REML
    // variance ratio is then 0 and the model reduces to OLS.
    Eigen::MatrixXd xz(g * m, k + 1 + g);
    xz << x, Eigen::MatrixXd::Zero(g * m, g);
    for (int i = 0; i < g * m; ++i) xz(i, k + 1 + i / m) = 1;
    Eigen::VectorXd e(g * m);
    for (int i = 0; i < g * m; ++i) e(i) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(xz);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g * m, k + g);
    e -= q * (q.transpose() * e);
    Eigen::VectorXd beta(k + 1);
    beta << 0.5, -0.22, 1.0, 0.0;
    const Eigen::VectorXd y = x * beta + e;

    const auto fit = fit_random_intercept(x, y, groups, coef_names(k));
    const auto o = testing::ols(x, y);
    EXPECT_EQ(fit.lambda, 0.0);
    EXPECT_EQ(fit.sigma2_u, 0.0);
    for (int j = 0; j <= k; ++j) {
      EXPECT_NEAR(fit.coefficients[j].estimate, o.beta(j), 1e-6 * std::max(1.0, std::fabs(o.beta(j))));
      EXPECT_NEAR(fit.coefficients[j].se / o.se(j), 1.0, 1e-6);
    }
    EXPECT_NEAR(fit.sigma2_e / o.sigma2, 1.0, 1e-6);
    EXPECT_EQ(fit.r2_marginal, fit.r2_conditional);
  }
}

TEST(RandomIntercept, MatchesAnovaOnBalancedDesign) {
  CounterRng rng(12);
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    const int g = 5 + static_cast<int>(rng.below(20));
    const int m = 2 + static_cast<int>(rng.below(8));
    const auto groups = balanced_groups(g, m);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(g * m, 1);
    const Eigen::VectorXd y = simulate(rng, x, Eigen::VectorXd::Constant(1, 2.0), groups, 1.5, 1.0);
    std::vector<std::vector<double>> cells(g);
    for (int i = 0; i < g * m; ++i) cells[i / m].push_back(y(i));
    const auto anova = testing::anova_components(cells);
    if (anova.sigma2_u <= 0) continue;  // REML sits on the boundary there
    ++checked;
    const auto fit = fit_random_intercept(x, y, groups, coef_names(0));
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.sigma2_e / anova.sigma2_e, 1.0, 1e-6);
    EXPECT_NEAR(fit.sigma2_u / anova.sigma2_u, 1.0, 1e-6);
  }
  EXPECT_GE(checked, 25);
}

TEST(RandomIntercept, OptimumBeatsCoarseGrid) {
  CounterRng rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto groups = balanced_groups(12, 6);
    const Eigen::MatrixXd x = random_design(rng, 72, 2);
    Eigen::VectorXd beta(3);
    beta << 0.1, 0.3, -0.4;
    const Eigen::VectorXd y = simulate(rng, x, beta, groups, rng.uniform() * 2, 1.0);
    const auto fit = fit_random_intercept(x, y, groups, coef_names(2));
    std::vector<int> codes;
    const int ng = detail::encode_groups(groups, codes);
    const RemlProfile profile(x, y, codes, ng);
    const double at_fit = profile.evaluate(fit.lambda).criterion;
    EXPECT_NEAR(at_fit, fit.reml_criterion, 1e-12 * std::fabs(at_fit) + 1e-12);
    for (int i = 0; i < 64; ++i) {
      const double lambda = i == 0 ? 0.0 : std::pow(10.0, -4.0 + 7.0 * (i - 1) / 62.0);
      EXPECT_LE(at_fit, profile.evaluate(lambda).criterion + 1e-9);
    }
    EXPECT_LE(fit.r2_marginal, fit.r2_conditional);
  }
}

TEST(RandomIntercept, InvariantToRowOrderAndGroupLabels) {
  CounterRng rng(14);
  const int n = 80;
  auto groups = balanced_groups(10, 8);
  const Eigen::MatrixXd x = random_design(rng, n, 2);
  Eigen::VectorXd beta(3);
  beta << 0, 1, -1;
  const Eigen::VectorXd y = simulate(rng, x, beta, groups, 1.0, 1.0);
  const auto base = fit_random_intercept(x, y, groups, coef_names(2));

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span(perm));
  Eigen::MatrixXd xp(n, 3);
  Eigen::VectorXd yp(n);
  std::vector<std::string> gp(n);
  for (int i = 0; i < n; ++i) {
    xp.row(i) = x.row(perm[i]);
    yp(i) = y(perm[i]);
    gp[i] = "country_" + std::string(1, static_cast<char>('z' - groups[perm[i]].back() + '0'));
  }
  const auto moved = fit_random_intercept(xp, yp, gp, coef_names(2));
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(moved.coefficients[j].estimate, base.coefficients[j].estimate, 1e-8);
    EXPECT_NEAR(moved.coefficients[j].se, base.coefficients[j].se, 1e-8);
  }
  // Variance components agree to the optimizer's relative tolerance.
  EXPECT_NEAR(moved.sigma2_u / base.sigma2_u, 1.0, 1e-7);
  EXPECT_NEAR(moved.sigma2_e / base.sigma2_e, 1.0, 1e-7);
}

TEST(RandomIntercept, DoublingResponseChangesNothingAfterStandardizing) {
  CounterRng rng(15);
  const auto groups = balanced_groups(9, 7);
  const Eigen::MatrixXd x = random_design(rng, 63, 1);
  Eigen::VectorXd beta(2);
  beta << 3, 2;
  const Eigen::VectorXd y = simulate(rng, x, beta, groups, 1.0, 1.0);
  auto fit_scaled = [&](double c) {
    ModelDataset ds(groups);
    ds.add_numeric("F", std::vector<double>((c * y).begin(), (c * y).end()));
    ds.add_numeric("x1", std::vector<double>(x.col(1).begin(), x.col(1).end()));
    standardize(ds);
    const std::vector<std::string> preds{"x1"};
    return fit_random_intercept(ds, "F", preds);
  };
  const auto a = fit_scaled(1);
  const auto b = fit_scaled(2);
  EXPECT_NEAR(a.coefficient("x1").estimate, b.coefficient("x1").estimate, 1e-10);
  EXPECT_NEAR(a.sigma2_u, b.sigma2_u, 1e-10);
  EXPECT_NEAR(a.sigma2_e, b.sigma2_e, 1e-10);
  EXPECT_NEAR(a.r2_marginal, b.r2_marginal, 1e-10);
  EXPECT_NEAR(a.r2_conditional, b.r2_conditional, 1e-10);
}

TEST(RandomIntercept, Errors) {
  CounterRng rng(16);
  const auto groups = balanced_groups(4, 5);
  Eigen::MatrixXd x = random_design(rng, 20, 2);
  x.col(2) = 2 * x.col(1);
  const Eigen::VectorXd y = simulate(rng, random_design(rng, 20, 0), Eigen::VectorXd::Zero(1), groups, 1, 1);
  try {
    fit_random_intercept(x, y, groups, std::vector<std::string>{"(Intercept)", "alpha", "beta"});
    FAIL();
  } catch (const ModelError& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("alpha") != std::string::npos || msg.find("beta") != std::string::npos) << msg;
  }
  const std::vector<std::string> one_group(20, "uk");
  EXPECT_THROW(fit_random_intercept(random_design(rng, 20, 1), y, one_group, coef_names(1)), ModelError);
  EXPECT_THROW(fit_random_intercept(random_design(rng, 20, 18), y, groups, coef_names(18)), ModelError);
}

TEST(RSquared, Identities) {
  const auto r = nakagawa_r2(1, 1, 2);
  EXPECT_EQ(r.marginal, 0.25);
  EXPECT_EQ(r.conditional, 0.5);
  const auto z = nakagawa_r2(0.7, 0, 1.3);
  EXPECT_EQ(z.marginal, z.conditional);
  EXPECT_THROW(nakagawa_r2(0, 0, 0), ModelError);

  CounterRng rng(17);
  const auto groups = balanced_groups(8, 6);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(48, 1);
  const auto fit = fit_random_intercept(x, simulate(rng, x, Eigen::VectorXd::Ones(1), groups, 1, 1), groups,
                                        coef_names(0));
  EXPECT_EQ(fit.r2_marginal, 0.0);
  EXPECT_LE(fit.r2_marginal, fit.r2_conditional);
}

TEST(RSquared, GapVanishesWithoutGroupVariance) {
  CounterRng rng(18);
  double gap = 0;
  for (int t = 0; t < 50; ++t) {
    const auto groups = balanced_groups(20, 20);
    const Eigen::MatrixXd x = random_design(rng, 400, 1);
    Eigen::VectorXd beta(2);
    beta << 0, 1;
    const auto fit = fit_random_intercept(x, simulate(rng, x, beta, groups, 0.0, 1.0), groups, coef_names(1));
    gap += fit.r2_conditional - fit.r2_marginal;
  }
  EXPECT_LT(gap / 50, 0.01);
}

TEST(ModelGrid, Cells) {
  const auto m22 = model_spec("2.2");
  EXPECT_EQ(m22.predictors, (std::vector<std::string>{"extremism_sum", "left_right_mismatch", "size_difference",
                                                      "io_pair", "oo_pair", "tweet_ratio"}));
  EXPECT_EQ(m22.variant, Variant::all);
  EXPECT_EQ(m22.min_nodes, 0u);

  const auto m13 = model_spec("1.3");
  const auto m12 = model_spec("1.2");
  EXPECT_EQ(m13.predictors, m12.predictors);
  EXPECT_EQ(m13.predictors.front(), "ideological_distance");
  EXPECT_EQ(m13.min_nodes, 1000u);

  const auto m45 = model_spec("4.5");
  EXPECT_EQ(m45.predictors, m22.predictors);
  EXPECT_EQ(m45.variant, Variant::unweighted);

  EXPECT_EQ(model_spec("3.2").level, ModelLevel::party);
  EXPECT_EQ(model_spec("3.2").min_nodes, 100u);
  EXPECT_EQ(model_grid().size(), 13u);
  EXPECT_THROW(model_spec("9.9"), ConfigError);
  for (const auto& s : model_grid()) {
    const bool has_dist = std::count(s.predictors.begin(), s.predictors.end(), "ideological_distance") > 0;
    const bool has_ext = std::count(s.predictors.begin(), s.predictors.end(), "extremism_sum") > 0;
    EXPECT_FALSE(has_dist && has_ext) << s.id;
  }
}

PairObservation observation(CounterRng& rng, const std::string& country, int index) {
  PairObservation o;
  o.country = country;
  o.party_a.id = country + "_a" + std::to_string(index);
  o.party_b.id = country + "_b" + std::to_string(index);
  o.party_a.country = o.party_b.country = country;
  o.party_a.ideology = rng.uniform() * 10;
  o.party_b.ideology = rng.uniform() * 10;
  o.party_a.vote_share = rng.uniform() * 40;
  o.party_b.vote_share = rng.uniform() * 40;
  o.party_a.incumbent = rng.bernoulli(0.5);
  o.party_b.incumbent = rng.bernoulli(0.5);
  o.party_a.handle = o.party_a.id;
  o.party_b.handle = o.party_b.id;
  o.tweet_count_a = 1 + rng.below(100);
  o.tweet_count_b = 1 + rng.below(100);
  o.covariates = pair_covariates(o.party_a, o.party_b, o.tweet_count_a, o.tweet_count_b);
  VariantScores s;
  s.f = make_score(rng.below(100), 1 + rng.below(100));
  s.fp_a = make_score(rng.below(100), 1 + rng.below(100));
  s.fp_b = make_score(rng.below(100), 1 + rng.below(100));
  s.nodes = 500 + rng.below(1000);
  s.nodes_a = 50 + rng.below(100);
  s.nodes_b = 50 + rng.below(100);
  o.scores[Variant::all] = s;
  return o;
}

TEST(ModelDataset, FiltersAndStandardizes) {
  CounterRng rng(19);
  std::vector<PairObservation> obs;
  for (int c = 0; c < 6; ++c) {
    for (int i = 0; i < 8; ++i) obs.push_back(observation(rng, "c" + std::to_string(c), i));
  }
  obs[0].scores[Variant::all].f = make_score(0, 0);
  obs[1].covariates.tweet_ratio.reset();

  std::size_t big = 0;
  for (std::size_t i = 2; i < obs.size(); ++i) big += obs[i].scores[Variant::all].nodes >= 1000;
  const auto ds13 = make_dataset(obs, model_spec("1.3"));
  EXPECT_EQ(ds13.rows(), big);

  const auto ds11 = make_dataset(obs, model_spec("1.1"));
  EXPECT_EQ(ds11.rows(), obs.size() - 1);
  const auto ds = make_dataset(obs, model_spec("2.2"));
  EXPECT_EQ(ds.rows(), obs.size() - 2);
  for (const auto& col : ds.numeric_columns()) {
    EXPECT_NEAR(sample_mean(ds.column(col)), 0.0, 1e-12) << col;
    EXPECT_NEAR(sample_sd(ds.column(col)), 1.0, 1e-12) << col;
  }
  EXPECT_TRUE(ds.is_dummy("io_pair"));

  const auto party = make_dataset(obs, model_spec("3.1"));
  EXPECT_EQ(party.rows(), 2 * obs.size());
  EXPECT_THROW(make_dataset(obs, model_spec("4.1")), ConfigError);
}

TEST(ModelDataset, ScalingEdgeWeightsLeavesCoefficients) {
  CounterRng rng(20);
  std::vector<PairObservation> obs;
  for (int c = 0; c < 8; ++c) {
    for (int i = 0; i < 7; ++i) obs.push_back(observation(rng, "c" + std::to_string(c), i));
  }
  auto scaled = obs;
  for (auto& o : scaled) {
    auto& s = o.scores[Variant::all];
    s.f = make_score(7 * s.f.b_e, 7 * s.f.i_e);
  }
  const auto a = fit_model(obs, model_spec("2.2"));
  const auto b = fit_model(scaled, model_spec("2.2"));
  for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
    EXPECT_NEAR(a.coefficients[j].estimate, b.coefficients[j].estimate, 1e-10);
  }
}

TEST(ModelSuite, TableAndJson) {
  CounterRng rng(21);
  std::vector<PairObservation> obs;
  for (int c = 0; c < 8; ++c) {
    for (int i = 0; i < 7; ++i) obs.push_back(observation(rng, "c" + std::to_string(c), i));
  }
  const std::vector<std::string> ids{"1.1", "2.2", "3.1"};
  const auto suite = model_suite(obs, ids);
  ASSERT_EQ(suite.size(), 3u);
  for (const auto& e : suite) {
    ASSERT_TRUE(e.fit.has_value()) << e.error;
    EXPECT_EQ(e.fit->p_value_method, "Wald-z");
    EXPECT_LE(e.fit->r2_marginal, e.fit->r2_conditional);
  }
  const auto table = format_model_table(suite);
  EXPECT_NE(table.find("Extremism"), std::string::npos);
  EXPECT_NE(table.find("Left-Right Pair"), std::string::npos);
  const auto j = to_json(*suite[1].fit);
  EXPECT_EQ(j["p_value_method"], "Wald-z");
  EXPECT_EQ(significance_stars(0.0001), "***");
  EXPECT_EQ(significance_stars(0.2), "");
}

}  // namespace
}  // namespace echoscope
