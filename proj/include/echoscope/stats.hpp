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
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "echoscope/error.hpp"

namespace echoscope {

/// Column store for one model's estimation sample.
///
/// Numeric columns are standardized by `standardize`; dummy columns must be
/// 0/1 and are never rescaled. Every row belongs to exactly one group.
class ModelDataset {
 public:
  ModelDataset() = default;
  explicit ModelDataset(std::vector<std::string> groups) : groups_(std::move(groups)) {}

  std::size_t rows() const { return groups_.size(); }
  const std::vector<std::string>& groups() const { return groups_; }

  void add_numeric(std::string name, std::vector<double> values) { add(std::move(name), std::move(values), false); }

  void add_dummy(std::string name, std::vector<double> values) {
    for (double v : values) {
      if (v != 0.0 && v != 1.0) throw ValidationError("dummy column '" + name + "' must be 0/1");
    }
    add(std::move(name), std::move(values), true);
  }

  bool has(std::string_view name) const { return find(name) != nullptr; }
  bool is_dummy(std::string_view name) const { return get(name).dummy; }
  const std::vector<double>& column(std::string_view name) const { return get(name).values; }
  std::vector<double>& column(std::string_view name) { return const_cast<Column&>(get(name)).values; }

  std::vector<std::string> numeric_columns() const {
    std::vector<std::string> out;
    for (const auto& c : cols_) {
      if (!c.dummy) out.push_back(c.name);
    }
    return out;
  }

  /// Free-form provenance: filters applied, transformations, exclusions.
  std::vector<std::string> notes;

 private:
  struct Column {
    std::string name;
    std::vector<double> values;
    bool dummy = false;
  };

  void add(std::string name, std::vector<double> values, bool dummy) {
    if (values.size() != rows()) {
      throw ValidationError("column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                            std::to_string(rows()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("column '" + name + "' has a missing or non-finite value");
    }
    if (has(name)) throw ValidationError("duplicate column '" + name + "'");
    cols_.push_back({std::move(name), std::move(values), dummy});
  }

  const Column* find(std::string_view name) const {
    for (const auto& c : cols_) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  const Column& get(std::string_view name) const {
    if (auto* c = find(name)) return *c;
    throw ValidationError("unknown column '" + std::string(name) + "'");
  }

  std::vector<std::string> groups_;
  std::vector<Column> cols_;
};

inline double sample_mean(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0;
  const double m = sample_mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// x <- (x - mean) / sd with sample statistics. Dummy columns are skipped.
inline void standardize(ModelDataset& ds, std::span<const std::string> columns) {
  for (const auto& name : columns) {
    if (ds.is_dummy(name)) continue;
    auto& x = ds.column(name);
    const double m = sample_mean(x);
    const double sd = sample_sd(x);
    if (!(sd > 0) || sd <= 1e-12 * std::max(1.0, std::fabs(m))) {
      throw ValidationError("column '" + name + "' has zero variance and cannot be standardized");
    }
    for (double& v : x) v = (v - m) / sd;
  }
}

inline void standardize(ModelDataset& ds) {
  auto cols = ds.numeric_columns();
  standardize(ds, cols);
}

/// x <- x^3; apply before standardizing.
inline void cube_transform(ModelDataset& ds, std::string_view column) {
  for (double& v : ds.column(column)) v = v * v * v;
}

// ---------------------------------------------------------------------------
// Random-intercept linear mixed model
// ---------------------------------------------------------------------------

struct Coefficient {
  std::string name;
  double estimate = 0;
  double se = 0;
  double z = 0;
  double p = 1;
};

struct ModelFit {
  std::string id;
  std::string response;
  std::vector<Coefficient> coefficients;  // "(Intercept)" first
  double sigma2_u = 0;
  double sigma2_e = 0;
  /// sigma2_u / sigma2_e at the optimum.
  double lambda = 0;
  double r2_marginal = 0;
  double r2_conditional = 0;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  bool converged = false;
  std::size_t evaluations = 0;
  /// REML deviance (-2 log restricted likelihood) at the optimum.
  double reml_criterion = 0;
  std::string p_value_method = "Wald-z";
  std::vector<std::string> notes;

  const Coefficient& coefficient(std::string_view name) const {
    for (const auto& c : coefficients) {
      if (c.name == name) return c;
    }
    throw ValidationError("model has no coefficient '" + std::string(name) + "'");
  }
};

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Two-sided normal tail probability, clamped away from zero.
inline double wald_p_value(double z) {
  const double p = std::erfc(std::fabs(z) / std::numbers::sqrt2);
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

/// Fixed-effect design with intercept, integer group codes and per-group
/// sufficient statistics for the profiled REML criterion.
class RemlProfile {
 public:
  struct Evaluation {
    double criterion = 0;
    double sigma2_e = 0;
    Eigen::VectorXd beta;
    Eigen::MatrixXd xtvx;  // X' V^-1 X with V = I + lambda Z Z'
  };

  RemlProfile(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<int> group, int n_groups)
      : x_(std::move(x)), y_(std::move(y)), group_(std::move(group)), n_groups_(n_groups) {
    const auto p = x_.cols();
    xtx_ = x_.transpose() * x_;
    xty_ = x_.transpose() * y_;
    yty_ = y_.squaredNorm();
    size_.assign(n_groups_, 0);
    xsum_ = Eigen::MatrixXd::Zero(p, n_groups_);
    ysum_ = Eigen::VectorXd::Zero(n_groups_);
    for (Eigen::Index i = 0; i < x_.rows(); ++i) {
      const int g = group_[i];
      ++size_[g];
      xsum_.col(g) += x_.row(i).transpose();
      ysum_(g) += y_(i);
    }
  }

  std::size_t n_obs() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t n_coef() const { return static_cast<std::size_t>(x_.cols()); }
  const Eigen::MatrixXd& x() const { return x_; }

  /// Profiled REML deviance at variance ratio lambda = sigma2_u / sigma2_e.
  Evaluation evaluate(double lambda) const {
    const auto n = static_cast<double>(x_.rows());
    const auto p = static_cast<double>(x_.cols());
    Evaluation ev;
    Eigen::MatrixXd a = xtx_;
    Eigen::VectorXd b = xty_;
    double q = yty_;
    double log_det_v = 0;
    for (int g = 0; g < n_groups_; ++g) {
      const double ng = static_cast<double>(size_[g]);
      const double c = lambda / (1.0 + lambda * ng);
      log_det_v += std::log1p(lambda * ng);
      a.noalias() -= c * xsum_.col(g) * xsum_.col(g).transpose();
      b -= c * ysum_(g) * xsum_.col(g);
      q -= c * ysum_(g) * ysum_(g);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw ModelError("X' V^-1 X is not positive definite");
    ev.beta = llt.solve(b);
    double log_det_a = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) log_det_a += 2.0 * std::log(llt.matrixL()(i, i));
    const double rss = std::max(q - b.dot(ev.beta), std::numeric_limits<double>::min());
    ev.sigma2_e = rss / (n - p);
    ev.criterion = log_det_v + log_det_a + (n - p) * (1.0 + std::log(2.0 * std::numbers::pi * ev.sigma2_e));
    ev.xtvx = std::move(a);
    return ev;
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<int> group_;
  int n_groups_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  double yty_ = 0;
  std::vector<std::size_t> size_;
  Eigen::MatrixXd xsum_;
  Eigen::VectorXd ysum_;
};

struct MinimizeResult {
  double x = 0;
  double fx = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Brent's bounded minimization (golden section with parabolic steps) on [lo, hi].
template <class F>
MinimizeResult brent_minimize(F&& f, double lo, double hi, double rel_tol, std::size_t max_evals) {
  constexpr double golden = 0.3819660112501051;  // (3 - sqrt 5) / 2
  constexpr double abs_tol = 1e-14;
  MinimizeResult r;
  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  r.evaluations = 1;
  double fw = fx, fv = fx;
  double d = 0, e = 0;
  for (;;) {
    const double m = 0.5 * (a + b);
    const double tol1 = rel_tol * std::fabs(x) + abs_tol;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) {
      r.converged = true;
      break;
    }
    if (r.evaluations >= max_evals) break;
    bool golden_step = true;
    if (std::fabs(e) > tol1) {
      double rr = (x - w) * (fx - fv);
      double qq = (x - v) * (fx - fw);
      double pp = (x - v) * qq - (x - w) * rr;
      qq = 2.0 * (qq - rr);
      if (qq > 0) pp = -pp;
      qq = std::fabs(qq);
      const double etemp = e;
      e = d;
      if (std::fabs(pp) < std::fabs(0.5 * qq * etemp) && pp > qq * (a - x) && pp < qq * (b - x)) {
        d = pp / qq;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= m) ? a - x : b - x;
      d = golden * e;
    }
    const double u = std::fabs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    ++r.evaluations;
    if (fu <= fx) {
      (u >= x ? a : b) = x;
      v = w, fv = fw;
      w = x, fw = fx;
      x = u, fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w, fv = fw;
        w = u, fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u, fv = fu;
      }
    }
  }
  r.x = x;
  r.fx = fx;
  return r;
}

struct FitOptions {
  /// Relative tolerance on the optimized variance parameter.
  double rel_tol = 1e-8;
  /// Criterion evaluations allowed, including the bracketing grid.
  std::size_t max_evaluations = 200;
  /// Relative pivot threshold for the rank check.
  double rank_tol = 1e-10;
};

namespace detail {

inline constexpr double kRhoMax = 1.0 - 1e-10;
inline double rho_to_lambda(double rho) { return rho / (1.0 - rho); }

inline int encode_groups(std::span<const std::string> labels, std::vector<int>& codes) {
  std::map<std::string, int> ids;
  for (const auto& g : labels) ids.emplace(g, 0);
  int k = 0;
  for (auto& [label, id] : ids) id = k++;
  codes.clear();
  for (const auto& g : labels) codes.push_back(ids.at(g));
  return k;
}

inline void check_rank(const Eigen::MatrixXd& x, std::span<const std::string> names, double tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(tol);
  const auto rank = qr.rank();
  if (rank == x.cols()) return;
  std::string cols;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = rank; i < x.cols(); ++i) {
    if (!cols.empty()) cols += ", ";
    cols += names[perm(i)];
  }
  throw ModelError("design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                   std::to_string(x.cols()) + "); collinear columns: " + cols);
}

}  // namespace detail

/// Variance shares of a fitted random-intercept model.
struct RSquared {
  double marginal = 0;
  double conditional = 0;
};

inline RSquared nakagawa_r2(double var_fixed, double sigma2_u, double sigma2_e) {
  const double total = var_fixed + sigma2_u + sigma2_e;
  if (!(total > 0)) throw ModelError("R2 undefined: all variance components are zero");
  return {var_fixed / total, (var_fixed + sigma2_u) / total};
}

/// Population variance of the fixed-effect predictions X beta.
inline double fixed_effect_variance(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
  // Centred on the first prediction so a constant predictor gives exactly 0.
  const Eigen::ArrayXd d = (x * beta).array() - (x.row(0) * beta)(0);
  const double m = d.mean();
  return (d - m).square().sum() / static_cast<double>(d.size());
}

/// REML fit of y = X beta + u_group + e on a prepared design (intercept included by caller).
///
/// The criterion is profiled down to the variance ratio lambda, optimized as
/// rho = lambda / (1 + lambda) on [0, 1): a 16-point grid brackets the
/// minimum, Brent's method refines it, and the rho = 0 endpoint is compared
/// explicitly so boundary solutions are returned exactly.
inline ModelFit fit_random_intercept(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     std::span<const std::string> group_labels,
                                     std::span<const std::string> coef_names, const FitOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (static_cast<std::size_t>(y.size()) != n || group_labels.size() != n || coef_names.size() != p) {
    throw ModelError("design dimensions do not agree");
  }
  std::vector<int> codes;
  const int n_groups = detail::encode_groups(group_labels, codes);
  if (n_groups < 2) throw ModelError("random-intercept model needs at least 2 groups, got " + std::to_string(n_groups));
  if (n <= p + 2) {
    throw ModelError("too few observations (" + std::to_string(n) + ") for " + std::to_string(p) + " coefficients");
  }
  detail::check_rank(x, coef_names, opt.rank_tol);

  const RemlProfile profile(x, y, codes, n_groups);
  std::size_t evals = 0;
  auto crit = [&](double rho) {
    ++evals;
    return profile.evaluate(detail::rho_to_lambda(rho)).criterion;
  };

  constexpr int kGrid = 16;
  std::vector<double> grid(kGrid + 1), values(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) {
    grid[i] = detail::kRhoMax * static_cast<double>(i) / kGrid;
    values[i] = crit(grid[i]);
  }
  const auto best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kGrid)];
  const std::size_t budget = opt.max_evaluations > evals ? opt.max_evaluations - evals : 1;
  MinimizeResult m = brent_minimize(crit, lo, hi, opt.rel_tol, budget);
  double rho = m.x;
  double value = m.fx;
  if (values[best] < value) {
    rho = grid[best];
    value = values[best];
  }

  ModelFit fit;
  fit.converged = m.converged;
  fit.evaluations = evals;
  const auto ev = profile.evaluate(detail::rho_to_lambda(rho));
  fit.lambda = detail::rho_to_lambda(rho);
  fit.sigma2_e = ev.sigma2_e;
  fit.sigma2_u = fit.lambda * ev.sigma2_e;
  fit.reml_criterion = ev.criterion;
  fit.n_obs = n;
  fit.n_groups = static_cast<std::size_t>(n_groups);
  const Eigen::MatrixXd cov = ev.sigma2_e * ev.xtvx.llt().solve(Eigen::MatrixXd::Identity(p, p));
  for (std::size_t j = 0; j < p; ++j) {
    Coefficient c;
    c.name = coef_names[j];
    c.estimate = ev.beta(j);
    c.se = std::sqrt(cov(j, j));
    c.z = c.estimate / c.se;
    c.p = wald_p_value(c.z);
    fit.coefficients.push_back(c);
  }
  const auto r2 = nakagawa_r2(fixed_effect_variance(x, ev.beta), fit.sigma2_u, fit.sigma2_e);
  fit.r2_marginal = r2.marginal;
  fit.r2_conditional = r2.conditional;
  return fit;
}

/// Design matrix [1, predictors...] from dataset columns.
inline Eigen::MatrixXd design_matrix(const ModelDataset& ds, std::span<const std::string> predictors) {
  Eigen::MatrixXd x(ds.rows(), predictors.size() + 1);
  x.col(0).setOnes();
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    const auto& col = ds.column(predictors[j]);
    for (std::size_t i = 0; i < ds.rows(); ++i) x(i, j + 1) = col[i];
  }
  return x;
}

inline ModelFit fit_random_intercept(const ModelDataset& ds, std::string_view response,
                                     std::span<const std::string> predictors, const FitOptions& opt = {}) {
  const auto& ycol = ds.column(response);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ycol.data(), static_cast<Eigen::Index>(ycol.size()));
  std::vector<std::string> names{std::string(kInterceptName)};
  names.insert(names.end(), predictors.begin(), predictors.end());
  ModelFit fit = fit_random_intercept(design_matrix(ds, predictors), y, ds.groups(), names, opt);
  fit.response = std::string(response);
  fit.notes = ds.notes;
  return fit;
}

/// Marginal / conditional R2 of `fit` evaluated on the rows of `ds`.
inline RSquared nakagawa_r2(const ModelFit& fit, const ModelDataset& ds) {
  if (!fit.converged) throw ModelError("R2 requires a converged fit");
  std::vector<std::string> predictors;
  Eigen::VectorXd beta(fit.coefficients.size());
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
    beta(j) = fit.coefficients[j].estimate;
    if (j > 0) predictors.push_back(fit.coefficients[j].name);
  }
  return nakagawa_r2(fixed_effect_variance(design_matrix(ds, predictors), beta), fit.sigma2_u, fit.sigma2_e);
}

}  // namespace echoscope
