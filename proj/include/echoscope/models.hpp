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
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "echoscope/csv.hpp"
#include "echoscope/error.hpp"
#include "echoscope/metrics.hpp"
#include "echoscope/stats.hpp"

namespace echoscope {

enum class ModelLevel { pair, party };

/// One cell of the model grid.
struct ModelSpec {
  std::string id;
  ModelLevel level = ModelLevel::pair;
  Variant variant = Variant::all;
  std::vector<std::string> predictors;
  /// Pair models filter on pair node count, party models on the party's node count.
  std::size_t min_nodes = 0;
};

struct DatasetOptions {
  bool cube_response = false;
};

inline constexpr std::string_view kResponseColumn = "F";

/// Display label for a predictor column.
inline std::string_view predictor_label(std::string_view column) {
  static const std::map<std::string_view, std::string_view> labels = {
      {"ideological_distance", "Ideology"}, {"extremism_sum", "Extremism"},
      {"left_right_mismatch", "Left-Right Pair"}, {"size_difference", "Size Difference"},
      {"io_pair", "I-O Pair"}, {"oo_pair", "O-O Pair"}, {"tweet_ratio", "Tweet Ratio"},
      {"extremism", "Extremism"}, {"right_wing", "Right-wing"}, {"party_size", "Party Size"},
      {"incumbent", "Incumbent"}, {"(Intercept)", "(Intercept)"}};
  auto it = labels.find(column);
  return it == labels.end() ? column : it->second;
}

inline bool is_dummy_predictor(std::string_view column) {
  return column == "left_right_mismatch" || column == "io_pair" || column == "oo_pair" ||
         column == "right_wing" || column == "incumbent";
}

/// The full grid: ideology models 1.x, extremism models 2.x, party-level
/// models 3.x and the network-elicitation robustness models 4.x.
inline std::vector<ModelSpec> model_grid() {
  const std::vector<std::string> controls = {"size_difference", "io_pair", "oo_pair", "tweet_ratio"};
  auto with_controls = [&](std::vector<std::string> base) {
    base.insert(base.end(), controls.begin(), controls.end());
    return base;
  };
  const std::vector<std::string> ideology = {"ideological_distance", "left_right_mismatch"};
  const std::vector<std::string> extremism = {"extremism_sum", "left_right_mismatch"};
  const std::vector<std::string> party = {"extremism", "right_wing", "party_size", "incumbent"};
  std::vector<ModelSpec> g = {
      {"1.1", ModelLevel::pair, Variant::all, ideology, 0},
      {"1.2", ModelLevel::pair, Variant::all, with_controls(ideology), 0},
      {"1.3", ModelLevel::pair, Variant::all, with_controls(ideology), 1000},
      {"2.1", ModelLevel::pair, Variant::all, extremism, 0},
      {"2.2", ModelLevel::pair, Variant::all, with_controls(extremism), 0},
      {"2.3", ModelLevel::pair, Variant::all, with_controls(extremism), 1000},
      {"3.1", ModelLevel::party, Variant::all, party, 0},
      {"3.2", ModelLevel::party, Variant::all, party, 100},
  };
  const std::pair<const char*, Variant> robust[] = {{"4.1", Variant::mentions}, {"4.2", Variant::retweets},
                                                    {"4.3", Variant::pre},      {"4.4", Variant::post},
                                                    {"4.5", Variant::unweighted}};
  for (const auto& [id, v] : robust) g.push_back({id, ModelLevel::pair, v, with_controls(extremism), 0});
  return g;
}

inline ModelSpec model_spec(std::string_view id) {
  for (auto& s : model_grid()) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown model '" + std::string(id) + "'");
}

namespace detail {

inline double pair_value(const PairObservation& o, std::string_view col) {
  const auto& c = o.covariates;
  if (col == "ideological_distance") return c.ideological_distance;
  if (col == "extremism_sum") return c.extremism_sum;
  if (col == "left_right_mismatch") return c.left_right_mismatch ? 1 : 0;
  if (col == "size_difference") return c.size_difference;
  if (col == "io_pair") return c.incumbency == IncumbencyPair::IO ? 1 : 0;
  if (col == "oo_pair") return c.incumbency == IncumbencyPair::OO ? 1 : 0;
  if (col == "tweet_ratio") return *c.tweet_ratio;
  throw ConfigError("column '" + std::string(col) + "' is not a pair-level predictor");
}

inline double party_value(const Party& p, std::string_view col) {
  const auto c = party_covariates(p);
  if (col == "extremism") return c.extremism;
  if (col == "right_wing") return c.right_wing ? 1 : 0;
  if (col == "party_size") return c.size;
  if (col == "incumbent") return c.incumbent ? 1 : 0;
  throw ConfigError("column '" + std::string(col) + "' is not a party-level predictor");
}

}  // namespace detail

/// Estimation sample for one grid cell: filtered, optionally cubed, then
/// standardized (response and numeric predictors) within the sample.
inline ModelDataset make_dataset(std::span<const PairObservation> obs, const ModelSpec& spec,
                                 const DatasetOptions& opt = {}) {
  const bool needs_ratio = std::find(spec.predictors.begin(), spec.predictors.end(), "tweet_ratio") !=
                           spec.predictors.end();
  std::vector<std::string> groups;
  std::vector<double> response;
  std::vector<std::vector<double>> cols(spec.predictors.size());
  std::size_t undefined = 0, no_ratio = 0, too_small = 0;
  for (const auto& o : obs) {
    const VariantScores* s = o.variant(spec.variant);
    if (!s) {
      throw ConfigError("model " + spec.id + " needs '" + std::string(to_string(spec.variant)) +
                        "' scores, missing for pair " + o.party_a.id + "/" + o.party_b.id);
    }
    if (spec.level == ModelLevel::pair) {
      if (s->nodes < spec.min_nodes) {
        ++too_small;
        continue;
      }
      if (!s->f.defined) {
        ++undefined;
        continue;
      }
      if (needs_ratio && !o.covariates.tweet_ratio) {
        ++no_ratio;
        continue;
      }
      groups.push_back(o.country);
      response.push_back(s->f.value);
      for (std::size_t j = 0; j < cols.size(); ++j) cols[j].push_back(detail::pair_value(o, spec.predictors[j]));
    } else {
      const std::pair<const Party*, std::pair<const FragmentationScore*, std::size_t>> sides[] = {
          {&o.party_a, {&s->fp_a, s->nodes_a}}, {&o.party_b, {&s->fp_b, s->nodes_b}}};
      for (const auto& [party, score] : sides) {
        if (score.second < spec.min_nodes) {
          ++too_small;
          continue;
        }
        if (!score.first->defined) {
          ++undefined;
          continue;
        }
        groups.push_back(o.country);
        response.push_back(score.first->value);
        for (std::size_t j = 0; j < cols.size(); ++j) cols[j].push_back(detail::party_value(*party, spec.predictors[j]));
      }
    }
  }
  ModelDataset ds(std::move(groups));
  ds.add_numeric(std::string(kResponseColumn), std::move(response));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (is_dummy_predictor(spec.predictors[j])) {
      ds.add_dummy(spec.predictors[j], std::move(cols[j]));
    } else {
      ds.add_numeric(spec.predictors[j], std::move(cols[j]));
    }
  }
  ds.notes.push_back("variant=" + std::string(to_string(spec.variant)));
  if (spec.min_nodes > 0) {
    ds.notes.push_back("min_nodes=" + std::to_string(spec.min_nodes) + " (excluded " + std::to_string(too_small) + ")");
  }
  if (undefined) ds.notes.push_back("excluded " + std::to_string(undefined) + " undefined scores");
  if (no_ratio) ds.notes.push_back("excluded " + std::to_string(no_ratio) + " rows without tweet ratio");
  if (opt.cube_response) {
    cube_transform(ds, kResponseColumn);
    ds.notes.push_back("response cubed before standardization");
  }
  standardize(ds);
  ds.notes.push_back("standardized after filtering, within the estimation sample");
  return ds;
}

inline ModelFit fit_model(std::span<const PairObservation> obs, const ModelSpec& spec,
                          const DatasetOptions& dopt = {}, const FitOptions& fopt = {}) {
  const ModelDataset ds = make_dataset(obs, spec, dopt);
  ModelFit fit = fit_random_intercept(ds, kResponseColumn, spec.predictors, fopt);
  fit.id = spec.id;
  return fit;
}

/// Outcome of one grid cell; `error` is set when the cell could not be fitted.
struct SuiteEntry {
  ModelSpec spec;
  std::optional<ModelFit> fit;
  std::string error;
};

/// Fits every requested cell ("all" expands to the whole grid). Estimation
/// failures of individual cells are recorded, configuration errors propagate.
inline std::vector<SuiteEntry> model_suite(std::span<const PairObservation> obs, std::span<const std::string> ids,
                                           const DatasetOptions& dopt = {}, const FitOptions& fopt = {}) {
  std::vector<ModelSpec> specs;
  for (const auto& id : ids) {
    if (id == "all") {
      auto g = model_grid();
      specs.insert(specs.end(), g.begin(), g.end());
    } else {
      specs.push_back(model_spec(id));
    }
  }
  std::vector<SuiteEntry> out;
  for (const auto& s : specs) {
    SuiteEntry e{s, std::nullopt, {}};
    try {
      e.fit = fit_model(obs, s, dopt, fopt);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

inline std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return "+";
  return "";
}

inline nlohmann::ordered_json to_json(const ModelFit& f) {
  nlohmann::ordered_json j;
  j["id"] = f.id;
  j["response"] = f.response;
  j["p_value_method"] = f.p_value_method;
  auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
  for (const auto& c : f.coefficients) {
    coefs.push_back({{"name", c.name}, {"estimate", c.estimate}, {"se", c.se}, {"z", c.z}, {"p", c.p}});
  }
  j["sigma2_u"] = f.sigma2_u;
  j["sigma2_e"] = f.sigma2_e;
  j["lambda"] = f.lambda;
  j["r2_marginal"] = f.r2_marginal;
  j["r2_conditional"] = f.r2_conditional;
  j["n_obs"] = f.n_obs;
  j["n_groups"] = f.n_groups;
  j["converged"] = f.converged;
  j["evaluations"] = f.evaluations;
  j["reml_criterion"] = f.reml_criterion;
  j["notes"] = f.notes;
  return j;
}

/// Aligned coefficient table: one column per model, stars for Wald-z p-values.
inline std::string format_model_table(std::span<const SuiteEntry> entries) {
  std::vector<const SuiteEntry*> fitted;
  for (const auto& e : entries) {
    if (e.fit) fitted.push_back(&e);
  }
  std::vector<std::string> rows;
  for (const auto* e : fitted) {
    for (const auto& c : e->fit->coefficients) {
      if (c.name == kInterceptName) continue;
      std::string label(predictor_label(c.name));
      if (std::find(rows.begin(), rows.end(), label) == rows.end()) rows.push_back(label);
    }
  }
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{""};
  for (const auto* e : fitted) header.push_back("(" + e->spec.id + ")");
  table.push_back(header);
  for (const auto& label : rows) {
    std::vector<std::string> line{label};
    for (const auto* e : fitted) {
      std::string cell;
      for (const auto& c : e->fit->coefficients) {
        if (c.name != kInterceptName && predictor_label(c.name) == label) {
          cell = csv::format_fixed(c.estimate, 2) + significance_stars(c.p);
        }
      }
      line.push_back(cell);
    }
    table.push_back(line);
  }
  auto stat_row = [&](std::string label, auto value) {
    std::vector<std::string> line{std::move(label)};
    for (const auto* e : fitted) line.push_back(value(*e->fit));
    table.push_back(line);
  };
  stat_row("Observations", [](const ModelFit& f) { return std::to_string(f.n_obs); });
  stat_row("Countries", [](const ModelFit& f) { return std::to_string(f.n_groups); });
  stat_row("Marginal R2", [](const ModelFit& f) { return csv::format_fixed(f.r2_marginal, 2); });
  stat_row("Conditional R2", [](const ModelFit& f) { return csv::format_fixed(f.r2_conditional, 2); });

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  auto rule = [&] {
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    out << std::string(total, '-') << '\n';
  };
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (r == 0 || r == rows.size() + 1) rule();
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i] + 2)) << table[r][i];
      } else {
        out << std::right << std::setw(static_cast<int>(width[i] + 2)) << table[r][i];
      }
    }
    out << '\n';
  }
  rule();
  out << "Dependent variable standardized; numeric predictors standardized.\n"
         "p-values: two-sided Wald-z. + p<0.1; * p<0.05; ** p<0.01; *** p<0.001\n";
  for (const auto& e : entries) {
    if (!e.fit) out << "(" << e.spec.id << ") not estimated: " << e.error << '\n';
  }
  return out.str();
}

}  // namespace echoscope
