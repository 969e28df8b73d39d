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

// Command-line front end for the echoscope library.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "echoscope/echoscope.hpp"

namespace es = echoscope;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Stdout when `path` is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw es::Error("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw es::ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw es::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw es::ConfigError("--pair expects A,B");
  return {s.substr(0, comma), s.substr(comma + 1)};
}

es::KindFilter parse_filter(const std::string& s) {
  if (s == "all") return es::KindFilter::all;
  if (s == "mentions") return es::KindFilter::mention_only;
  if (s == "retweets") return es::KindFilter::retweet_only;
  throw es::ConfigError("unknown filter '" + s + "'");
}

es::WindowSplit parse_split(const std::string& s) {
  if (s == "all") return es::WindowSplit::all;
  if (s == "pre") return es::WindowSplit::pre;
  if (s == "post") return es::WindowSplit::post;
  throw es::ConfigError("unknown split '" + s + "'");
}

struct InputOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> window;
  std::string split = "all";
  std::string election;

  void attach(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--input", inputs, "JSONL record files")->check(CLI::ExistingFile);
    if (required) opt->required();
    cmd->add_option("--window", window, "Collection window START END (ISO-8601)")->expected(2);
    cmd->add_option("--split", split, "all, pre or post")->check(CLI::IsMember({"all", "pre", "post"}));
    cmd->add_option("--election", election, "Election day for --split pre/post");
  }

  std::vector<es::InteractionRecord> load() const {
    std::vector<es::InteractionRecord> records;
    for (const auto& p : inputs) {
      auto part = es::read_records_file(p);
      records.insert(records.end(), part.begin(), part.end());
    }
    const auto s = parse_split(split);
    if (window.empty() && s == es::WindowSplit::all) return records;
    es::CollectionWindow w;
    if (window.empty()) {
      w.start = es::Instant::min();
      w.end = es::Instant::max();
    } else {
      w.start = es::parse_instant(window[0]);
      w.end = es::parse_instant(window[1]);
    }
    if (!election.empty()) w.election_date = es::parse_date(election);
    return es::filter_window(records, w, s);
  }
};

es::PairNetwork load_pair(const std::vector<es::InteractionRecord>& records, const std::string& pair,
                          es::KindFilter filter, es::Weighting weighting) {
  const auto [a, b] = split_pair(pair);
  std::vector<es::InteractionRecord> kept;
  for (const auto& r : records) {
    if (es::passes(filter, es::classify_interaction(r))) kept.push_back(r);
  }
  const auto net = es::build_network(kept, es::KindFilter::all, weighting);
  return es::pair_subnetwork(net, kept, a, b);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echoscope: echo-chamber fragmentation analysis of party discussion networks"};
  app.require_subcommand(1);

  // ingest
  InputOptions ingest_in;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Parse, validate and window interaction records");
  ingest_in.attach(ingest);
  ingest->add_option("--out", ingest_out, "Normalized JSONL output (default stdout)");

  // build
  InputOptions build_in;
  std::string build_filter = "all", build_weighting = "weighted", build_format = "csv", build_out;
  auto* build = app.add_subcommand("build", "Build the directed interaction network");
  build_in.attach(build);
  build->add_option("--filter", build_filter)->check(CLI::IsMember({"all", "mentions", "retweets"}));
  build->add_option("--weighting", build_weighting)->check(CLI::IsMember({"weighted", "unweighted"}));
  build->add_option("--format", build_format)->check(CLI::IsMember({"csv", "graphml"}));
  build->add_option("--out", build_out);

  // pairs
  InputOptions pairs_in;
  std::string pairs_registry, pairs_pair, pairs_out;
  auto* pairs = app.add_subcommand("pairs", "List eligible party pairs, or export one pair subnetwork");
  pairs_in.attach(pairs);
  pairs->add_option("--registry", pairs_registry)->required()->check(CLI::ExistingFile);
  pairs->add_option("--pair", pairs_pair, "Handles A,B: write this pair's edge list");
  pairs->add_option("--out", pairs_out);

  // classify
  InputOptions classify_in;
  std::string classify_pair, classify_filter = "all", classify_out;
  auto* classify = app.add_subcommand("classify", "Partition one pair network into internal and boundary nodes");
  classify_in.attach(classify);
  classify->add_option("--pair", classify_pair, "Seed handles A,B")->required();
  classify->add_option("--filter", classify_filter)->check(CLI::IsMember({"all", "mentions", "retweets"}));
  classify->add_option("--out", classify_out);

  // metrics
  std::vector<std::string> metrics_inputs, metrics_variants{"all"}, metrics_elections;
  std::string metrics_registry, metrics_out, metrics_direction = "outgoing";
  std::size_t metrics_threads = 1;
  auto* metrics = app.add_subcommand("metrics", "Fragmentation scores for every eligible pair");
  metrics->add_option("--input", metrics_inputs)->required()->check(CLI::ExistingFile);
  metrics->add_option("--registry", metrics_registry)->required()->check(CLI::ExistingFile);
  metrics->add_option("--variant", metrics_variants, "all, mentions, retweets, pre, post, unweighted");
  metrics->add_option("--election", metrics_elections, "COUNTRY=YYYY-MM-DD, for pre/post");
  metrics->add_option("--boundary-direction", metrics_direction)->check(CLI::IsMember({"outgoing", "both"}));
  metrics->add_option("--threads", metrics_threads);
  metrics->add_option("--out", metrics_out);

  // covariates
  std::string cov_registry, cov_out;
  auto* covariates = app.add_subcommand("covariates", "Pair covariates for all within-country pairs");
  covariates->add_option("--registry", cov_registry)->required()->check(CLI::ExistingFile);
  covariates->add_option("--out", cov_out);

  // fit
  std::string fit_obs, fit_json, fit_out;
  std::vector<std::string> fit_models;
  std::string fit_suite;
  bool fit_cube = false;
  auto* fit = app.add_subcommand("fit", "Random-intercept models on an observations table");
  fit->add_option("--observations", fit_obs, "observations.csv from run or synth study")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--model", fit_models, "Grid cell id, e.g. 2.2");
  fit->add_option("--suite", fit_suite, "'all' for the whole grid");
  fit->add_flag("--cube", fit_cube, "Cube the response before standardization");
  fit->add_option("--json", fit_json, "Write fits as JSON");
  fit->add_option("--out", fit_out, "Text table output (default stdout)");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthetic data with known ground truth");
  synth->require_subcommand(1);
  std::string synth_spec, synth_out, synth_truth;
  auto* synth_pair = synth->add_subcommand("pair", "Planted pair network as JSONL records");
  synth_pair->add_option("--spec", synth_spec, "JSON spec")->required()->check(CLI::ExistingFile);
  synth_pair->add_option("--out", synth_out);
  synth_pair->add_option("--truth", synth_truth, "Planted partition CSV");
  std::string study_spec, study_out;
  auto* synth_study = synth->add_subcommand("study", "Planted multi-country study as observations.csv");
  synth_study->add_option("--spec", study_spec)->required()->check(CLI::ExistingFile);
  synth_study->add_option("--out", study_out);
  std::string corpus_spec, corpus_out;
  auto* synth_corpus = synth->add_subcommand("corpus", "Registry, corpus and run config for the full pipeline");
  synth_corpus->add_option("--spec", corpus_spec)->required()->check(CLI::ExistingFile);
  synth_corpus->add_option("--out", corpus_out, "Output directory")->required();

  // layout
  InputOptions layout_in;
  std::string layout_edges, layout_pair, layout_format = "svg", layout_out, layout_colours;
  std::size_t layout_iterations = 500;
  std::uint64_t layout_seed = 0;
  auto* layout = app.add_subcommand("layout", "Fruchterman-Reingold figure of a network");
  layout_in.attach(layout, false);
  layout->add_option("--edges", layout_edges, "Edge list CSV instead of records")->check(CLI::ExistingFile);
  layout->add_option("--pair", layout_pair, "Seed handles A,B: draw the pair coloured by partition");
  layout->add_option("--colours", layout_colours, "JSON object node -> colour");
  layout->add_option("--format", layout_format)->check(CLI::IsMember({"svg", "dot", "graphml"}));
  layout->add_option("--iterations", layout_iterations);
  layout->add_option("--seed", layout_seed);
  layout->add_option("--out", layout_out)->required();

  // run
  std::string run_config, run_output;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::size_t> run_threads;
  std::vector<std::string> run_variants, run_models;
  bool run_figures = false;
  auto* run = app.add_subcommand("run", "Full pipeline from a JSON run config");
  run->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  run->add_option("--output", run_output, "Overrides the configured output directory");
  run->add_option("--seed", run_seed);
  run->add_option("--threads", run_threads);
  run->add_option("--variant", run_variants);
  run->add_option("--model", run_models);
  run->add_flag("--figures", run_figures);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*ingest) {
      const auto records = ingest_in.load();
      Output out(ingest_out);
      for (const auto& r : records) out.stream() << es::serialize_record(r) << '\n';
      std::cerr << records.size() << " records\n";
    } else if (*build) {
      const auto net = es::build_network(build_in.load(), parse_filter(build_filter),
                                         build_weighting == "weighted" ? es::Weighting::weighted
                                                                       : es::Weighting::unweighted);
      Output out(build_out);
      if (build_format == "csv") {
        es::write_edge_csv(out.stream(), net);
      } else {
        es::write_graphml(out.stream(), net);
      }
      std::cerr << net.node_count() << " nodes, " << net.edge_count() << " edges\n";
    } else if (*pairs) {
      const auto records = pairs_in.load();
      Output out(pairs_out);
      if (!pairs_pair.empty()) {
        es::write_edge_csv(out.stream(), load_pair(records, pairs_pair, es::KindFilter::all, es::Weighting::weighted)
                                             .network);
      } else {
        const auto registry = es::load_registry_file(pairs_registry);
        const auto countries = es::eligibility(records, registry);
        for (const auto& c : countries) {
          if (c.eligible.size() < 2) std::cerr << "warning: country " << c.country << " contributes no pairs\n";
        }
        out.stream() << "country,party_a,party_b,handle_a,handle_b\n";
        for (const auto& t : es::form_pairs(countries)) {
          out.stream() << es::csv::join({t.country, t.party_a.id, t.party_b.id, t.party_a.handle, t.party_b.handle})
                       << '\n';
        }
      }
    } else if (*classify) {
      const auto pair = load_pair(classify_in.load(), classify_pair, parse_filter(classify_filter),
                                  es::Weighting::weighted);
      const auto part = es::classify_nodes(pair);
      Output out(classify_out);
      es::write_partition_csv(out.stream(), pair, part);
      const auto f = es::fragmentation_f(pair, part);
      std::cerr << "F = " << (f.defined ? es::csv::format_double(f.value) : "NA") << " (B_e " << f.b_e << ", I_e "
                << f.i_e << ")\n";
    } else if (*metrics) {
      es::RunConfig cfg;
      cfg.inputs = metrics_inputs;
      cfg.registry = metrics_registry;
      cfg.variants.clear();
      for (const auto& v : metrics_variants) cfg.variants.push_back(es::parse_variant(v));
      for (const auto& e : metrics_elections) {
        auto eq = e.find('=');
        if (eq == std::string::npos) throw es::ConfigError("--election expects COUNTRY=DATE");
        cfg.elections[e.substr(0, eq)] = es::parse_date(e.substr(eq + 1));
      }
      cfg.boundary = es::parse_boundary_direction(metrics_direction);
      cfg.threads = metrics_threads;
      cfg.models.clear();
      const auto registry = es::load_registry_file(cfg.registry);
      es::validate(cfg, registry);
      std::vector<es::InteractionRecord> records;
      for (const auto& p : cfg.inputs) {
        auto part = es::read_records_file(p);
        records.insert(records.end(), part.begin(), part.end());
      }
      const auto a = es::analyse(cfg, registry, std::move(records));
      for (const auto& w : a.warnings) std::cerr << "warning: " << w << '\n';
      Output out(metrics_out);
      es::write_pair_metrics(out.stream(), a.observations);
    } else if (*covariates) {
      const auto registry = es::load_registry_file(cov_registry);
      Output out(cov_out);
      out.stream() << "country,party_a,party_b,ideological_distance,extremism_sum,left_right_mismatch,"
                      "size_difference,incumbency\n";
      for (const auto& country : registry.countries()) {
        const auto parties = registry.in_country(country);
        for (std::size_t i = 0; i < parties.size(); ++i) {
          for (std::size_t j = i + 1; j < parties.size(); ++j) {
            const auto c = es::pair_covariates(parties[i], parties[j], 0, 0);
            out.stream() << es::csv::join({country, parties[i].id, parties[j].id,
                                           es::csv::format_double(c.ideological_distance),
                                           es::csv::format_double(c.extremism_sum),
                                           c.left_right_mismatch ? "true" : "false",
                                           es::csv::format_double(c.size_difference),
                                           std::string(es::to_string(c.incumbency))})
                         << '\n';
          }
        }
      }
    } else if (*fit) {
      std::ifstream in(fit_obs);
      const auto obs = es::read_observations(in);
      std::vector<std::string> ids = fit_models;
      if (!fit_suite.empty()) ids.push_back(fit_suite);
      if (ids.empty()) throw es::ConfigError("give --model ID or --suite all");
      es::DatasetOptions dopt;
      dopt.cube_response = fit_cube;
      const auto entries = es::model_suite(obs, ids, dopt);
      Output out(fit_out);
      out.stream() << es::format_model_table(entries);
      if (!fit_json.empty()) {
        Output js(fit_json);
        js.stream() << es::models_json(entries).dump(2) << '\n';
      }
    } else if (*synth_pair) {
      const auto spec = es::parse_pair_spec(read_json_file(synth_spec));
      const auto planted = es::generate_pair(spec);
      Output out(synth_out);
      for (const auto& r : es::to_records(planted.pair.network, es::parse_instant("2014-01-01T00:00:00Z"))) {
        out.stream() << es::serialize_record(r) << '\n';
      }
      if (!synth_truth.empty()) {
        Output t(synth_truth);
        es::write_partition_csv(t.stream(), planted.pair, planted.truth);
      }
    } else if (*synth_study) {
      const auto study = es::generate_study(es::parse_study_spec(read_json_file(study_spec)));
      Output out(study_out);
      es::write_observations(out.stream(), study.observations);
    } else if (*synth_corpus) {
      const auto spec = es::parse_corpus_spec(read_json_file(corpus_spec));
      const auto corpus = es::generate_corpus(spec);
      const fs::path dir(corpus_out);
      fs::create_directories(dir);
      {
        std::ofstream reg(dir / "registry.csv", std::ios::binary);
        es::write_registry(reg, corpus.registry);
        std::ofstream recs(dir / "corpus.jsonl", std::ios::binary);
        for (const auto& r : corpus.records) recs << es::serialize_record(r) << '\n';
      }
      es::RunConfig cfg;
      cfg.inputs = {"corpus.jsonl"};
      cfg.registry = "registry.csv";
      cfg.elections = spec.elections;
      cfg.window_start = spec.start;
      cfg.window_end = spec.end;
      cfg.variants.assign(es::kAllVariants.begin(), es::kAllVariants.end());
      cfg.output = "report";
      cfg.rng_seed = spec.rng_seed;
      auto j = es::to_json(cfg);
      j.erase("threads");
      j.erase("figures");
      std::ofstream(dir / "config.json", std::ios::binary) << j.dump(2) << '\n';
      std::cerr << corpus.registry.size() << " parties, " << corpus.records.size() << " records\n";
    } else if (*layout) {
      es::InteractionNetwork net;
      es::ColourMap colours;
      if (!layout_colours.empty()) {
        for (const auto& [k, v] : read_json_file(layout_colours).items()) colours[k] = v.get<std::string>();
      }
      if (!layout_edges.empty()) {
        std::ifstream in(layout_edges);
        net = es::read_edge_csv(in);
      } else {
        if (layout_in.inputs.empty()) throw es::ConfigError("give --input or --edges");
        const auto records = layout_in.load();
        if (!layout_pair.empty()) {
          const auto pair = load_pair(records, layout_pair, es::KindFilter::all, es::Weighting::weighted);
          net = pair.network;
          if (colours.empty()) colours = es::partition_colours(pair, es::classify_nodes(pair));
        } else {
          net = es::build_network(records);
        }
      }
      es::LayoutOptions lo;
      lo.iterations = layout_iterations;
      lo.rng_seed = layout_seed;
      const auto l = es::fruchterman_reingold(net, lo);
      Output out(layout_out);
      es::render(out.stream(), net, l, colours, es::parse_figure_format(layout_format));
    } else if (*run) {
      auto cfg = es::load_run_config(run_config);
      if (!run_output.empty()) cfg.output = run_output;
      if (run_seed) cfg.rng_seed = *run_seed;
      if (run_threads) cfg.threads = *run_threads;
      if (!run_variants.empty()) {
        cfg.variants.clear();
        for (const auto& v : run_variants) cfg.variants.push_back(es::parse_variant(v));
      }
      if (!run_models.empty()) cfg.models = run_models;
      if (run_figures) cfg.figures = true;
      const auto res = es::run(cfg, &std::cerr);
      std::cerr << res.analysis.observations.size() << " pairs scored; report in " << cfg.output << '\n';
    }
  } catch (const es::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
