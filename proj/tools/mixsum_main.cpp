#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixsum/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> threads;
  std::optional<std::string> data_csv;
  std::optional<bool> labeled;
  std::optional<std::string> generator;
  std::optional<long> n;
  std::optional<std::string> bundle;
  std::optional<int> k_max;
  std::optional<long> n_predictive;
  std::optional<double> delta;
  std::optional<double> sd_cap;
  std::optional<int> forced_k;
  std::optional<long> h_per_draw;
  std::optional<long> iterations;
  std::optional<long> burn_in;
  std::optional<long> thinning;
};

void apply(const Overrides& o, mixsum::PipelineConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.threads) c.threads = *o.threads;
  if (o.data_csv) {
    c.data.csv = *o.data_csv;
    c.data.generator.clear();
  }
  if (o.labeled) c.data.labeled = *o.labeled;
  if (o.generator) {
    c.data.generator = *o.generator;
    c.data.csv.clear();
  }
  if (o.n) c.data.n = *o.n;
  if (o.bundle) {
    c.model.bundle = *o.bundle;
    c.model.dpm.reset();
  }
  if (o.k_max) c.summary.k_max = *o.k_max;
  if (o.n_predictive) c.summary.n_predictive = *o.n_predictive;
  if (o.delta) c.summary.delta = *o.delta;
  if (o.sd_cap) c.summary.sd_cap = *o.sd_cap;
  if (o.forced_k) c.summary.forced_k = *o.forced_k;
  if (o.h_per_draw) {
    c.projection.h_per_draw = *o.h_per_draw;
    c.cluster.h_per_draw = *o.h_per_draw;
  }
  if (o.iterations || o.burn_in || o.thinning) {
    if (!c.model.dpm) c.model.dpm.emplace();
    if (o.iterations) c.model.dpm->iterations = *o.iterations;
    if (o.burn_in) c.model.dpm->burn_in = *o.burn_in;
    if (o.thinning) c.model.dpm->thinning = *o.thinning;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posterior summarization of Bayesian mixture models"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  const std::vector<std::string> stages = {"sample",  "summarize", "project",
                                           "cluster", "evaluate",  "pipeline"};
  const char* descriptions[] = {
      "draw or ingest the reference-model posterior bundle",
      "fit the summary sequence, compute the discrepancy elbow, pick K*",
      "project every posterior draw onto a K*-component summary and build ribbons",
      "emit cluster allocations and uncertainties under both losses",
      "score summaries (hellinger) and allocations (ari, err)",
      "run every stage in order"};
  std::string chosen;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    CLI::App* sub = app.add_subcommand(stages[i], descriptions[i]);
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", o.seed, "override the global seed");
    sub->add_option("-o,--output-dir", o.output_dir, "override the output directory");
    sub->add_option("--threads", o.threads, "cap worker threads (0 = all cores)");
    sub->add_option("--data-csv", o.data_csv, "read observations from this CSV");
    sub->add_flag("--labeled,!--no-labeled", o.labeled,
                  "the data CSV carries a final integer label column");
    sub->add_option("--generator", o.generator, "builtin generator (sim-univariate|sim-bivariate)");
    sub->add_option("--n", o.n, "number of generated observations");
    sub->add_option("--bundle", o.bundle, "ingest this draw-bundle file instead of sampling");
    sub->add_option("--k-max", o.k_max, "largest summary dimension");
    sub->add_option("--n-predictive", o.n_predictive, "posterior predictive sample size");
    sub->add_option("--delta", o.delta, "selection tolerance on the mean discrepancy");
    sub->add_option("--sd-cap", o.sd_cap, "selection cap on the discrepancy spread");
    sub->add_option("--forced-k", o.forced_k, "skip the selection rule and use this K*");
    sub->add_option("--h-per-draw", o.h_per_draw, "per-draw predictive sample size");
    sub->add_option("--iterations", o.iterations, "DPM sweeps");
    sub->add_option("--burn-in", o.burn_in, "DPM burn-in sweeps");
    sub->add_option("--thinning", o.thinning, "DPM thinning");
    sub->callback([&chosen, name = stages[i]]() { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mixsum::PipelineConfig config = mixsum::load_config(config_path);
    apply(o, config);
    mixsum::run_stage(config, chosen);
  } catch (const mixsum::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mixsum::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
