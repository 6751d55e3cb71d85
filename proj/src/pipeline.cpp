#include "mixsum/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mixsum/bundle_io.hpp"
#include "mixsum/sim_data.hpp"

namespace mixsum {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Stable stream ids, one per pipeline stage.
constexpr std::uint64_t kStreamData = 101;
constexpr std::uint64_t kStreamDpm = 102;
constexpr std::uint64_t kStreamPredictive = 103;
constexpr std::uint64_t kStreamFit = 104;
constexpr std::uint64_t kStreamProject = 105;
constexpr std::uint64_t kStreamKmeansPoint = 106;
constexpr std::uint64_t kStreamKmeansPosterior = 107;
constexpr std::uint64_t kStreamEval = 108;

[[noreturn]] void field_error(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double get_double(const json& j, const std::string& key, const std::string& path, double dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_number()) field_error(path + "." + key, "must be a number");
  return v->get<double>();
}

long get_long(const json& j, const std::string& key, const std::string& path, long dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_number_integer()) field_error(path + "." + key, "must be an integer");
  return v->get<long>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path, bool dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_boolean()) field_error(path + "." + key, "must be a boolean");
  return v->get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path,
                       const std::string& dflt) {
  const json* v = find(j, key);
  if (!v) return dflt;
  if (!v->is_string()) field_error(path + "." + key, "must be a string");
  return v->get<std::string>();
}

EmConfig parse_em(const json& j, const std::string& path) {
  EmConfig em;
  em.max_iters = static_cast<int>(get_long(j, "max_iters", path, em.max_iters));
  em.rel_tol = get_double(j, "rel_tol", path, em.rel_tol);
  em.restarts = static_cast<int>(get_long(j, "restarts", path, em.restarts));
  em.ridge = get_double(j, "ridge", path, em.ridge);
  em.family = get_string(j, "family", path, em.family);
  return em;
}

DpmConfig parse_dpm(const json& j, const std::string& path) {
  DpmConfig c;
  if (const json* v = find(j, "mu0")) {
    if (!v->is_number()) field_error(path + ".mu0", "must be a number");
    c.mu0 = v->get<double>();
  }
  c.k0 = get_double(j, "k0", path, c.k0);
  c.alpha0 = get_double(j, "alpha0", path, c.alpha0);
  c.beta0 = get_double(j, "beta0", path, c.beta0);
  c.concentration_shape = get_double(j, "concentration_shape", path, c.concentration_shape);
  c.concentration_rate = get_double(j, "concentration_rate", path, c.concentration_rate);
  c.iterations = get_long(j, "iterations", path, c.iterations);
  c.burn_in = get_long(j, "burn_in", path, c.burn_in);
  c.thinning = get_long(j, "thinning", path, c.thinning);
  c.max_clusters = get_long(j, "max_clusters", path, c.max_clusters);
  return c;
}

std::string csv_escape_free(const std::string& s) {
  if (s.find(',') != std::string::npos || s.find('"') != std::string::npos)
    throw ValidationError("csv field may not contain commas or quotes: " + s);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double_field(const std::string& f, const fs::path& path, long line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size())
    throw ValidationError(path.string() + ":" + std::to_string(line) +
                          ": bad numeric field '" + f + "'");
  return v;
}

long parse_long_field(const std::string& f, const fs::path& path, long line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size())
    throw ValidationError(path.string() + ":" + std::to_string(line) +
                          ": bad integer field '" + f + "'");
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "# mixsum " << MIXSUM_VERSION << "\n";
  return out;
}

// Yields non-comment, non-empty lines with their line numbers.
std::vector<std::pair<long, std::string>> read_csv_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::pair<long, std::string>> lines;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.emplace_back(line_no, line);
  }
  return lines;
}

fs::path in_dir(const PipelineConfig& config, const char* name) {
  return config.output_dir / name;
}

void require_file(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path))
    throw ValidationError("missing " + path.string() + "; run `" + producer + "` first");
}

// data.csv is written with labels whenever the source had them.
bool dataset_written_with_labels(const PipelineConfig& config) {
  if (!config.data.generator.empty()) return true;  // generators label their draws
  return config.data.labeled;
}

}  // namespace

void PipelineConfig::validate() const {
  const bool has_csv = !data.csv.empty();
  const bool has_gen = !data.generator.empty();
  if (has_csv == has_gen)
    field_error("data", "exactly one of data.csv and data.generator is required");
  if (has_gen) {
    if (data.generator != "sim-univariate" && data.generator != "sim-bivariate")
      field_error("data.generator", "unknown generator '" + data.generator + "'");
    if (data.n < 1) field_error("data.n", "must be >= 1 when a generator is used");
  }
  const bool has_dpm = model.dpm.has_value();
  const bool has_bundle = !model.bundle.empty();
  if (has_dpm == has_bundle)
    field_error("model", "exactly one of model.dpm and model.bundle is required");
  if (has_dpm) {
    try {
      model.dpm->validate();
    } catch (const ValidationError& e) {
      field_error("model.dpm", e.what());
    }
  }
  if (summary.k_max < 1) field_error("summary.k_max", "must be >= 1");
  if (summary.n_predictive <= summary.k_max)
    field_error("summary.n_predictive", "must exceed summary.k_max");
  if (!(summary.delta > 0.0)) field_error("summary.delta", "must be positive");
  if (summary.sd_cap && !(*summary.sd_cap > 0.0))
    field_error("summary.sd_cap", "must be positive");
  if (summary.forced_k && (*summary.forced_k < 1 || *summary.forced_k > summary.k_max))
    field_error("summary.forced_k", "must lie in 1..k_max");
  try {
    summary.em.validate();
  } catch (const ValidationError& e) {
    field_error("summary.em", e.what());
  }
  if (projection.h_per_draw < 1) field_error("projection.h_per_draw", "must be >= 1");
  if (projection.restarts && *projection.restarts < 0)
    field_error("projection.restarts", "must be >= 0");
  if (projection.grid_points < 2) field_error("projection.grid_points", "must be >= 2");
  if (cluster.h_per_draw < 1) field_error("cluster.h_per_draw", "must be >= 1");
  if (cluster.kmeans_restarts < 1) field_error("cluster.kmeans_restarts", "must be >= 1");
  if (evaluate.truth != "auto" && evaluate.truth != "none" &&
      evaluate.truth != "sim-univariate" && evaluate.truth != "sim-bivariate")
    field_error("evaluate.truth", "must be auto, none, sim-univariate or sim-bivariate");
  if (evaluate.n_samples < 2) field_error("evaluate.n_samples", "must be >= 2");
  if (threads < 0) field_error("threads", "must be >= 0");
  if (output_dir.empty()) field_error("output_dir", "must not be empty");
}

PipelineConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  PipelineConfig c;
  if (const json* v = find(j, "seed")) {
    if (!v->is_number_integer() && !v->is_number_unsigned())
      field_error("seed", "must be an integer");
    c.seed = v->get<std::uint64_t>();
  }
  c.output_dir = get_string(j, "output_dir", "config", c.output_dir.string());
  c.threads = static_cast<int>(get_long(j, "threads", "config", c.threads));
  if (const json* v = find(j, "data")) {
    if (!v->is_object()) field_error("data", "must be an object");
    c.data.csv = get_string(*v, "csv", "data", "");
    c.data.labeled = get_bool(*v, "labeled", "data", false);
    c.data.generator = get_string(*v, "generator", "data", "");
    c.data.n = get_long(*v, "n", "data", 0);
  }
  if (const json* v = find(j, "model")) {
    if (!v->is_object()) field_error("model", "must be an object");
    if (const json* d = find(*v, "dpm")) {
      if (!d->is_object()) field_error("model.dpm", "must be an object");
      c.model.dpm = parse_dpm(*d, "model.dpm");
    }
    c.model.bundle = get_string(*v, "bundle", "model", "");
  }
  if (const json* v = find(j, "summary")) {
    if (!v->is_object()) field_error("summary", "must be an object");
    c.summary.k_max = static_cast<int>(get_long(*v, "k_max", "summary", c.summary.k_max));
    c.summary.n_predictive = get_long(*v, "n_predictive", "summary", c.summary.n_predictive);
    c.summary.delta = get_double(*v, "delta", "summary", c.summary.delta);
    if (const json* s = find(*v, "sd_cap")) {
      if (!s->is_number()) field_error("summary.sd_cap", "must be a number");
      c.summary.sd_cap = s->get<double>();
    }
    if (const json* s = find(*v, "forced_k")) {
      if (!s->is_number_integer()) field_error("summary.forced_k", "must be an integer");
      c.summary.forced_k = s->get<int>();
    }
    if (const json* s = find(*v, "em")) {
      if (!s->is_object()) field_error("summary.em", "must be an object");
      c.summary.em = parse_em(*s, "summary.em");
    }
  }
  if (const json* v = find(j, "projection")) {
    if (!v->is_object()) field_error("projection", "must be an object");
    c.projection.h_per_draw = get_long(*v, "h_per_draw", "projection", c.projection.h_per_draw);
    c.projection.warm_start = get_bool(*v, "warm_start", "projection", true);
    if (const json* s = find(*v, "restarts")) {
      if (!s->is_number_integer()) field_error("projection.restarts", "must be an integer");
      c.projection.restarts = static_cast<int>(s->get<long>());
    }
    c.projection.grid_points = get_long(*v, "grid_points", "projection",
                                        c.projection.grid_points);
    c.projection.grid_csv = get_string(*v, "grid_csv", "projection", "");
  }
  if (const json* v = find(j, "cluster")) {
    if (!v->is_object()) field_error("cluster", "must be an object");
    c.cluster.h_per_draw = get_long(*v, "h_per_draw", "cluster", c.cluster.h_per_draw);
    c.cluster.kmeans_restarts =
        static_cast<int>(get_long(*v, "kmeans_restarts", "cluster", c.cluster.kmeans_restarts));
  }
  if (const json* v = find(j, "evaluate")) {
    if (!v->is_object()) field_error("evaluate", "must be an object");
    c.evaluate.truth = get_string(*v, "truth", "evaluate", c.evaluate.truth);
    c.evaluate.n_samples = get_long(*v, "n_samples", "evaluate", c.evaluate.n_samples);
    c.evaluate.replicate = get_long(*v, "replicate", "evaluate", c.evaluate.replicate);
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  PipelineConfig c = parse_config_json(buffer.str());
  if (const char* env_seed = std::getenv("MIXSUM_SEED")) {
    std::uint64_t seed = 0;
    const std::string s(env_seed);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ValidationError("MIXSUM_SEED: bad integer '" + s + "'");
    c.seed = seed;
  }
  if (const char* env_out = std::getenv("MIXSUM_OUTPUT_DIR")) c.output_dir = env_out;
  return c;
}

void cmd_sample(const PipelineConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  Dataset data;
  if (!config.data.generator.empty()) {
    RngStream rng(config.seed, kStreamData);
    data = config.data.generator == "sim-univariate"
               ? generate_sim_univariate(config.data.n, rng)
               : generate_sim_bivariate(config.data.n, rng);
  } else {
    data = read_dataset_csv(config.data.csv, config.data.labeled);
  }
  write_dataset_csv(data, in_dir(config, outputs::kData), true);

  if (config.model.dpm) {
    RngStream rng(config.seed, kStreamDpm);
    DpmResult result = dpm_gibbs(data, *config.model.dpm, rng);
    export_bundle(result.bundle, in_dir(config, outputs::kBundle));
    write_chain_csv(result.diagnostics, in_dir(config, outputs::kChain));
  } else {
    // Validated copy: parse, check invariants, re-emit.
    DrawBundle bundle = ingest_bundle(config.model.bundle);
    if (bundle.dim() != data.dim())
      throw ValidationError("model.bundle: bundle dimension " + std::to_string(bundle.dim()) +
                            " does not match data dimension " + std::to_string(data.dim()));
    export_bundle(bundle, in_dir(config, outputs::kBundle));
  }
}

void cmd_summarize(const PipelineConfig& config) {
  config.validate();
  const fs::path bundle_path = in_dir(config, outputs::kBundle);
  require_file(bundle_path, "sample");
  const DrawBundle bundle = ingest_bundle(bundle_path);
  RngStream pred_rng(config.seed, kStreamPredictive);
  Dataset predictive = predictive_sample(bundle, config.summary.n_predictive, pred_rng);
  write_dataset_csv(predictive, in_dir(config, outputs::kPredictive), false);

  RngStream fit_rng(config.seed, kStreamFit);
  std::vector<GmmSummary> summaries =
      fit_summary_sequence(predictive, config.summary.k_max, config.summary.em, fit_rng,
                           config.threads);
  DiscrepancyTable table = discrepancy_samples(bundle, summaries, predictive);
  const double sd_cap = config.summary.sd_cap
                            ? *config.summary.sd_cap
                            : std::numeric_limits<double>::quiet_NaN();
  select_k_star(table, config.summary.delta, sd_cap);
  bool forced = false;
  if (config.summary.forced_k) {
    table.k_star = *config.summary.forced_k;
    table.selected_by_rule = false;
    forced = true;
  }
  if (table.mean_positive_warning)
    std::cerr << "notice: some mean discrepancies sit above zero beyond Monte-Carlo error\n";

  write_summaries(summaries, in_dir(config, outputs::kSummaries));
  write_elbow_raw_csv(table, in_dir(config, outputs::kElbowRaw));
  write_elbow_csv(table, in_dir(config, outputs::kElbow));
  json kj{{"k_star", table.k_star},
          {"selected_by_rule", table.selected_by_rule},
          {"forced", forced},
          {"delta", table.delta},
          {"sd_cap", table.sd_cap}};
  std::ofstream out(in_dir(config, outputs::kKstar));
  if (!out) throw ValidationError("cannot write kstar.json");
  out << kj.dump(2) << "\n";
}

namespace {

int load_k_star(const PipelineConfig& config) {
  const fs::path p = in_dir(config, outputs::kKstar);
  require_file(p, "summarize");
  std::ifstream in(p);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
  return j.at("k_star").get<int>();
}

GmmSummary load_summary_for_k(const PipelineConfig& config, int k) {
  const fs::path p = in_dir(config, outputs::kSummaries);
  require_file(p, "summarize");
  for (GmmSummary& s : read_summaries(p)) {
    if (s.k == k) return std::move(s);
  }
  throw ValidationError(p.string() + ": no summary with k=" + std::to_string(k));
}

PosteriorSummarySet load_posterior_set(const PipelineConfig& config, int k_star) {
  const fs::path p = in_dir(config, outputs::kPosteriorSet);
  require_file(p, "project");
  PosteriorSummarySet set;
  set.k_star = k_star;
  set.h_per_draw = config.projection.h_per_draw;
  set.summaries = read_summaries(p, &set.draw_indices);
  set.validate();
  return set;
}

}  // namespace

void cmd_project(const PipelineConfig& config) {
  config.validate();
  require_file(in_dir(config, outputs::kBundle), "sample");
  const DrawBundle bundle = ingest_bundle(in_dir(config, outputs::kBundle));
  const int k_star = load_k_star(config);
  GmmSummary warm = load_summary_for_k(config, k_star);

  ProjectionConfig pc;
  pc.h_per_draw = config.projection.h_per_draw;
  pc.em = config.summary.em;
  if (config.projection.restarts) pc.em.restarts = *config.projection.restarts;
  pc.warm_start = config.projection.warm_start;
  pc.threads = config.threads;
  RngStream rng(config.seed, kStreamProject);
  PosteriorSummarySet set =
      align_labels(project_posterior(bundle, k_star, pc, warm, rng));
  if (!set.failed_draws.empty())
    std::cerr << "notice: " << set.failed_draws.size() << " of " << bundle.size()
              << " per-draw projections failed and were skipped\n";
  write_summaries(set.summaries, in_dir(config, outputs::kPosteriorSet), &set.draw_indices);

  const Dataset data = read_dataset_csv(in_dir(config, outputs::kData),
                                        dataset_written_with_labels(config));
  if (data.dim() == 1) {
    const Matrix grid = default_grid_univariate(data, config.projection.grid_points);
    write_ribbon_csv(density_ribbon(set, grid), in_dir(config, outputs::kRibbon));
  } else if (!config.projection.grid_csv.empty()) {
    const Dataset grid = read_dataset_csv(config.projection.grid_csv, false);
    if (grid.dim() != data.dim())
      throw ValidationError("projection.grid_csv: grid dimension does not match data");
    write_ribbon_csv(density_ribbon(set, grid.points), in_dir(config, outputs::kRibbon));
  } else {
    std::cerr << "notice: multivariate data and no projection.grid_csv; ribbon skipped\n";
  }
}

void cmd_cluster(const PipelineConfig& config) {
  config.validate();
  const Dataset data = read_dataset_csv(in_dir(config, outputs::kData),
                                        dataset_written_with_labels(config));
  const int k_star = load_k_star(config);
  const GmmSummary summary = load_summary_for_k(config, k_star);

  // Conditional-probability loss.
  const std::vector<int> cond_point = conditional_allocate(summary, data);
  const PosteriorSummarySet set = load_posterior_set(config, k_star);
  const AllocationReport cond_report = conditional_posterior_allocate(set, data);
  write_allocations_csv(cond_report, cond_point, data,
                        in_dir(config, outputs::kAllocConditional));

  // k-means loss: point-estimate centroids come from the shared predictive
  // sample, per-draw centroids from per-draw predictive samples.
  require_file(in_dir(config, outputs::kPredictive), "summarize");
  const Dataset predictive = read_dataset_csv(in_dir(config, outputs::kPredictive), false);
  RngStream km_rng(config.seed, kStreamKmeansPoint);
  // Point-estimate centroids use the kmeans_fit default restart budget; the
  // configured (usually smaller) budget applies to the M per-draw fits.
  const CentroidSet centroids = kmeans_fit(predictive, k_star, km_rng);
  {
    std::ofstream out = open_out(in_dir(config, outputs::kCentroids));
    for (int q = 0; q < centroids.k(); ++q) {
      for (int j = 0; j < centroids.dim(); ++j) {
        if (j) out << ",";
        out << format_double(centroids.centroids(q, j));
      }
      out << "\n";
    }
  }
  const std::vector<int> km_point = kmeans_assign(centroids, data);
  require_file(in_dir(config, outputs::kBundle), "sample");
  const DrawBundle bundle = ingest_bundle(in_dir(config, outputs::kBundle));
  RngStream kmp_rng(config.seed, kStreamKmeansPosterior);
  const AllocationReport km_report =
      kmeans_posterior_allocate(bundle, k_star, config.cluster.h_per_draw, data, kmp_rng,
                                config.threads, config.cluster.kmeans_restarts);
  write_allocations_csv(km_report, km_point, data, in_dir(config, outputs::kAllocKmeans));
}

void cmd_evaluate(const PipelineConfig& config) {
  config.validate();
  const Dataset data = read_dataset_csv(in_dir(config, outputs::kData),
                                        dataset_written_with_labels(config));
  std::vector<ScoreRow> rows;
  const long n = data.size();

  std::string truth_name = config.evaluate.truth;
  if (truth_name == "auto") {
    truth_name = config.data.generator.empty() ? "none" : config.data.generator;
  }
  if (truth_name != "none") {
    const MixtureDraw truth = truth_name == "sim-univariate" ? sim_univariate_truth()
                                                             : sim_bivariate_truth();
    if (truth.dim() != data.dim())
      throw ValidationError("evaluate.truth: truth dimension does not match data");
    RngStream rng(config.seed, kStreamEval);
    const Dataset truth_samples(truth.sample_n(rng, config.evaluate.n_samples));

    const int k_star = load_k_star(config);
    const GmmSummary summary = load_summary_for_k(config, k_star);
    auto add_h = [&](const std::string& model, const LogDensityFn& fn) {
      const EvalScore s = hellinger_mc(truth, fn, truth_samples);
      rows.push_back({config.evaluate.replicate, n, model, s.metric, s.value,
                      s.standard_error});
    };
    add_h("summary_estimate_k" + std::to_string(k_star),
          [&](const Matrix& pts) { return summary.log_density(pts); });
    require_file(in_dir(config, outputs::kBundle), "sample");
    const DrawBundle bundle = ingest_bundle(in_dir(config, outputs::kBundle));
    add_h("posterior_predictive", [&](const Matrix& pts) {
      return posterior_predictive_logdensity(bundle, pts);
    });
    if (fs::exists(in_dir(config, outputs::kPosteriorSet))) {
      const PosteriorSummarySet set = load_posterior_set(config, k_star);
      add_h("posterior_mean_summary_k" + std::to_string(k_star), [&](const Matrix& pts) {
        return posterior_mean_logdensity(set, pts);
      });
    } else {
      std::cerr << "notice: no posterior summary set; posterior-mean density not scored\n";
    }
  } else {
    std::cerr << "notice: no known truth density; hellinger skipped\n";
  }

  if (data.has_labels()) {
    auto score_alloc = [&](const char* file, const std::string& tag) {
      const fs::path p = in_dir(config, file);
      if (!fs::exists(p)) {
        std::cerr << "notice: " << p.string() << " missing; " << tag << " not scored\n";
        return;
      }
      const std::vector<AllocationRow> alloc = read_allocations_csv(p, data.dim());
      if (static_cast<long>(alloc.size()) != n)
        throw ValidationError(p.string() + ": row count does not match data");
      std::vector<int> pointest(n), modal(n);
      for (long i = 0; i < n; ++i) {
        pointest[i] = alloc[i].label_pointest;
        modal[i] = alloc[i].label_modal;
      }
      for (const auto& [labels, kind] :
           {std::pair(&pointest, "_pointest"), std::pair(&modal, "_modal")}) {
        const EvalScore ari = adjusted_rand_index(data.labels, *labels);
        rows.push_back({config.evaluate.replicate, n, tag + kind, ari.metric, ari.value,
                        ari.standard_error});
        try {
          const EvalScore err = classification_error(data.labels, *labels);
          rows.push_back({config.evaluate.replicate, n, tag + kind, err.metric, err.value,
                          err.standard_error});
        } catch (const ValidationError& e) {
          std::cerr << "notice: err skipped for " << tag << kind << ": " << e.what() << "\n";
        }
      }
    };
    score_alloc(outputs::kAllocConditional, "conditional");
    score_alloc(outputs::kAllocKmeans, "kmeans");
  } else {
    std::cerr << "notice: data has no labels; ari/err skipped\n";
  }

  write_scores_csv(rows, in_dir(config, outputs::kScores));
}

void cmd_pipeline(const PipelineConfig& config) {
  cmd_sample(config);
  cmd_summarize(config);
  cmd_project(config);
  cmd_cluster(config);
  cmd_evaluate(config);
}

void run_stage(const PipelineConfig& config, const std::string& stage) {
  if (stage == "sample") return cmd_sample(config);
  if (stage == "summarize") return cmd_summarize(config);
  if (stage == "project") return cmd_project(config);
  if (stage == "cluster") return cmd_cluster(config);
  if (stage == "evaluate") return cmd_evaluate(config);
  if (stage == "pipeline") return cmd_pipeline(config);
  throw ValidationError("unknown stage '" + stage + "'");
}

void write_chain_csv(const std::vector<DpmSweepStats>& diag, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const DpmSweepStats& s : diag)
    out << s.sweep << "," << s.occupied_clusters << "," << format_double(s.alpha) << "\n";
}

std::vector<DpmSweepStats> read_chain_csv(const fs::path& path) {
  std::vector<DpmSweepStats> diag;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 3)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 3 columns");
    diag.push_back({parse_long_field(f[0], path, line_no),
                    static_cast<int>(parse_long_field(f[1], path, line_no)),
                    parse_double_field(f[2], path, line_no)});
  }
  return diag;
}

void write_elbow_raw_csv(const DiscrepancyTable& table, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < table.k_values.size(); ++j)
    for (long i = 0; i < table.n(); ++i)
      out << table.k_values[j] << "," << i << ","
          << format_double(table.samples(i, static_cast<long>(j))) << "\n";
}

DiscrepancyTable read_elbow_raw_csv(const fs::path& path) {
  std::map<int, std::vector<double>> columns;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 3)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 3 columns");
    columns[static_cast<int>(parse_long_field(f[0], path, line_no))].push_back(
        parse_double_field(f[2], path, line_no));
  }
  if (columns.empty()) throw ValidationError(path.string() + ": empty elbow file");
  const long n = static_cast<long>(columns.begin()->second.size());
  DiscrepancyTable table;
  table.samples.resize(n, static_cast<long>(columns.size()));
  table.mean_d.resize(static_cast<long>(columns.size()));
  table.sd_d.resize(static_cast<long>(columns.size()));
  long j = 0;
  for (const auto& [k, values] : columns) {
    if (static_cast<long>(values.size()) != n)
      throw ValidationError(path.string() + ": ragged columns");
    table.k_values.push_back(k);
    for (long i = 0; i < n; ++i) table.samples(i, j) = values[i];
    const double mean = table.samples.col(j).mean();
    table.mean_d[j] = mean;
    table.sd_d[j] = n > 1 ? std::sqrt((table.samples.col(j).array() - mean).square().sum() /
                                      static_cast<double>(n - 1))
                          : 0.0;
    ++j;
  }
  return table;
}

void write_elbow_csv(const DiscrepancyTable& table, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < table.k_values.size(); ++j)
    out << table.k_values[j] << "," << format_double(table.mean_d[static_cast<long>(j)]) << ","
        << format_double(table.sd_d[static_cast<long>(j)]) << ","
        << (table.k_values[j] == table.k_star ? 1 : 0) << "\n";
}

std::vector<ElbowRow> read_elbow_csv(const fs::path& path) {
  std::vector<ElbowRow> rows;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 4)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 4 columns");
    rows.push_back({static_cast<int>(parse_long_field(f[0], path, line_no)),
                    parse_double_field(f[1], path, line_no),
                    parse_double_field(f[2], path, line_no),
                    parse_long_field(f[3], path, line_no) != 0});
  }
  return rows;
}

void write_ribbon_csv(const DensityRibbon& ribbon, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (long i = 0; i < ribbon.grid.rows(); ++i) {
    for (long j = 0; j < ribbon.grid.cols(); ++j) out << format_double(ribbon.grid(i, j)) << ",";
    out << format_double(ribbon.lower2_5[i]) << "," << format_double(ribbon.mean[i]) << ","
        << format_double(ribbon.upper97_5[i]) << "\n";
  }
}

DensityRibbon read_ribbon_csv(const fs::path& path, int dim) {
  std::vector<std::vector<double>> rows;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (static_cast<int>(f.size()) != dim + 3)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim + 3) + " columns");
    std::vector<double> row;
    row.reserve(f.size());
    for (const std::string& field : f) row.push_back(parse_double_field(field, path, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": empty ribbon file");
  DensityRibbon ribbon;
  ribbon.grid.resize(static_cast<long>(rows.size()), dim);
  ribbon.lower2_5.resize(static_cast<long>(rows.size()));
  ribbon.mean.resize(static_cast<long>(rows.size()));
  ribbon.upper97_5.resize(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dim; ++j) ribbon.grid(static_cast<long>(i), j) = rows[i][j];
    ribbon.lower2_5[static_cast<long>(i)] = rows[i][dim];
    ribbon.mean[static_cast<long>(i)] = rows[i][dim + 1];
    ribbon.upper97_5[static_cast<long>(i)] = rows[i][dim + 2];
  }
  return ribbon;
}

void write_allocations_csv(const AllocationReport& report,
                           const std::vector<int>& point_estimate_labels, const Dataset& data,
                           const fs::path& path) {
  if (static_cast<long>(point_estimate_labels.size()) != data.size() ||
      static_cast<long>(report.labels.size()) != data.size())
    throw ValidationError("allocations: label/data size mismatch");
  std::ofstream out = open_out(path);
  const std::string loss = cluster_loss_name(report.loss);
  for (long i = 0; i < data.size(); ++i) {
    out << i << ",";
    for (int j = 0; j < data.dim(); ++j) out << format_double(data.points(i, j)) << ",";
    out << point_estimate_labels[i] << "," << report.labels[i] << ","
        << format_double(report.uncertainty[i]) << "," << csv_escape_free(loss) << "\n";
  }
}

std::vector<AllocationRow> read_allocations_csv(const fs::path& path, int dim) {
  std::vector<AllocationRow> rows;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (static_cast<int>(f.size()) != dim + 5)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim + 5) + " columns");
    AllocationRow row;
    row.obs_index = parse_long_field(f[0], path, line_no);
    for (int j = 0; j < dim; ++j)
      row.coords.push_back(parse_double_field(f[1 + j], path, line_no));
    row.label_pointest = static_cast<int>(parse_long_field(f[1 + dim], path, line_no));
    row.label_modal = static_cast<int>(parse_long_field(f[2 + dim], path, line_no));
    row.uncertainty = parse_double_field(f[3 + dim], path, line_no);
    row.loss = f[4 + dim];
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_scores_csv(const std::vector<ScoreRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const ScoreRow& r : rows) {
    out << r.replicate << "," << r.n << "," << csv_escape_free(r.model) << ","
        << csv_escape_free(r.metric) << "," << format_double(r.value) << ","
        << (r.se ? format_double(*r.se) : "") << "\n";
  }
}

std::vector<ScoreRow> read_scores_csv(const fs::path& path) {
  std::vector<ScoreRow> rows;
  for (const auto& [line_no, line] : read_csv_lines(path)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 6)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 6 columns");
    ScoreRow row;
    row.replicate = parse_long_field(f[0], path, line_no);
    row.n = parse_long_field(f[1], path, line_no);
    row.model = f[2];
    row.metric = f[3];
    row.value = parse_double_field(f[4], path, line_no);
    if (!f[5].empty()) row.se = parse_double_field(f[5], path, line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mixsum
