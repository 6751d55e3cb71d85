#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixsum/clustering.hpp"
#include "mixsum/discrepancy.hpp"
#include "mixsum/dpm.hpp"
#include "mixsum/evaluation.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/projection.hpp"

namespace mixsum {

// Exactly one of csv/generator; generators: sim-univariate | sim-bivariate.
struct DataSourceConfig {
  std::string csv;
  bool labeled = false;
  std::string generator;
  long n = 0;
};

// Exactly one of dpm/bundle.
struct ModelSourceConfig {
  std::optional<DpmConfig> dpm;
  std::string bundle;
  std::string name() const { return dpm ? "dpm" : "bundle"; }
};

struct SummaryStageConfig {
  int k_max = 10;
  long n_predictive = 2000;
  double delta = 0.1;
  std::optional<double> sd_cap;   // default: 3x the smallest sd over k
  std::optional<int> forced_k;    // overrides the selection rule
  EmConfig em;
};

struct ProjectionStageConfig {
  long h_per_draw = 1000;
  bool warm_start = true;
  std::optional<int> restarts;    // overrides em.restarts for per-draw fits
  long grid_points = 512;
  std::string grid_csv;           // required for multivariate ribbons
};

struct ClusterStageConfig {
  long h_per_draw = 1000;
  int kmeans_restarts = 4;
};

struct EvaluateStageConfig {
  // "auto" uses the generator's mixture when the data came from a builtin
  // generator; "none" disables density scoring.
  std::string truth = "auto";
  long n_samples = 2000;
  long replicate = 0;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  int threads = 0;
  DataSourceConfig data;
  ModelSourceConfig model;
  SummaryStageConfig summary;
  ProjectionStageConfig projection;
  ClusterStageConfig cluster;
  EvaluateStageConfig evaluate;

  void validate() const;
};

// Parse a JSON config file, then apply MIXSUM_SEED / MIXSUM_OUTPUT_DIR from
// the environment. Validation failures name the offending field path.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config_json(const std::string& text);

// Output names inside output_dir.
namespace outputs {
inline constexpr const char* kData = "data.csv";
inline constexpr const char* kBundle = "bundle.jsonl";
inline constexpr const char* kChain = "chain.csv";
inline constexpr const char* kPredictive = "predictive.csv";
inline constexpr const char* kSummaries = "summaries.jsonl";
inline constexpr const char* kElbowRaw = "elbow_raw.csv";
inline constexpr const char* kElbow = "elbow.csv";
inline constexpr const char* kKstar = "kstar.json";
inline constexpr const char* kPosteriorSet = "posterior_set.jsonl";
inline constexpr const char* kRibbon = "ribbon.csv";
inline constexpr const char* kAllocConditional = "allocations_conditional.csv";
inline constexpr const char* kAllocKmeans = "allocations_kmeans.csv";
inline constexpr const char* kCentroids = "centroids.csv";
inline constexpr const char* kScores = "scores.csv";
}  // namespace outputs

void cmd_sample(const PipelineConfig& config);
void cmd_summarize(const PipelineConfig& config);
void cmd_project(const PipelineConfig& config);
void cmd_cluster(const PipelineConfig& config);
void cmd_evaluate(const PipelineConfig& config);
void cmd_pipeline(const PipelineConfig& config);
void run_stage(const PipelineConfig& config, const std::string& stage);

// CSV surfaces (all emit a "# mixsum <version>" comment first; readers skip
// comment lines).
void write_chain_csv(const std::vector<DpmSweepStats>& diag, const std::filesystem::path& path);
std::vector<DpmSweepStats> read_chain_csv(const std::filesystem::path& path);

void write_elbow_raw_csv(const DiscrepancyTable& table, const std::filesystem::path& path);
// Rebuilds the samples matrix; means/sds are recomputed from the samples.
DiscrepancyTable read_elbow_raw_csv(const std::filesystem::path& path);

struct ElbowRow {
  int k = 0;
  double mean_d = 0.0;
  double sd_d = 0.0;
  bool selected = false;
};
void write_elbow_csv(const DiscrepancyTable& table, const std::filesystem::path& path);
std::vector<ElbowRow> read_elbow_csv(const std::filesystem::path& path);

void write_ribbon_csv(const DensityRibbon& ribbon, const std::filesystem::path& path);
DensityRibbon read_ribbon_csv(const std::filesystem::path& path, int dim);

void write_allocations_csv(const AllocationReport& report,
                           const std::vector<int>& point_estimate_labels, const Dataset& data,
                           const std::filesystem::path& path);
struct AllocationRow {
  long obs_index = 0;
  std::vector<double> coords;
  int label_pointest = 0;
  int label_modal = 0;
  double uncertainty = 0.0;
  std::string loss;
};
std::vector<AllocationRow> read_allocations_csv(const std::filesystem::path& path, int dim);

struct ScoreRow {
  long replicate = 0;
  long n = 0;
  std::string model;
  std::string metric;
  double value = 0.0;
  std::optional<double> se;
};
void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

}  // namespace mixsum
