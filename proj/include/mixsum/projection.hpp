#pragma once

#include <optional>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/mixture.hpp"

namespace mixsum {

// The M per-draw projected summaries gamma'^(1..M), canonically ordered.
struct PosteriorSummarySet {
  int k_star = 0;
  long h_per_draw = 0;
  std::vector<GmmSummary> summaries;   // one per successful draw, draw order
  std::vector<int> draw_indices;       // source draw of each summary
  std::vector<int> failed_draws;

  long size() const { return static_cast<long>(summaries.size()); }
  bool aligned() const;
  void validate() const;
};

struct ProjectionConfig {
  long h_per_draw = 1000;
  EmConfig em;
  bool warm_start = true;
  int threads = 0;
  double max_failure_fraction = 0.10;
};

// Algorithm: for every draw, sample h points from its mixture and fit a
// k_star-component summary by EM (optionally warm-started from the summary
// estimate), then canonicalize component order. Draws whose EM fails are
// skipped and reported; more than max_failure_fraction failures aborts.
PosteriorSummarySet project_posterior(const DrawBundle& bundle, int k_star,
                                      const ProjectionConfig& config,
                                      const std::optional<GmmSummary>& warm_start,
                                      const RngStream& rng);

// Sort every member's components by location (idempotent).
PosteriorSummarySet align_labels(PosteriorSummarySet set);

struct DensityRibbon {
  Matrix grid;          // G x d evaluation points
  Vector lower2_5;
  Vector upper97_5;
  Vector mean;
};

// Pointwise 2.5/97.5 percentiles and mean of {g(y | gamma'^(m))} per grid row.
DensityRibbon density_ribbon(const PosteriorSummarySet& set, const Matrix& grid);

// log of the posterior mean summary density (1/M) sum_m g(y | gamma'^(m)).
Vector posterior_mean_logdensity(const PosteriorSummarySet& set, const Matrix& points);

// Equispaced univariate grid spanning the data range widened by 10%.
Matrix default_grid_univariate(const Dataset& data, long points = 512);

}  // namespace mixsum
