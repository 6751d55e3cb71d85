#pragma once

#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/projection.hpp"

namespace mixsum {

enum class ClusterLoss { Conditional, KMeans };

std::string cluster_loss_name(ClusterLoss loss);

// Hard allocations with per-observation uncertainty: label is the modal
// per-draw vote; uncertainty is one minus the maximal vote share, which lives
// in [0, 1 - 1/K*]. The N x M per-draw label matrix is kept for audit.
struct AllocationReport {
  ClusterLoss loss = ClusterLoss::Conditional;
  int k_star = 0;
  std::vector<int> labels;            // modal, 1-based
  Vector uncertainty;
  Eigen::MatrixXi draw_labels;        // N x M

  void validate() const;
};

// Build a report from a per-draw label matrix (labels 1..k_star). Shared by
// both losses; ties go to the smallest label.
AllocationReport report_from_label_matrix(Eigen::MatrixXi draw_labels, ClusterLoss loss,
                                          int k_star);

// Highest-responsibility component per observation (1-based); ties to the
// smallest component index.
std::vector<int> conditional_allocate(const GmmSummary& summary, const Dataset& data);

// Per-draw conditional-probability allocations across an aligned posterior
// summary set, with vote-share uncertainty.
AllocationReport conditional_posterior_allocate(const PosteriorSummarySet& set,
                                                const Dataset& data);

struct CentroidSet {
  Matrix centroids;                 // K x d, sorted by first coordinate
  double wcss = 0.0;                // within-cluster sum of squares
  std::vector<double> wcss_trace;   // per-Lloyd-iteration, winning restart

  int k() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
  void validate() const;
};

// kmeans++ seeded Lloyd iteration, best of `restarts` by WCSS. Restart r uses
// stream child(k, r). Requires at least k distinct points.
CentroidSet kmeans_fit(const Dataset& samples, int k, const RngStream& rng, int restarts = 10);

// Nearest-centroid labels (1-based); ties to the smallest index.
std::vector<int> kmeans_assign(const CentroidSet& centroids, const Dataset& data);

// Per-draw k-means allocations: fit centroids on h predictive samples from
// each draw, sort them, assign the observations. Draws with degenerate fits
// are skipped (at most max_failure_fraction of them).
AllocationReport kmeans_posterior_allocate(const DrawBundle& bundle, int k_star, long h,
                                           const Dataset& data, const RngStream& rng,
                                           int threads = 0, int restarts = 4,
                                           double max_failure_fraction = 0.10);

}  // namespace mixsum
