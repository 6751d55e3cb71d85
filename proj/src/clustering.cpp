#include "mixsum/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsum/parallel.hpp"

namespace mixsum {

std::string cluster_loss_name(ClusterLoss loss) {
  return loss == ClusterLoss::Conditional ? "conditional" : "kmeans";
}

void AllocationReport::validate() const {
  const long n = static_cast<long>(labels.size());
  if (uncertainty.size() != n) throw ValidationError("allocation report: size mismatch");
  if (draw_labels.rows() != n) throw ValidationError("allocation report: label matrix mismatch");
  const double bound = 1.0 - 1.0 / static_cast<double>(k_star);
  for (long i = 0; i < n; ++i) {
    if (labels[i] < 1 || labels[i] > k_star)
      throw ValidationError("allocation report: label out of range");
    if (uncertainty[i] < -1e-12 || uncertainty[i] > bound + 1e-12)
      throw ValidationError("allocation report: uncertainty outside [0, 1 - 1/K*]");
  }
}

AllocationReport report_from_label_matrix(Eigen::MatrixXi draw_labels, ClusterLoss loss,
                                          int k_star) {
  const long n = draw_labels.rows();
  const long m = draw_labels.cols();
  if (n < 1 || m < 1) throw ValidationError("allocation report: empty label matrix");
  AllocationReport report;
  report.loss = loss;
  report.k_star = k_star;
  report.labels.resize(n);
  report.uncertainty.resize(n);
  std::vector<long> votes(k_star);
  for (long i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0L);
    for (long j = 0; j < m; ++j) {
      const int lab = draw_labels(i, j);
      if (lab < 1 || lab > k_star)
        throw ValidationError("allocation report: draw label out of range 1..K*");
      ++votes[lab - 1];
    }
    long best = 0;
    for (int c = 1; c < k_star; ++c)
      if (votes[c] > votes[best]) best = c;  // ties keep the smallest label
    report.labels[i] = static_cast<int>(best) + 1;
    report.uncertainty[i] =
        1.0 - static_cast<double>(votes[best]) / static_cast<double>(m);
  }
  report.draw_labels = std::move(draw_labels);
  report.validate();
  return report;
}

std::vector<int> conditional_allocate(const GmmSummary& summary, const Dataset& data) {
  if (data.dim() != summary.dim())
    throw ValidationError("conditional_allocate: dimension mismatch");
  const Matrix resp = summary.responsibilities(data.points);
  std::vector<int> labels(data.size());
  for (long i = 0; i < data.size(); ++i) {
    int best = 0;
    for (int c = 1; c < summary.k; ++c)
      if (resp(i, c) > resp(i, best)) best = c;
    labels[i] = best + 1;
  }
  return labels;
}

AllocationReport conditional_posterior_allocate(const PosteriorSummarySet& set,
                                                const Dataset& data) {
  if (set.summaries.empty()) throw ValidationError("conditional allocation: empty set");
  if (!set.aligned())
    throw ValidationError("conditional allocation: summary set is not label-aligned; "
                          "run align_labels first");
  Eigen::MatrixXi draw_labels(data.size(), set.size());
  for (long j = 0; j < set.size(); ++j) {
    const std::vector<int> labels = conditional_allocate(set.summaries[j], data);
    for (long i = 0; i < data.size(); ++i) draw_labels(i, j) = labels[i];
  }
  return report_from_label_matrix(std::move(draw_labels), ClusterLoss::Conditional, set.k_star);
}

void CentroidSet::validate() const {
  for (int a = 0; a < k(); ++a)
    for (int b = a + 1; b < k(); ++b)
      if ((centroids.row(a) - centroids.row(b)).norm() == 0.0)
        throw NumericalError("kmeans: duplicate centroids");
  for (int a = 1; a < k(); ++a)
    if (centroids(a, 0) < centroids(a - 1, 0))
      throw ValidationError("kmeans: centroids not sorted");
}

namespace {

long nearest_row(const Matrix& centroids, const Eigen::RowVectorXd& p) {
  long best = 0;
  double best_d = (p - centroids.row(0)).squaredNorm();
  for (long q = 1; q < centroids.rows(); ++q) {
    const double d = (p - centroids.row(q)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

Matrix kmeanspp_centroids(const Matrix& x, int k, RngStream& rng) {
  const long n = x.rows();
  Matrix centroids(k, x.cols());
  const long first = std::min<long>(n - 1, static_cast<long>(rng.uniform() * n));
  centroids.row(0) = x.row(first);
  Vector d2 = (x.rowwise() - x.row(first)).rowwise().squaredNorm();
  for (int q = 1; q < k; ++q) {
    const double total = d2.sum();
    long pick = -1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (long i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      pick = std::min<long>(n - 1, static_cast<long>(rng.uniform() * n));
    }
    centroids.row(q) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centroids;
}

struct LloydRun {
  Matrix centroids;
  double wcss = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
};

LloydRun lloyd(const Matrix& x, Matrix centroids, int max_iters = 500) {
  const long n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  std::vector<long> assign(n, -1);
  LloydRun run;
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (long i = 0; i < n; ++i) {
      const long q = nearest_row(centroids, x.row(i));
      wcss += (x.row(i) - centroids.row(q)).squaredNorm();
      if (q != assign[i]) {
        assign[i] = q;
        changed = true;
      }
    }
    run.trace.push_back(wcss);
    run.wcss = wcss;
    if (!changed && iter > 0) break;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<long> counts(k, 0);
    for (long i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    bool reseeded = false;
    for (int q = 0; q < k; ++q) {
      if (counts[q] > 0) {
        centroids.row(q) = sums.row(q) / static_cast<double>(counts[q]);
      } else {
        // Empty cluster: reseed at the point farthest from its nearest centroid.
        long worst = 0;
        double worst_d = -1.0;
        for (long i = 0; i < n; ++i) {
          const double d = (x.row(i) - centroids.row(nearest_row(centroids, x.row(i))))
                               .squaredNorm();
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        if (worst_d <= 0.0) throw NumericalError("kmeans: cannot repair empty cluster");
        centroids.row(q) = x.row(worst);
        reseeded = true;
      }
    }
    if (reseeded) run.trace.clear();
  }
  // Report the objective at the centroids actually returned.
  double final_wcss = 0.0;
  for (long i = 0; i < n; ++i)
    final_wcss += (x.row(i) - centroids.row(nearest_row(centroids, x.row(i)))).squaredNorm();
  run.wcss = final_wcss;
  run.centroids = std::move(centroids);
  return run;
}

long count_distinct_rows(const Matrix& x, long stop_after) {
  std::vector<long> order(x.rows());
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    for (long j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return false;
  });
  long distinct = x.rows() > 0 ? 1 : 0;
  for (long i = 1; i < x.rows() && distinct < stop_after; ++i)
    if ((x.row(order[i]) - x.row(order[i - 1])).norm() > 0.0) ++distinct;
  return distinct;
}

}  // namespace

CentroidSet kmeans_fit(const Dataset& samples, int k, const RngStream& rng, int restarts) {
  if (k < 1) throw ValidationError("kmeans_fit: k must be >= 1");
  if (restarts < 1) throw ValidationError("kmeans_fit: restarts must be >= 1");
  const Matrix& x = samples.points;
  if (x.rows() < k) throw ValidationError("kmeans_fit: fewer samples than clusters");
  if (count_distinct_rows(x, k) < k)
    throw ValidationError("kmeans_fit: fewer distinct points than clusters");

  std::optional<LloydRun> best;
  std::string first_error;
  for (int r = 0; r < restarts; ++r) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r));
    try {
      LloydRun run = lloyd(x, kmeanspp_centroids(x, k, stream));
      if (!best || run.wcss < best->wcss) best = std::move(run);
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!best) throw NumericalError("kmeans_fit: all restarts failed (" + first_error + ")");

  std::vector<long> order(k);
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    for (long j = 0; j < best->centroids.cols(); ++j) {
      if (best->centroids(a, j) != best->centroids(b, j))
        return best->centroids(a, j) < best->centroids(b, j);
    }
    return false;
  });
  CentroidSet out;
  out.centroids.resize(k, x.cols());
  for (int q = 0; q < k; ++q) out.centroids.row(q) = best->centroids.row(order[q]);
  out.wcss = best->wcss;
  out.wcss_trace = std::move(best->trace);
  out.validate();
  return out;
}

std::vector<int> kmeans_assign(const CentroidSet& centroids, const Dataset& data) {
  if (data.dim() != centroids.dim())
    throw ValidationError("kmeans_assign: dimension mismatch");
  std::vector<int> labels(data.size());
  for (long i = 0; i < data.size(); ++i) {
    long best = 0;
    double best_d = (data.points.row(i) - centroids.centroids.row(0)).squaredNorm();
    for (int q = 1; q < centroids.k(); ++q) {
      const double d = (data.points.row(i) - centroids.centroids.row(q)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
    labels[i] = static_cast<int>(best) + 1;
  }
  return labels;
}

AllocationReport kmeans_posterior_allocate(const DrawBundle& bundle, int k_star, long h,
                                           const Dataset& data, const RngStream& rng,
                                           int threads, int restarts,
                                           double max_failure_fraction) {
  if (h < k_star) throw ValidationError("kmeans_posterior_allocate: h must be >= k_star");
  const long m = bundle.size();
  std::vector<std::optional<std::vector<int>>> columns(m);
  std::vector<std::string> errors(m);
  parallel_for_index(m, threads, [&](long j) {
    RngStream stream = rng.child(static_cast<std::uint64_t>(j));
    try {
      Dataset pts(bundle.draws[j].sample_n(stream, h));
      const CentroidSet centroids = kmeans_fit(pts, k_star, stream.child(0x1c3), restarts);
      columns[j] = kmeans_assign(centroids, data);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  });
  std::vector<long> kept;
  for (long j = 0; j < m; ++j)
    if (columns[j]) kept.push_back(j);
  const long failed = m - static_cast<long>(kept.size());
  if (kept.empty() || static_cast<double>(failed) / static_cast<double>(m) >
                          max_failure_fraction) {
    std::string detail;
    for (long j = 0; j < m && detail.size() < 300; ++j)
      if (!errors[j].empty() && detail.find(errors[j]) == std::string::npos)
        detail += (detail.empty() ? "" : "; ") + errors[j];
    throw NumericalError("kmeans_posterior_allocate: " + std::to_string(failed) + " of " +
                         std::to_string(m) + " per-draw fits failed (" + detail + ")");
  }
  Eigen::MatrixXi draw_labels(data.size(), static_cast<long>(kept.size()));
  for (std::size_t col = 0; col < kept.size(); ++col) {
    const std::vector<int>& labels = *columns[kept[col]];
    for (long i = 0; i < data.size(); ++i) draw_labels(i, static_cast<long>(col)) = labels[i];
  }
  return report_from_label_matrix(std::move(draw_labels), ClusterLoss::KMeans, k_star);
}

}  // namespace mixsum
