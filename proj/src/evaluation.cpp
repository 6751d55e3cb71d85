#include "mixsum/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mixsum {

EvalScore hellinger_mc(const MixtureDraw& truth, const LogDensityFn& candidate_logdensity,
                       const Dataset& samples_from_truth) {
  const Matrix& pts = samples_from_truth.points;
  if (pts.rows() < 2) throw ValidationError("hellinger_mc: need at least 2 samples");
  const Vector log_f = truth.log_density(pts);
  const Vector log_g = candidate_logdensity(pts);
  if (log_g.size() != log_f.size())
    throw ValidationError("hellinger_mc: candidate returned wrong number of values");

  double sum = 0.0, sum_sq = 0.0;
  long used = 0, excluded = 0;
  for (long i = 0; i < pts.rows(); ++i) {
    if (!std::isfinite(log_f[i])) {  // zero/invalid truth density: drop the point
      ++excluded;
      continue;
    }
    const double w = std::isfinite(log_g[i]) ? std::exp(0.5 * (log_g[i] - log_f[i])) : 0.0;
    sum += w;
    sum_sq += w * w;
    ++used;
  }
  if (used < 2) throw NumericalError("hellinger_mc: all samples excluded");
  const double mean_w = sum / static_cast<double>(used);
  const double var_w =
      std::max(0.0, (sum_sq - static_cast<double>(used) * mean_w * mean_w) /
                        static_cast<double>(used - 1));
  const double se_w = std::sqrt(var_w / static_cast<double>(used));
  const double h = std::sqrt(std::max(0.0, 1.0 - mean_w));
  EvalScore score;
  score.metric = "hellinger";
  score.value = std::min(1.0, h);
  score.standard_error = h > 0.0 ? se_w / (2.0 * h) : se_w;
  score.excluded = excluded;
  return score;
}

double hellinger_gaussian(double mean1, double var1, double mean2, double var2) {
  const double s1 = std::sqrt(var1), s2 = std::sqrt(var2);
  const double bc = std::sqrt(2.0 * s1 * s2 / (var1 + var2)) *
                    std::exp(-0.25 * (mean1 - mean2) * (mean1 - mean2) / (var1 + var2));
  return std::sqrt(std::max(0.0, 1.0 - bc));
}

namespace {

std::vector<int> compact_labels(const std::vector<int>& labels, int& k_out) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = remap.emplace(labels[i], static_cast<int>(remap.size())).first;
    out[i] = it->second;
  }
  k_out = static_cast<int>(remap.size());
  return out;
}

double choose2(double n) { return 0.5 * n * (n - 1.0); }

// Kuhn-Munkres on a square cost matrix; returns the minimal total cost
// assignment (row -> column).
double hungarian_min_cost(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

}  // namespace

EvalScore adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("ari: label vectors differ in length");
  if (a.empty()) throw ValidationError("ari: empty label vectors");
  int ka = 0, kb = 0;
  const std::vector<int> ca = compact_labels(a, ka);
  const std::vector<int> cb = compact_labels(b, kb);
  Matrix table = Matrix::Zero(ka, kb);
  for (std::size_t i = 0; i < ca.size(); ++i) table(ca[i], cb[i]) += 1.0;

  double index = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) index += choose2(table(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < ka; ++i) sum_a += choose2(table.row(i).sum());
  for (int j = 0; j < kb; ++j) sum_b += choose2(table.col(j).sum());
  const double total_pairs = choose2(static_cast<double>(a.size()));
  const double expected = total_pairs > 0.0 ? sum_a * sum_b / total_pairs : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);

  EvalScore score;
  score.metric = "ari";
  const double denom = max_index - expected;
  score.value = denom != 0.0 ? (index - expected) / denom : 1.0;
  return score;
}

EvalScore classification_error(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw ValidationError("classification_error: label vectors differ in length");
  if (a.empty()) throw ValidationError("classification_error: empty label vectors");
  int ka = 0, kb = 0;
  const std::vector<int> ca = compact_labels(a, ka);
  const std::vector<int> cb = compact_labels(b, kb);
  if (ka != kb)
    throw ValidationError("classification_error: label alphabets differ in size (" +
                          std::to_string(ka) + " vs " + std::to_string(kb) + ")");
  Matrix confusion = Matrix::Zero(ka, ka);
  for (std::size_t i = 0; i < ca.size(); ++i) confusion(ca[i], cb[i]) += 1.0;
  // Maximize matched counts == minimize (max - counts).
  const double top = confusion.maxCoeff();
  const double matched = top * ka - hungarian_min_cost(Matrix(top - confusion.array()));
  EvalScore score;
  score.metric = "err";
  score.value = 1.0 - matched / static_cast<double>(a.size());
  return score;
}

}  // namespace mixsum
