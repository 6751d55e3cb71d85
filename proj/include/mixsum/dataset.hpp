#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mixsum/errors.hpp"

namespace mixsum {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// N observations in rows, optional 1-based class labels.
struct Dataset {
  Matrix points;
  std::vector<int> labels;

  Dataset() = default;
  explicit Dataset(Matrix pts, std::vector<int> labs = {})
      : points(std::move(pts)), labels(std::move(labs)) {
    if (!labels.empty() && static_cast<long>(labels.size()) != points.rows())
      throw ValidationError("dataset: label count does not match observation count");
  }

  long size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool has_labels() const { return !labels.empty(); }
  Vector row(long i) const { return points.row(i).transpose(); }
};

}  // namespace mixsum
