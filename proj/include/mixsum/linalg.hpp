#pragma once

#include <Eigen/Dense>

#include "mixsum/dataset.hpp"

namespace mixsum {

// Lower-triangular Cholesky factor of a symmetric PSD matrix, with the
// log-determinant of the factored matrix and the ridge that was needed.
struct CholeskyFactor {
  Matrix lower;
  double log_det = 0.0;   // log|Sigma|
  double ridge = 0.0;     // amount added to the diagonal, 0 if none
};

// Factor a symmetric PSD matrix. Plain factorization is attempted first; on
// failure a single ridge of eps * tr(S)/d is added to the diagonal and the
// factorization retried. Throws NumericalError if that still fails (e.g.
// zero-trace scatter from identical samples).
CholeskyFactor chol_psd(const Matrix& sym, double eps);

// Rowwise log-sum-exp of an N x k matrix; rows of all -inf yield -inf.
Vector log_sum_exp_rows(const Matrix& logs);

}  // namespace mixsum
