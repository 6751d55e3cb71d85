#pragma once

#include <stdexcept>
#include <string>

namespace mixsum {

// Bad inputs: config values, file contents, dimension mismatches.
// The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Failures of the numerics themselves: EM collapse, Cholesky breakdown,
// degenerate k-means. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixsum
