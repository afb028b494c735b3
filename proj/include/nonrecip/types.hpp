#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nonrecip {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;   // dense square complex operator
using Vector = Eigen::VectorXcd;

constexpr Complex kImag{0.0, 1.0};

// Error hierarchy. The CLI maps these onto process exit codes:
// ConfigError -> 2, numerical failures -> 3, IoError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, Eigen::Index pivot_index)
      : Error(what), pivot(pivot_index) {}
  explicit SingularMatrixError(const std::string& what) : Error(what), pivot(-1) {}
  Eigen::Index pivot;  // 0-based pivot index, -1 if not applicable
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, long iterations_used)
      : Error(what), iterations(iterations_used) {}
  long iterations;
};

class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what, double time = 0.0)
      : Error(what), time_reached(time) {}
  double time_reached;  // last valid time for propagation overflows
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nonrecip
