#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bellnav {

using cplx     = std::complex<double>;
using MatrixC  = Eigen::MatrixXcd;
using VectorC  = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Every failure the library reports derives from Error so the
// CLI can map categories onto exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Angles or vectors outside their admissible range.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Inconsistent or malformed user configuration (parameter counts, keys, grids).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A request that would exceed the dense-feasibility guards.
class ResourceError : public Error {
  public:
    using Error::Error;
};

/// Linear-algebra failure or violated numeric precondition.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Iterative solver stopped before meeting its tolerance.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string &what, double last_delta) : Error(what), last_delta_(last_delta) {}
    [[nodiscard]] double last_delta() const noexcept { return last_delta_; }

  private:
    double last_delta_;
};

} // namespace bellnav
