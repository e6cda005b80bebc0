#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace floq {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Bad input that the caller could have checked (coincident sites, out-of-range angles).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or unknown configuration; carries a line number when one is known.
struct ConfigError : std::runtime_error {
  int line = 0;
  explicit ConfigError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

// Non-finite numbers, failed eigensolves, dimension caps.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace floq
