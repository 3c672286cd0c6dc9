#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace accel {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear algebra step cannot proceed (e.g. Cholesky on a non-PD matrix).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a << " vs " << b << ")";
    throw InvalidArgument(os.str());
  }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// ||a - b|| / max(||a||, ||b||, 1)
inline Scalar relative_error(const Vector& a, const Vector& b) {
  const Scalar scale = std::max({a.norm(), b.norm(), Scalar(1)});
  return (a - b).norm() / scale;
}

inline Scalar relative_error(const Matrix& a, const Matrix& b) {
  const Scalar scale = std::max({a.norm(), b.norm(), Scalar(1)});
  return (a - b).norm() / scale;
}

}  // namespace detail
}  // namespace accel
