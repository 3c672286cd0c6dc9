#pragma once

// Quadratic control Lyapunov function
//   V(lambda, v) = (a/2) lambda^T lambda + (b/2) v^T v + c lambda^T v
// for the auxiliary system  lambda' = -Hess E(x) v,  v' = u.

#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <sstream>

namespace accel {

struct ClfParams {
  Scalar a = 2;
  Scalar b = 1;
  Scalar c = -1;
  /// Additionally demand c < 0, which the drift condition needs when Hess E > 0.
  bool pd_hessian_mode = true;

  void validate() const {
    std::ostringstream os;
    if (!(a > 0)) os << " a > 0;";
    if (!(b > 0)) os << " b > 0;";
    if (c == 0) os << " c != 0;";
    if (!(a * b - c * c > 0)) os << " a*b - c^2 > 0;";
    if (pd_hessian_mode && !(c < 0)) os << " c < 0 (pd_hessian_mode);";
    const std::string failed = os.str();
    if (!failed.empty()) throw InvalidArgument("ClfParams: violated" + failed);
  }
};

/// Scale-aware threshold below which dV/dv is treated as zero.
inline Scalar grad_v_zero_threshold(const Vector& lambda_x, const Vector& v) {
  return 1e-10 * (1 + lambda_x.norm() + v.norm());
}

inline Scalar clf_value(const ClfParams& p, const Vector& lambda_x, const Vector& v) {
  detail::require_same_dim(lambda_x.size(), v.size(), "clf_value");
  return 0.5 * p.a * lambda_x.squaredNorm() + 0.5 * p.b * v.squaredNorm() +
         p.c * lambda_x.dot(v);
}

inline Vector clf_grad_lambda(const ClfParams& p, const Vector& lambda_x, const Vector& v) {
  detail::require_same_dim(lambda_x.size(), v.size(), "clf_grad_lambda");
  return p.a * lambda_x + p.c * v;
}

inline Vector clf_grad_v(const ClfParams& p, const Vector& lambda_x, const Vector& v) {
  detail::require_same_dim(lambda_x.size(), v.size(), "clf_grad_v");
  return p.c * lambda_x + p.b * v;
}

/// Lie derivative of V along the controlled field, given the Hessian at x.
inline Scalar lie_derivative(const ClfParams& p, const Matrix& hessian, const Vector& lambda_x,
                             const Vector& v, const Vector& u) {
  detail::require_same_dim(lambda_x.size(), v.size(), "lie_derivative(lambda, v)");
  detail::require_same_dim(u.size(), v.size(), "lie_derivative(u)");
  detail::require_same_dim(hessian.rows(), v.size(), "lie_derivative(hessian)");
  return -clf_grad_lambda(p, lambda_x, v).dot(hessian * v) + clf_grad_v(p, lambda_x, v).dot(u);
}

inline Scalar lie_derivative(const ClfParams& p, const ObjectiveOracle& oracle, const Vector& x,
                             const Vector& lambda_x, const Vector& v, const Vector& u) {
  return lie_derivative(p, oracle.hessian(x), lambda_x, v, u);
}

struct DriftReport {
  /// False when the state is off the dV/dv = 0 set or at the origin.
  bool applicable = false;
  bool holds = false;
  Scalar drift_term = 0;
};

/// On the set dV/dv = 0 with (lambda, v) != 0 the drift term
/// (dV/dlambda)^T Hess E v must be strictly positive.
inline DriftReport drift_condition_check(const ClfParams& p, const Matrix& hessian,
                                         const Vector& lambda_x, const Vector& v) {
  DriftReport r;
  if (lambda_x.norm() == 0 && v.norm() == 0) return r;
  if (clf_grad_v(p, lambda_x, v).norm() > grad_v_zero_threshold(lambda_x, v)) return r;
  r.applicable = true;
  r.drift_term = clf_grad_lambda(p, lambda_x, v).dot(hessian * v);
  r.holds = r.drift_term > 0;
  return r;
}

inline DriftReport drift_condition_check(const ClfParams& p, const ObjectiveOracle& oracle,
                                         const Vector& x, const Vector& lambda_x,
                                         const Vector& v) {
  return drift_condition_check(p, oracle.hessian(x), lambda_x, v);
}

}  // namespace accel
