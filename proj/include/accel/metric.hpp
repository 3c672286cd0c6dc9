#pragma once

// Control-space metric W: Euclidean, (safeguarded) Hessian, or a quasi-Newton
// approximation B maintained by a damped BFGS update.

#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <optional>
#include <sstream>
#include <string_view>

namespace accel {

enum class MetricKind { Euclidean, Hessian, QuasiNewton };

inline std::string_view to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Hessian: return "hessian";
    case MetricKind::QuasiNewton: return "quasi_newton";
  }
  return "?";
}

struct MetricSpec {
  MetricKind kind = MetricKind::Euclidean;
  Scalar eig_floor = 1e-6;
  /// Current B for QuasiNewton. Unset means identity.
  std::optional<Matrix> qn_state;

  void validate() const {
    detail::require(eig_floor > 0, "MetricSpec: eig_floor must be positive");
  }
};

/// Symmetrizes M and shifts it by tau*I so the smallest eigenvalue is at least floor.
inline Matrix floor_spectrum(const Matrix& M, Scalar floor) {
  Matrix S = 0.5 * (M + M.transpose());
  const Scalar min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < floor) S.diagonal().array() += floor - min_eig;
  return S;
}

inline Matrix metric_matrix(const MetricSpec& spec, const ObjectiveOracle& oracle,
                            const Vector& x) {
  const Eigen::Index n = oracle.dim();
  switch (spec.kind) {
    case MetricKind::Euclidean:
      return Matrix::Identity(n, n);
    case MetricKind::Hessian:
      return floor_spectrum(oracle.hessian(x), spec.eig_floor);
    case MetricKind::QuasiNewton:
      if (!spec.qn_state) return Matrix::Identity(n, n);
      detail::require_same_dim(spec.qn_state->rows(), n, "metric_matrix(qn_state)");
      return *spec.qn_state;
  }
  throw InvalidArgument("metric_matrix: unknown metric kind");
}

/// Solves W s = rhs by Cholesky. Throws NumericalError if W is not positive definite.
inline Vector metric_solve(const Matrix& W, const Vector& rhs) {
  detail::require_same_dim(W.rows(), rhs.size(), "metric_solve");
  detail::require_same_dim(W.cols(), rhs.size(), "metric_solve");
  Eigen::LLT<Matrix> llt(W);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("metric_solve: W is not positive definite (Cholesky failed)");
  }
  Vector s = llt.solve(rhs);
  if (!s.allFinite()) throw NumericalError("metric_solve: non-finite solution");
  return s;
}

/// BFGS update of B with Powell damping. Pairs with s^T y < 1e-10 |s| |y| are skipped.
inline MetricSpec quasi_newton_update(const MetricSpec& spec, const Vector& s,
                                      const Vector& g_delta) {
  detail::require(spec.kind == MetricKind::QuasiNewton,
                  "quasi_newton_update: metric kind must be QuasiNewton");
  detail::require_same_dim(s.size(), g_delta.size(), "quasi_newton_update");
  const Eigen::Index n = s.size();
  MetricSpec next = spec;
  const Matrix B = spec.qn_state ? *spec.qn_state : Matrix(Matrix::Identity(n, n));
  detail::require_same_dim(B.rows(), n, "quasi_newton_update(qn_state)");

  const Scalar sy = s.dot(g_delta);
  if (!(sy >= 1e-10 * s.norm() * g_delta.norm()) || s.norm() == 0) {
    next.qn_state = B;
    return next;
  }
  const Vector Bs = B * s;
  const Scalar sBs = s.dot(Bs);
  Vector r = g_delta;
  Scalar sr = sy;
  if (sy < 0.2 * sBs) {
    const Scalar theta = 0.8 * sBs / (sBs - sy);
    r = theta * g_delta + (1 - theta) * Bs;
    sr = s.dot(r);
  }
  Matrix Bn = B - (Bs * Bs.transpose()) / sBs + (r * r.transpose()) / sr;
  next.qn_state = floor_spectrum(Bn, spec.eig_floor);
  return next;
}

}  // namespace accel
