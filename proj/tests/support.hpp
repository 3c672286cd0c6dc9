#pragma once

// Shared generators for property-style tests.

#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <random>

namespace accel::testing {

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, Scalar scale = 1.0) {
  std::normal_distribution<Scalar> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Vector uniform_vector(Eigen::Index n, std::mt19937_64& rng, Scalar lo, Scalar hi) {
  std::uniform_real_distribution<Scalar> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Symmetric positive definite matrix with eigenvalues drawn from [lo, hi].
inline Matrix random_spd(Eigen::Index n, std::mt19937_64& rng, Scalar lo = 0.5, Scalar hi = 5) {
  const Matrix U = random_orthogonal(n, rng);
  const Vector d = uniform_vector(n, rng, lo, hi);
  Matrix S = U * d.asDiagonal() * U.transpose();
  return 0.5 * (S + S.transpose());
}

inline ProblemInstance quad1d() {
  return make_quadratic(Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Vector::Constant(1, 3.0));
}

/// E(x) = x^2 in one dimension.
inline ProblemInstance square1d() {
  return make_quadratic(Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Vector::Ones(1));
}

inline Vector vec(std::initializer_list<Scalar> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (Scalar x : xs) v[i++] = x;
  return v;
}

}  // namespace accel::testing
