#pragma once

// Smooth objective oracles and the benchmark catalog.

#include "accel/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

namespace accel {

/// Evaluates E, its gradient and its Hessian. Stateless after construction,
/// so a single oracle may be shared across threads.
class ObjectiveOracle {
public:
  using ValueFn = std::function<Scalar(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  ObjectiveOracle(Eigen::Index dim, ValueFn value, GradientFn gradient, HessianFn hessian)
      : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)),
        hessian_(std::move(hessian)) {
    detail::require(dim_ > 0, "ObjectiveOracle: dimension must be positive");
  }

  Eigen::Index dim() const { return dim_; }

  Scalar value(const Vector& x) const {
    detail::require_same_dim(x.size(), dim_, "ObjectiveOracle::value");
    return value_(x);
  }
  Vector gradient(const Vector& x) const {
    detail::require_same_dim(x.size(), dim_, "ObjectiveOracle::gradient");
    return gradient_(x);
  }
  Matrix hessian(const Vector& x) const {
    detail::require_same_dim(x.size(), dim_, "ObjectiveOracle::hessian");
    return hessian_(x);
  }

private:
  Eigen::Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

struct ProblemInstance {
  std::string name;
  ObjectiveOracle oracle;
  std::optional<Vector> x_star;
  std::optional<Scalar> e_star;
  Vector x0;
};

/// Central-difference gradient, component i = (E(x+h e_i) - E(x-h e_i)) / 2h.
inline Vector finite_diff_gradient(const ObjectiveOracle& oracle, const Vector& x,
                                   Scalar h = 1e-6) {
  detail::require(h > 0, "finite_diff_gradient: step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar xi = x[i];
    xp[i] = xi + h;
    const Scalar fp = oracle.value(xp);
    xp[i] = xi - h;
    const Scalar fm = oracle.value(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

/// Central differences of the analytic gradient; column j approximates d(grad)/dx_j.
inline Matrix finite_diff_hessian(const ObjectiveOracle& oracle, const Vector& x,
                                  Scalar h = 1e-5) {
  detail::require(h > 0, "finite_diff_hessian: step must be positive");
  const Eigen::Index n = x.size();
  Matrix H(n, n);
  Vector xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar xj = x[j];
    xp[j] = xj + h;
    const Vector gp = oracle.gradient(xp);
    xp[j] = xj - h;
    const Vector gm = oracle.gradient(xp);
    xp[j] = xj;
    H.col(j) = (gp - gm) / (2 * h);
  }
  return H;
}

/// E(x) = 1/2 (x - x*)^T Q (x - x*). Q must be symmetric positive definite.
inline ProblemInstance make_quadratic(const Matrix& Q, const Vector& x_star, const Vector& x0,
                                      std::string name = "quadratic") {
  const Eigen::Index n = Q.rows();
  detail::require(n > 0 && Q.cols() == n, "make_quadratic: Q must be square and non-empty");
  detail::require_same_dim(x_star.size(), n, "make_quadratic(x_star)");
  detail::require_same_dim(x0.size(), n, "make_quadratic(x0)");
  const Scalar asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(Scalar(1), Q.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "make_quadratic: Q is not symmetric (max |Q - Q^T| = " << asym << ")";
    throw InvalidArgument(os.str());
  }
  const Matrix Qs = 0.5 * (Q + Q.transpose());
  const Scalar min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(Qs, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (!(min_eig > 0)) {
    std::ostringstream os;
    os << "make_quadratic: Q is not positive definite (min eigenvalue " << min_eig << ")";
    throw InvalidArgument(os.str());
  }
  ObjectiveOracle oracle(
      n,
      [Qs, x_star](const Vector& x) {
        const Vector d = x - x_star;
        return 0.5 * d.dot(Qs * d);
      },
      [Qs, x_star](const Vector& x) -> Vector { return Qs * (x - x_star); },
      [Qs](const Vector&) -> Matrix { return Qs; });
  return ProblemInstance{std::move(name), std::move(oracle), x_star, Scalar(0), x0};
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix.
inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix G(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Qm = qr.householderQ() * Matrix::Identity(n, n);
  const Vector d = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < n; ++j)
    if (d[j] < 0) Qm.col(j) *= -1;
  return Qm;
}

/// Quadratic with spectrum log-spaced on [1, condition], minimizer at the origin.
/// x0 defaults to a standard normal draw from the same seed.
inline ProblemInstance make_conditioned_quadratic(Eigen::Index n, Scalar condition,
                                                  std::uint64_t seed,
                                                  std::optional<Vector> x0 = std::nullopt) {
  detail::require(n > 0, "make_conditioned_quadratic: dimension must be positive");
  detail::require(condition >= 1, "make_conditioned_quadratic: condition number must be >= 1");
  std::mt19937_64 rng(seed);
  const Matrix U = random_orthogonal(n, rng);
  Vector spectrum(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar frac = n == 1 ? 0.0 : Scalar(i) / Scalar(n - 1);
    spectrum[i] = std::pow(condition, frac);
  }
  Matrix Q = U * spectrum.asDiagonal() * U.transpose();
  Q = 0.5 * (Q + Q.transpose());
  Vector start(n);
  if (x0) {
    start = *x0;
  } else {
    std::normal_distribution<Scalar> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) start[i] = normal(rng);
  }
  return make_quadratic(Q, Vector::Zero(n), start, "quadratic");
}

/// E(x) = 100 (x2 - x1^2)^2 + (1 - x1)^2.
inline ProblemInstance make_rosenbrock(const Vector& x0) {
  detail::require_same_dim(x0.size(), 2, "make_rosenbrock(x0)");
  ObjectiveOracle oracle(
      2,
      [](const Vector& x) {
        const Scalar r = x[1] - x[0] * x[0];
        const Scalar s = 1 - x[0];
        return 100 * r * r + s * s;
      },
      [](const Vector& x) -> Vector {
        const Scalar r = x[1] - x[0] * x[0];
        Vector g(2);
        g << -2 * (1 - x[0]) - 400 * x[0] * r, 200 * r;
        return g;
      },
      [](const Vector& x) -> Matrix {
        Matrix H(2, 2);
        H << 1200 * x[0] * x[0] - 400 * x[1] + 2, -400 * x[0], -400 * x[0], 200;
        return H;
      });
  return ProblemInstance{"rosenbrock", std::move(oracle), Vector::Ones(2), Scalar(0), x0};
}

/// E(x) = log sum_i exp(a_i^T x + b_i), with rows a_i of A. Convex and smooth; bounded
/// below when the origin lies in the interior of the convex hull of the rows.
inline ProblemInstance make_log_sum_exp(const Matrix& A, const Vector& b, const Vector& x0) {
  detail::require(A.rows() > 0 && A.cols() > 0, "make_log_sum_exp: A must be non-empty");
  detail::require_same_dim(b.size(), A.rows(), "make_log_sum_exp(b)");
  detail::require_same_dim(x0.size(), A.cols(), "make_log_sum_exp(x0)");
  // Softmax weights of the affine forms, shifted by the max for stability.
  auto weights = [A, b](const Vector& x, Scalar* log_sum) {
    const Vector z = A * x + b;
    const Scalar zmax = z.maxCoeff();
    Vector p = (z.array() - zmax).exp().matrix();
    const Scalar s = p.sum();
    if (log_sum) *log_sum = zmax + std::log(s);
    return Vector(p / s);
  };
  ObjectiveOracle oracle(
      A.cols(),
      [weights](const Vector& x) {
        Scalar lse = 0;
        weights(x, &lse);
        return lse;
      },
      [weights, A](const Vector& x) -> Vector { return A.transpose() * weights(x, nullptr); },
      [weights, A](const Vector& x) -> Matrix {
        const Vector p = weights(x, nullptr);
        const Matrix Ap = A.transpose() * p;
        Matrix H = A.transpose() * p.asDiagonal() * A - Ap * Ap.transpose();
        return 0.5 * (H + H.transpose());
      });
  return ProblemInstance{"logsumexp", std::move(oracle), std::nullopt, std::nullopt, x0};
}

/// Log-sum-exp over m random affine forms plus the 2n forms +-e_i, which keeps
/// the function coercive.
inline ProblemInstance make_log_sum_exp(Eigen::Index n, Eigen::Index m, std::uint64_t seed,
                                        std::optional<Vector> x0 = std::nullopt) {
  detail::require(n > 0 && m >= 0, "make_log_sum_exp: n must be positive and m non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix A(m + 2 * n, n);
  Vector b(m + 2 * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = normal(rng);
    b[i] = 0.5 * normal(rng);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    A.row(m + 2 * j) = Vector::Unit(n, j).transpose();
    A.row(m + 2 * j + 1) = -Vector::Unit(n, j).transpose();
    b[m + 2 * j] = 0;
    b[m + 2 * j + 1] = 0;
  }
  Vector start(n);
  if (x0) {
    start = *x0;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) start[i] = normal(rng);
  }
  return make_log_sum_exp(A, b, start);
}

}  // namespace accel
