#pragma once

// Discrete counterparts of the accelerated flows: heavy ball, conjugate gradient in
// two-sequence form, Nesterov in one- and two-step form, and semi-implicit
// accelerated (quasi-)Newton steps.

#include "accel/control.hpp"
#include "accel/metric.hpp"
#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace accel {

namespace detail {
inline bool escaped(const Vector& x) { return !x.allFinite() || x.norm() > 1e12; }
}  // namespace detail

struct IterateAux {
  Scalar alpha = 0;
  /// Momentum coefficient; the CG parameter beta^CG for cg_iterate.
  Scalar beta = 0;
  Scalar gamma = 0;
  Vector g;
  /// Search direction (CG) or velocity (accelerated Newton); empty otherwise.
  Vector v;
};

/// points[k] is x_k; aux[k] describes the step that produced points[k + 1].
struct IterateSequence {
  std::vector<Vector> points;
  std::vector<IterateAux> aux;

  std::size_t iterations() const { return points.empty() ? 0 : points.size() - 1; }
};

/// x_{k+1} = x_k - alpha g_k + beta (x_k - x_{k-1}).
inline Vector heavy_ball_step(const ObjectiveOracle& oracle, const Vector& x_k,
                              const Vector& x_km1, Scalar alpha_k, Scalar beta_k) {
  detail::require_same_dim(x_k.size(), x_km1.size(), "heavy_ball_step");
  return x_k - alpha_k * oracle.gradient(x_k) + beta_k * (x_k - x_km1);
}

/// Momentum coefficient that makes heavy ball reproduce CG: alpha_k beta^CG_k / alpha_{k-1}.
inline Scalar cg_to_momentum(Scalar alpha_k, Scalar alpha_km1, Scalar beta_cg_k) {
  detail::require(alpha_km1 != 0, "cg_to_momentum: alpha_{k-1} must be nonzero");
  return alpha_k * beta_cg_k / alpha_km1;
}

/// Step length for CG: (k, x_k, v_k, g_k) -> alpha_k.
using StepRule = std::function<Scalar(std::size_t, const Vector&, const Vector&, const Vector&)>;
/// CG parameter: (k, g_k, g_{k-1}, v_{k-1}) -> beta^CG_k, only called for k >= 1.
using BetaRule = std::function<Scalar(std::size_t, const Vector&, const Vector&, const Vector&)>;

inline StepRule fixed_step(Scalar alpha) {
  return [alpha](std::size_t, const Vector&, const Vector&, const Vector&) { return alpha; };
}

/// Exact minimizer of E along v for a quadratic: -g^T v / v^T H v.
inline StepRule exact_quadratic_step(const ObjectiveOracle& oracle) {
  return [&oracle](std::size_t, const Vector& x, const Vector& v, const Vector& g) {
    const Scalar curv = v.dot(oracle.hessian(x) * v);
    detail::require(curv > 0, "exact_quadratic_step: non-positive curvature along v");
    return -g.dot(v) / curv;
  };
}

inline StepRule step_schedule(std::vector<Scalar> alphas) {
  return [a = std::move(alphas)](std::size_t k, const Vector&, const Vector&, const Vector&) {
    return a.at(k);
  };
}

inline BetaRule fletcher_reeves() {
  return [](std::size_t, const Vector& g, const Vector& g_prev, const Vector&) {
    return g.squaredNorm() / g_prev.squaredNorm();
  };
}

inline BetaRule beta_schedule(std::vector<Scalar> betas) {
  return [b = std::move(betas)](std::size_t k, const Vector&, const Vector&, const Vector&) {
    return b.at(k);
  };
}

/// Two-sequence CG: v_k = -g_k + beta^CG_k v_{k-1} (v_0 = -g_0), x_{k+1} = x_k + alpha_k v_k.
/// Stops early once |g_k| <= gtol.
inline IterateSequence cg_iterate(const ObjectiveOracle& oracle, const Vector& x0,
                                  std::size_t steps, const StepRule& alpha_rule,
                                  const BetaRule& beta_cg_rule, Scalar gtol = 0) {
  IterateSequence seq;
  seq.points.push_back(x0);
  Vector x = x0;
  Vector g_prev, v_prev;
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector g = oracle.gradient(x);
    if (g.norm() <= gtol || g.norm() == 0) break;
    const Scalar beta = k == 0 ? 0 : beta_cg_rule(k, g, g_prev, v_prev);
    const Vector v = k == 0 ? Vector(-g) : Vector(-g + beta * v_prev);
    const Scalar alpha = alpha_rule(k, x, v, g);
    x = x + alpha * v;
    seq.points.push_back(x);
    seq.aux.push_back(IterateAux{alpha, beta, 0, g, v});
    if (detail::escaped(x)) break;
    g_prev = g;
    v_prev = v;
  }
  return seq;
}

/// Heavy ball with per-step (alpha_k, beta_k) from x_0 and x_{-1}.
inline IterateSequence heavy_ball_iterate(const ObjectiveOracle& oracle, const Vector& x0,
                                          const Vector& x_m1, const std::vector<Scalar>& alphas,
                                          const std::vector<Scalar>& betas, Scalar gtol = 0) {
  detail::require(alphas.size() == betas.size(), "heavy_ball_iterate: schedule size mismatch");
  IterateSequence seq;
  seq.points.push_back(x0);
  Vector x = x0, x_prev = x_m1;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const Vector g = oracle.gradient(x);
    if (g.norm() <= gtol) break;
    Vector next = x - alphas[k] * g + betas[k] * (x - x_prev);
    seq.aux.push_back(IterateAux{alphas[k], betas[k], 0, g, {}});
    x_prev = std::move(x);
    x = std::move(next);
    seq.points.push_back(x);
    if (detail::escaped(x)) break;
  }
  return seq;
}

/// x_k = y_k - alpha grad E(y_k); y_{k+1} = x_k + beta (x_k - x_{k-1}).
inline std::pair<Vector, Vector> nesterov_two_step(const ObjectiveOracle& oracle,
                                                   const Vector& y_k, const Vector& x_km1,
                                                   Scalar alpha_k, Scalar beta_k) {
  detail::require_same_dim(y_k.size(), x_km1.size(), "nesterov_two_step");
  Vector x_k = y_k - alpha_k * oracle.gradient(y_k);
  Vector y_kp1 = x_k + beta_k * (x_k - x_km1);
  return {std::move(x_k), std::move(y_kp1)};
}

/// Heavy ball with gradient correction:
/// x_{k+1} = x_k - alpha g_k + beta (x_k - x_{k-1}) - gamma (g_k - g_{k-1}).
inline Vector nesterov_one_step(const ObjectiveOracle& oracle, const Vector& x_k,
                                const Vector& x_km1, const Vector& g_km1, Scalar alpha_k,
                                Scalar beta_k, Scalar gamma_k) {
  detail::require_same_dim(x_k.size(), x_km1.size(), "nesterov_one_step");
  detail::require_same_dim(x_k.size(), g_km1.size(), "nesterov_one_step(g)");
  const Vector g = oracle.gradient(x_k);
  return x_k - alpha_k * g + beta_k * (x_k - x_km1) - gamma_k * (g - g_km1);
}

struct DiscreteCoefficients {
  Scalar alpha = 0;
  Scalar beta = 0;
  Scalar gamma = 0;
};

/// Finite-difference map from x'' + ga grad E + gb x' + gc Hess E x' = 0 to the
/// one-step form: alpha = ga h^2, beta = 1 - gb h, gamma = gc h.
inline DiscreteCoefficients flow_to_discrete(const Gains& gains, Scalar h) {
  detail::require(h > 0, "flow_to_discrete: h must be positive");
  detail::require(1 - gains.gamma_b * h >= 0,
                  "flow_to_discrete: 1 - gamma_b h < 0 (unstable momentum coefficient)");
  return {gains.gamma_a * h * h, 1 - gains.gamma_b * h, gains.gamma_c * h};
}

/// Semi-implicit Euler on x'' = -W^{-1}(ga grad E + gb x'):
/// v_{k+1} = v_k - h W^{-1}(ga g_k + gb v_k), x_{k+1} = x_k + h v_{k+1}.
inline std::pair<Vector, Vector> accelerated_newton_step(const ObjectiveOracle& oracle,
                                                         const MetricSpec& metric,
                                                         const Vector& x_k, const Vector& v_k,
                                                         const Gains& gains, Scalar h) {
  detail::require(h > 0, "accelerated_newton_step: h must be positive");
  detail::require_same_dim(x_k.size(), v_k.size(), "accelerated_newton_step");
  const Matrix W = metric_matrix(metric, oracle, x_k);
  const Vector g = oracle.gradient(x_k);
  Vector v = v_k - h * metric_solve(W, gains.gamma_a * g + gains.gamma_b * v_k);
  Vector x = x_k + h * v;
  return {std::move(x), std::move(v)};
}

// Drivers with constant coefficients, stopping at |grad E| <= gtol.

inline IterateSequence heavy_ball_run(const ObjectiveOracle& oracle, const Vector& x0,
                                      Scalar alpha, Scalar beta, std::size_t max_iters,
                                      Scalar gtol) {
  return heavy_ball_iterate(oracle, x0, x0, std::vector<Scalar>(max_iters, alpha),
                            std::vector<Scalar>(max_iters, beta), gtol);
}

/// One-step Nesterov form from x_{-1} = x_0, g_{-1} = grad E(x_0).
inline IterateSequence nesterov_one_step_run(const ObjectiveOracle& oracle, const Vector& x0,
                                             Scalar alpha, Scalar beta, Scalar gamma,
                                             std::size_t max_iters, Scalar gtol) {
  IterateSequence seq;
  seq.points.push_back(x0);
  Vector x = x0, x_prev = x0;
  Vector g_prev = oracle.gradient(x0);
  for (std::size_t k = 0; k < max_iters; ++k) {
    const Vector g = oracle.gradient(x);
    if (g.norm() <= gtol) break;
    Vector next = nesterov_one_step(oracle, x, x_prev, g_prev, alpha, beta, gamma);
    seq.aux.push_back(IterateAux{alpha, beta, gamma, g, {}});
    g_prev = g;
    x_prev = std::move(x);
    x = std::move(next);
    seq.points.push_back(x);
    if (detail::escaped(x)) break;
  }
  return seq;
}

/// Two-step Nesterov from y_0 = x0, x_{-1} = y_0 - alpha grad E(y_0). Records the
/// y-sequence, whose gradients drive the method.
inline IterateSequence nesterov_two_step_run(const ObjectiveOracle& oracle, const Vector& x0,
                                             Scalar alpha, Scalar beta, std::size_t max_iters,
                                             Scalar gtol) {
  IterateSequence seq;
  seq.points.push_back(x0);
  Vector y = x0;
  Vector x_prev = x0 - alpha * oracle.gradient(x0);
  for (std::size_t k = 0; k < max_iters; ++k) {
    const Vector g = oracle.gradient(y);
    if (g.norm() <= gtol) break;
    auto [x_k, y_next] = nesterov_two_step(oracle, y, x_prev, alpha, beta);
    seq.aux.push_back(IterateAux{alpha, beta, alpha * beta, g, {}});
    x_prev = std::move(x_k);
    y = std::move(y_next);
    seq.points.push_back(y);
    if (detail::escaped(y)) break;
  }
  return seq;
}

/// Accelerated (quasi-)Newton iteration from v_0 = 0. A QuasiNewton metric is updated
/// after every step from (x_{k+1} - x_k, g_{k+1} - g_k).
inline IterateSequence accelerated_newton_run(const ObjectiveOracle& oracle, MetricSpec metric,
                                              const Vector& x0, const Gains& gains, Scalar h,
                                              std::size_t max_iters, Scalar gtol) {
  IterateSequence seq;
  seq.points.push_back(x0);
  Vector x = x0;
  Vector v = Vector::Zero(x0.size());
  for (std::size_t k = 0; k < max_iters; ++k) {
    const Vector g = oracle.gradient(x);
    if (g.norm() <= gtol) break;
    auto [x_next, v_next] = accelerated_newton_step(oracle, metric, x, v, gains, h);
    if (metric.kind == MetricKind::QuasiNewton)
      metric = quasi_newton_update(metric, x_next - x, oracle.gradient(x_next) - g);
    seq.aux.push_back(IterateAux{gains.gamma_a, gains.gamma_b, 0, g, v_next});
    x = std::move(x_next);
    v = std::move(v_next);
    seq.points.push_back(x);
    if (detail::escaped(x)) break;
  }
  return seq;
}

}  // namespace accel
