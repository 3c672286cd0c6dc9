#pragma once

// Closed-loop integration of the controlled double integrator with swept cost
// y' = grad E(x)^T v and co-integrated adjoints.

#include "accel/clf.hpp"
#include "accel/control.hpp"
#include "accel/metric.hpp"
#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace accel {

enum class FlowMode { Reduced, FullPrimalDual };
enum class Integrator { RK4, SemiImplicitEuler };

inline std::string_view to_string(FlowMode m) {
  return m == FlowMode::Reduced ? "reduced" : "full_primal_dual";
}
inline std::string_view to_string(Integrator i) {
  return i == Integrator::RK4 ? "rk4" : "semi_implicit_euler";
}

/// Primal state (t, x, v, y) and adjoints (lambda_x, lambda_v, lambda_y).
/// Also used for time derivatives, in which case t holds dt/dt = 1.
struct AugmentedState {
  Scalar t = 0;
  Vector x;
  Vector v;
  Scalar y = 0;
  Vector lambda_x;
  Vector lambda_v;
  Scalar lambda_y = 1;

  Eigen::Index dim() const { return x.size(); }

  /// Boundary data at t0: y = E(x0), lambda_x = -grad E(x0), lambda_v = 0, lambda_y = 1.
  static AugmentedState consistent(const ObjectiveOracle& oracle, const Vector& x0,
                                   std::optional<Vector> v0 = std::nullopt, Scalar t0 = 0) {
    AugmentedState s;
    s.t = t0;
    s.x = x0;
    s.v = v0 ? *v0 : Vector(Vector::Zero(x0.size()));
    s.y = oracle.value(x0);
    s.lambda_x = -oracle.gradient(x0);
    s.lambda_v = Vector::Zero(x0.size());
    s.lambda_y = 1;
    return s;
  }

  bool finite() const {
    return std::isfinite(t) && std::isfinite(y) && std::isfinite(lambda_y) && x.allFinite() &&
           v.allFinite() && lambda_x.allFinite() && lambda_v.allFinite();
  }
};

/// Returns s + a * d, field by field.
inline AugmentedState advance(const AugmentedState& s, const AugmentedState& d, Scalar a) {
  AugmentedState r;
  r.t = s.t + a * d.t;
  r.x = s.x + a * d.x;
  r.v = s.v + a * d.v;
  r.y = s.y + a * d.y;
  r.lambda_x = s.lambda_x + a * d.lambda_x;
  r.lambda_v = s.lambda_v + a * d.lambda_v;
  r.lambda_y = s.lambda_y + a * d.lambda_y;
  return r;
}

/// Time derivative of the augmented state under the closed loop. The controller sees
/// lambda_x = -grad E(x); the co-integrated lambda_x only feeds lambda_v' in
/// FullPrimalDual mode.
inline AugmentedState closed_loop_rhs(const ControllerSpec& controller,
                                      const ObjectiveOracle& oracle, const AugmentedState& s,
                                      FlowMode mode) {
  detail::require_same_dim(s.x.size(), oracle.dim(), "closed_loop_rhs(x)");
  detail::require_same_dim(s.v.size(), oracle.dim(), "closed_loop_rhs(v)");
  detail::require_same_dim(s.lambda_x.size(), oracle.dim(), "closed_loop_rhs(lambda_x)");
  detail::require_same_dim(s.lambda_v.size(), oracle.dim(), "closed_loop_rhs(lambda_v)");
  const Vector g = oracle.gradient(s.x);
  const Matrix H = oracle.hessian(s.x);
  AugmentedState d;
  d.t = 1;
  d.x = s.v;
  d.v = evaluate_control(controller, oracle, s.x, -g, s.v);
  d.y = g.dot(s.v);
  d.lambda_x = -s.lambda_y * (H * s.v);
  if (mode == FlowMode::FullPrimalDual) {
    d.lambda_v = -s.lambda_x - s.lambda_y * g;
  } else {
    d.lambda_v = Vector::Zero(s.x.size());
  }
  d.lambda_y = 0;
  return d;
}

struct StoppingRule {
  Scalar tol_g = 1e-6;
  Scalar tol_v = 1e-6;
};

struct FlowOptions {
  Scalar h = 1e-3;
  Scalar t_max = 1e3;
  Integrator method = Integrator::RK4;
  FlowMode mode = FlowMode::Reduced;
  StoppingRule stop;
  /// Keep every k-th step; the first and last states are always kept.
  std::size_t record_stride = 1;
  Scalar divergence_bound = 1e12;
};

enum class FlowStatus { Converged, MaxTime, Diverged, Infeasible, NumericalFailure };

inline std::string_view to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxTime: return "max_time";
    case FlowStatus::Diverged: return "diverged";
    case FlowStatus::Infeasible: return "infeasible";
    case FlowStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct TrajectorySample {
  AugmentedState state;
  Vector u;
  Scalar E = 0;
  Scalar grad_norm = 0;
  Scalar V = 0;
  Scalar lieV = 0;
};

struct TrajectoryMeta {
  std::string problem;
  ControlFamily family = ControlFamily::Direct;
  MetricKind metric = MetricKind::Euclidean;
  ClfParams clf;
  Scalar h = 0;
  Integrator integrator = Integrator::RK4;
  FlowMode mode = FlowMode::Reduced;
};

/// Gradient-norm decade 10^-k and the first time it was reached.
struct DecadeHit {
  int exponent = 0;
  Scalar t = 0;
  std::size_t step = 0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  TrajectoryMeta meta;
  FlowStatus status = FlowStatus::MaxTime;
  std::string message;
  std::size_t steps = 0;
  std::vector<DecadeHit> decade_hits;

  bool diverged() const { return status == FlowStatus::Diverged; }
  const TrajectorySample& final_sample() const { return samples.back(); }
};

/// Diagnostics at a state: the applied control, V and its Lie derivative, all with
/// the singular-arc adjoint lambda_x = -grad E(x).
inline TrajectorySample make_sample(const ControllerSpec& controller,
                                    const ObjectiveOracle& oracle, const AugmentedState& s) {
  TrajectorySample smp;
  smp.state = s;
  const Vector g = oracle.gradient(s.x);
  const Vector lambda = -g;
  smp.u = evaluate_control(controller, oracle, s.x, lambda, s.v);
  smp.E = oracle.value(s.x);
  smp.grad_norm = g.norm();
  smp.V = clf_value(controller.clf, lambda, s.v);
  smp.lieV = lie_derivative(controller.clf, oracle.hessian(s.x), lambda, s.v, smp.u);
  return smp;
}

namespace detail {

inline AugmentedState rk4_step(const ControllerSpec& c, const ObjectiveOracle& o,
                               const AugmentedState& s, Scalar h, FlowMode mode) {
  const AugmentedState k1 = closed_loop_rhs(c, o, s, mode);
  const AugmentedState k2 = closed_loop_rhs(c, o, advance(s, k1, h / 2), mode);
  const AugmentedState k3 = closed_loop_rhs(c, o, advance(s, k2, h / 2), mode);
  const AugmentedState k4 = closed_loop_rhs(c, o, advance(s, k3, h), mode);
  AugmentedState r = advance(s, k1, h / 6);
  r = advance(r, k2, h / 3);
  r = advance(r, k3, h / 3);
  r = advance(r, k4, h / 6);
  return r;
}

// Velocity first, then position, swept cost and lambda_x with the new velocity.
inline AugmentedState semi_implicit_euler_step(const ControllerSpec& c, const ObjectiveOracle& o,
                                               const AugmentedState& s, Scalar h,
                                               FlowMode mode) {
  const AugmentedState d = closed_loop_rhs(c, o, s, mode);
  const Vector g = o.gradient(s.x);
  AugmentedState r = s;
  r.t = s.t + h;
  r.v = s.v + h * d.v;
  r.x = s.x + h * r.v;
  r.y = s.y + h * g.dot(r.v);
  r.lambda_x = s.lambda_x - h * s.lambda_y * (o.hessian(s.x) * r.v);
  r.lambda_v = s.lambda_v + h * d.lambda_v;
  return r;
}

}  // namespace detail

/// Fixed-step integration until the stopping rule fires or t reaches t_max.
/// A QuasiNewton metric is updated between steps from (x_{k+1} - x_k, g_{k+1} - g_k).
inline TrajectoryRecord integrate(const ControllerSpec& controller, const ObjectiveOracle& oracle,
                                  const AugmentedState& s0, const FlowOptions& opt,
                                  std::string problem_name = {}) {
  detail::require(opt.h > 0, "integrate: h must be positive");
  detail::require(opt.t_max > 0, "integrate: t_max must be positive");
  detail::require(opt.record_stride >= 1, "integrate: record_stride must be >= 1");
  detail::require_same_dim(s0.x.size(), oracle.dim(), "integrate(x0)");

  ControllerSpec ctrl = controller;
  TrajectoryRecord rec;
  rec.meta = TrajectoryMeta{std::move(problem_name), ctrl.family, ctrl.metric.kind, ctrl.clf,
                            opt.h, opt.method, opt.mode};

  auto stop_fires = [&](const TrajectorySample& smp) {
    return smp.grad_norm <= opt.stop.tol_g && smp.state.v.norm() <= opt.stop.tol_v;
  };
  int next_decade = 0;
  auto note_decades = [&](const TrajectorySample& smp, std::size_t step) {
    while (next_decade <= 15 && smp.grad_norm <= std::pow(10.0, -next_decade)) {
      rec.decade_hits.push_back({next_decade, smp.state.t, step});
      ++next_decade;
    }
  };

  AugmentedState s = s0;
  TrajectorySample current;
  try {
    current = make_sample(ctrl, oracle, s);
  } catch (const InfeasibleControl& e) {
    rec.status = FlowStatus::Infeasible;
    rec.message = e.what();
    rec.samples.push_back(TrajectorySample{s, Vector::Zero(s.dim()), oracle.value(s.x),
                                           oracle.gradient(s.x).norm(), 0, 0});
    return rec;
  }
  rec.samples.push_back(current);
  note_decades(current, 0);
  if (stop_fires(current)) {
    rec.status = FlowStatus::Converged;
    return rec;
  }

  const Scalar t0 = s0.t;
  std::size_t k = 0;
  bool last_recorded = true;
  rec.status = FlowStatus::MaxTime;
  while (s.t - t0 < opt.t_max * (1 - 1e-14)) {
    AugmentedState next;
    try {
      next = opt.method == Integrator::RK4
                 ? detail::rk4_step(ctrl, oracle, s, opt.h, opt.mode)
                 : detail::semi_implicit_euler_step(ctrl, oracle, s, opt.h, opt.mode);
      next.t = t0 + static_cast<Scalar>(k + 1) * opt.h;
    } catch (const InfeasibleControl& e) {
      rec.status = FlowStatus::Infeasible;
      rec.message = e.what();
      break;
    } catch (const NumericalError& e) {
      rec.status = FlowStatus::NumericalFailure;
      rec.message = e.what();
      break;
    }
    if (!next.finite() || next.x.norm() > opt.divergence_bound ||
        next.v.norm() > opt.divergence_bound) {
      rec.status = FlowStatus::Diverged;
      rec.message = "state left the divergence bound at t = " + std::to_string(next.t);
      break;
    }
    if (ctrl.metric.kind == MetricKind::QuasiNewton) {
      ctrl.metric = quasi_newton_update(ctrl.metric, next.x - s.x,
                                        oracle.gradient(next.x) - oracle.gradient(s.x));
    }
    s = std::move(next);
    ++k;
    try {
      current = make_sample(ctrl, oracle, s);
    } catch (const InfeasibleControl& e) {
      rec.status = FlowStatus::Infeasible;
      rec.message = e.what();
      current = TrajectorySample{s, Vector::Zero(s.dim()), oracle.value(s.x),
                                 oracle.gradient(s.x).norm(), 0, 0};
      rec.samples.push_back(current);
      last_recorded = true;
      break;
    }
    note_decades(current, k);
    last_recorded = (k % opt.record_stride == 0);
    if (last_recorded) rec.samples.push_back(current);
    if (stop_fires(current)) {
      rec.status = FlowStatus::Converged;
      break;
    }
  }
  if (!last_recorded) rec.samples.push_back(current);
  rec.steps = k;
  return rec;
}

struct TerminalResiduals {
  Scalar r_grad = 0;
  Scalar r_v = 0;
  Scalar r_lambda_x = 0;
  Scalar r_lambda_v = 0;
};

inline TerminalResiduals terminal_residuals(const AugmentedState& s,
                                            const ObjectiveOracle& oracle) {
  return TerminalResiduals{oracle.gradient(s.x).norm(), s.v.norm(), s.lambda_x.norm(),
                           s.lambda_v.norm()};
}

}  // namespace accel
