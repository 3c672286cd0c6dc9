#pragma once

// Singular feedback laws for the double integrator x'' = u.
//
// All laws receive the adjoint lambda_x; along singular arcs callers supply
// lambda_x = -grad E(x).

#include "accel/clf.hpp"
#include "accel/metric.hpp"
#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace accel {

enum class ControlFamily {
  MinP,      ///< minimize the Lie derivative over the W-ellipsoid u^T W u <= Delta
  MinPStar,  ///< minimum W-norm control meeting the Lie derivative <= -rho constraint
  Direct,    ///< u = K_a lambda + K_b v + K_c Hess E v
  FixedGain  ///< u = -W^{-1}(gamma_a grad E + gamma_b v) with constant gains
};

inline std::string_view to_string(ControlFamily f) {
  switch (f) {
    case ControlFamily::MinP: return "min_p";
    case ControlFamily::MinPStar: return "min_p_star";
    case ControlFamily::Direct: return "direct";
    case ControlFamily::FixedGain: return "fixed_gain";
  }
  return "?";
}

struct Gains {
  Scalar gamma_a = 1;
  Scalar gamma_b = 1;
  Scalar gamma_c = 2;
};

struct GainReport {
  bool holds = true;
  std::vector<std::string> violated;
};

/// Checks the sufficient conditions for a strictly negative Lie derivative under the
/// direct law: K_a > 0, K_b < 0, b K_a = c K_b and K_c = a/c, where
/// K_a = gamma_a, K_b = -gamma_b, K_c = -gamma_c.
inline GainReport validate_direct_gains(const ClfParams& clf, Scalar gamma_a, Scalar gamma_b,
                                        Scalar gamma_c) {
  GainReport r;
  auto fail = [&r](std::string what) {
    r.holds = false;
    r.violated.push_back(std::move(what));
  };
  const Scalar Ka = gamma_a, Kb = -gamma_b, Kc = -gamma_c;
  if (!(clf.c < 0)) fail("c < 0");
  if (!(Ka > 0)) fail("K_a > 0");
  if (!(Kb < 0)) fail("K_b < 0");
  const Scalar lhs = clf.b * Ka, rhs = clf.c * Kb;
  if (std::abs(lhs - rhs) > 1e-12 * std::max({std::abs(lhs), std::abs(rhs), Scalar(1e-300)}))
    fail("b K_a = c K_b");
  if (clf.c != 0) {
    const Scalar target = clf.a / clf.c;
    if (std::abs(Kc - target) > 1e-12 * std::max(std::abs(Kc), std::abs(target)))
      fail("K_c = a/c");
  }
  return r;
}

inline GainReport validate_direct_gains(const ClfParams& clf, const Gains& g) {
  return validate_direct_gains(clf, g.gamma_a, g.gamma_b, g.gamma_c);
}

struct ControllerSpec {
  ControlFamily family = ControlFamily::Direct;
  ClfParams clf;
  MetricSpec metric;
  /// Control-set radius for MinP.
  Scalar delta = 1;
  /// MinP only: use min(delta, |dV/dv|^2) so the control vanishes at equilibrium.
  bool delta_taper = false;
  /// MinPStar descent rate: rho = rate_eta * V.
  Scalar rate_eta = 1;
  /// Direct uses all three; FixedGain uses gamma_a, gamma_b.
  Gains gains;

  void validate() const {
    clf.validate();
    metric.validate();
    switch (family) {
      case ControlFamily::MinP:
        detail::require(delta > 0, "ControllerSpec: delta must be positive");
        break;
      case ControlFamily::MinPStar:
        detail::require(rate_eta > 0, "ControllerSpec: rate_eta must be positive");
        break;
      case ControlFamily::Direct: {
        const GainReport r = validate_direct_gains(clf, gains);
        if (!r.holds) {
          std::string msg = "ControllerSpec: direct gains violate";
          for (const auto& v : r.violated) msg += " [" + v + "]";
          throw InvalidArgument(msg);
        }
        break;
      }
      case ControlFamily::FixedGain:
        detail::require(gains.gamma_a > 0 && gains.gamma_b > 0,
                        "ControllerSpec: fixed gains must be positive");
        break;
    }
  }
};

/// Thrown by the MinPStar law when dV/dv = 0 yet the required descent rate is
/// not met by the drift alone: no control can satisfy the rate constraint.
class InfeasibleControl : public std::runtime_error {
public:
  InfeasibleControl(const std::string& what, DriftReport drift)
      : std::runtime_error(what), drift_(drift) {}
  const DriftReport& drift() const { return drift_; }

private:
  DriftReport drift_;
};

/// Control together with the multiplier sigma such that u = -sigma W^{-1} dV/dv.
struct ControlOutput {
  Vector u;
  Scalar sigma = 0;
  bool active = false;
};

inline ControlOutput min_p_law(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                               const Vector& x, const Vector& lambda_x, const Vector& v) {
  detail::require(spec.delta > 0, "control_min_p: delta must be positive");
  ControlOutput out{Vector::Zero(v.size()), 0, false};
  const Vector dVdv = clf_grad_v(spec.clf, lambda_x, v);
  if (dVdv.norm() <= grad_v_zero_threshold(lambda_x, v)) return out;
  const Matrix W = metric_matrix(spec.metric, oracle, x);
  const Vector w = metric_solve(W, dVdv);
  const Scalar q = dVdv.dot(w);
  const Scalar delta =
      spec.delta_taper ? std::min(spec.delta, dVdv.squaredNorm()) : spec.delta;
  out.sigma = std::sqrt(delta / q);
  out.u = -out.sigma * w;
  out.active = true;
  return out;
}

inline ControlOutput min_p_star_law(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                                    const Vector& x, const Vector& lambda_x, const Vector& v) {
  detail::require(spec.rate_eta > 0, "control_min_p_star: rate_eta must be positive");
  ControlOutput out{Vector::Zero(v.size()), 0, false};
  const Matrix H = oracle.hessian(x);
  const Scalar rho = spec.rate_eta * clf_value(spec.clf, lambda_x, v);
  // Lie derivative at u = 0.
  const Scalar drift = -clf_grad_lambda(spec.clf, lambda_x, v).dot(H * v);
  if (drift + rho <= 0) return out;
  const Vector dVdv = clf_grad_v(spec.clf, lambda_x, v);
  if (dVdv.norm() <= grad_v_zero_threshold(lambda_x, v)) {
    std::ostringstream os;
    os << "control_min_p_star: infeasible at state (dV/dv = 0, drift + rho = " << drift + rho
       << " > 0)";
    throw InfeasibleControl(os.str(), drift_condition_check(spec.clf, H, lambda_x, v));
  }
  const Matrix W = metric_matrix(spec.metric, oracle, x);
  const Vector w = metric_solve(W, dVdv);
  out.sigma = (rho + drift) / dVdv.dot(w);
  out.u = -out.sigma * w;
  out.active = true;
  return out;
}

inline Vector control_min_p(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                            const Vector& x, const Vector& lambda_x, const Vector& v) {
  return min_p_law(spec, oracle, x, lambda_x, v).u;
}

inline Vector control_min_p_star(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                                 const Vector& x, const Vector& lambda_x, const Vector& v) {
  return min_p_star_law(spec, oracle, x, lambda_x, v).u;
}

inline Vector control_direct(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                             const Vector& x, const Vector& lambda_x, const Vector& v) {
  detail::require_same_dim(lambda_x.size(), v.size(), "control_direct");
  const Gains& g = spec.gains;
  return g.gamma_a * lambda_x - g.gamma_b * v - g.gamma_c * (oracle.hessian(x) * v);
}

inline Vector control_fixed_gain(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                                 const Vector& x, const Vector& lambda_x, const Vector& v) {
  detail::require_same_dim(lambda_x.size(), v.size(), "control_fixed_gain");
  const Matrix W = metric_matrix(spec.metric, oracle, x);
  return -metric_solve(W, -spec.gains.gamma_a * lambda_x + spec.gains.gamma_b * v);
}

inline Vector evaluate_control(const ControllerSpec& spec, const ObjectiveOracle& oracle,
                               const Vector& x, const Vector& lambda_x, const Vector& v) {
  switch (spec.family) {
    case ControlFamily::MinP: return control_min_p(spec, oracle, x, lambda_x, v);
    case ControlFamily::MinPStar: return control_min_p_star(spec, oracle, x, lambda_x, v);
    case ControlFamily::Direct: return control_direct(spec, oracle, x, lambda_x, v);
    case ControlFamily::FixedGain: return control_fixed_gain(spec, oracle, x, lambda_x, v);
  }
  throw InvalidArgument("evaluate_control: unknown family");
}

struct GainPair {
  Scalar gamma_a = 0;
  Scalar gamma_b = 0;
  /// False when c > 0 makes gamma_a negative.
  bool nonnegative = true;
};

/// gamma_a = -c sigma_q, gamma_b = b sigma_q.
inline GainPair gains_from_sigma(const ClfParams& clf, Scalar sigma_q) {
  detail::require(sigma_q > 0, "gains_from_sigma: sigma_q must be positive");
  GainPair g{-clf.c * sigma_q, clf.b * sigma_q, true};
  g.nonnegative = g.gamma_a >= 0 && g.gamma_b >= 0;
  return g;
}

}  // namespace accel
