#pragma once

// Numerical checks of the closed-loop invariants over recorded trajectories and
// iterate sequences. Every check recomputes its quantities from raw states.

#include "accel/clf.hpp"
#include "accel/discrete.hpp"
#include "accel/flow.hpp"
#include "accel/objective.hpp"
#include "accel/types.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace accel {

struct CheckResult {
  std::string name;
  bool applicable = true;
  bool pass = true;
  /// Extremal value of the checked quantity over the trajectory.
  Scalar worst_value = 0;
  Scalar tolerance = 0;
  std::size_t index = 0;
  Scalar time = 0;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  std::size_t passed() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += (c.applicable && c.pass);
    return n;
  }
  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += (c.applicable && !c.pass);
    return n;
  }
  std::size_t not_applicable() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += !c.applicable;
    return n;
  }
  bool all_passed() const { return failed() == 0; }

  void append(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

inline nlohmann::ordered_json to_json(const CheckResult& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["applicable"] = c.applicable;
  j["pass"] = c.pass;
  j["worst_value"] = c.worst_value;
  j["tolerance"] = c.tolerance;
  j["index"] = c.index;
  j["time"] = c.time;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  j["summary"] = {{"passed", r.passed()},
                  {"failed", r.failed()},
                  {"not_applicable", r.not_applicable()}};
  return j;
}

/// Tolerance for an order-p integrator with error constant C.
inline Scalar order_tolerance(Scalar C, Scalar h, int p) { return C * std::pow(h, p); }

enum class DissipationMode { Strict, Rate };

inline std::string_view to_string(DissipationMode m) {
  return m == DissipationMode::Strict ? "strict" : "rate";
}

struct DissipationOptions {
  DissipationMode mode = DissipationMode::Strict;
  Scalar eta = 1;
  Scalar tol = 1e-12;
};

namespace detail {

inline CheckResult not_applicable(std::string name, std::string why) {
  CheckResult c;
  c.name = std::move(name);
  c.applicable = false;
  c.note = std::move(why);
  return c;
}

struct Recomputed {
  Scalar V;
  Scalar lieV;
  bool origin;
};

inline Recomputed recompute(const ClfParams& clf, const ObjectiveOracle& oracle,
                            const TrajectorySample& s) {
  const Vector lambda = -oracle.gradient(s.state.x);
  const Scalar V = clf_value(clf, lambda, s.state.v);
  const Scalar lie = lie_derivative(clf, oracle.hessian(s.state.x), lambda, s.state.v, s.u);
  return {V, lie, lambda.norm() == 0 && s.state.v.norm() == 0};
}

}  // namespace detail

/// Strict: lieV < tol wherever (lambda, v) != 0.
/// Rate: lieV <= -eta V + tol and V(t_k) <= V(t_0) exp(-eta (t_k - t_0)) (1 + tol).
/// Also reports the agreement of the producer's cached V/lieV with the recomputation.
inline VerificationReport check_dissipation(const TrajectoryRecord& traj,
                                            const ObjectiveOracle& oracle, const ClfParams& clf,
                                            const DissipationOptions& opt = {}) {
  VerificationReport rep;
  CheckResult cache{"cached_diagnostics", true, true, 0, 1e-12, 0, 0, {}};
  if (opt.mode == DissipationMode::Strict) {
    CheckResult c{"dissipation_strict", true, true, -std::numeric_limits<Scalar>::infinity(),
                  opt.tol, 0, 0, {}};
    bool any = false;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const auto& s = traj.samples[i];
      const auto r = detail::recompute(clf, oracle, s);
      cache.worst_value = std::max(
          {cache.worst_value, std::abs(r.V - s.V) / std::max(Scalar(1), std::abs(r.V)),
           std::abs(r.lieV - s.lieV) / std::max(Scalar(1), std::abs(r.lieV))});
      if (r.origin) continue;
      any = true;
      if (r.lieV > c.worst_value) {
        c.worst_value = r.lieV;
        c.index = i;
        c.time = s.state.t;
      }
    }
    if (!any) {
      c.worst_value = 0;
      c.note = "vacuous: no samples away from the origin";
    }
    c.pass = !any || c.worst_value < opt.tol;
    rep.checks.push_back(c);
  } else {
    CheckResult lie{"dissipation_rate", true, true, -std::numeric_limits<Scalar>::infinity(),
                    opt.tol, 0, 0, {}};
    CheckResult env{"exponential_envelope", true, true, -std::numeric_limits<Scalar>::infinity(),
                    opt.tol, 0, 0, {}};
    if (!traj.samples.empty()) {
      const Scalar t0 = traj.samples.front().state.t;
      const Scalar V0 = detail::recompute(clf, oracle, traj.samples.front()).V;
      for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        const auto r = detail::recompute(clf, oracle, s);
        cache.worst_value = std::max(
            {cache.worst_value, std::abs(r.V - s.V) / std::max(Scalar(1), std::abs(r.V)),
             std::abs(r.lieV - s.lieV) / std::max(Scalar(1), std::abs(r.lieV))});
        const Scalar excess = r.lieV + opt.eta * r.V;
        if (excess > lie.worst_value) {
          lie.worst_value = excess;
          lie.index = i;
          lie.time = s.state.t;
        }
        const Scalar bound = V0 * std::exp(-opt.eta * (s.state.t - t0));
        const Scalar ratio = bound > 0 ? r.V / bound - 1 : (r.V > 0 ? 1 : 0);
        if (ratio > env.worst_value) {
          env.worst_value = ratio;
          env.index = i;
          env.time = s.state.t;
        }
      }
    } else {
      lie.worst_value = env.worst_value = 0;
    }
    lie.pass = lie.worst_value <= opt.tol;
    env.pass = env.worst_value <= opt.tol;
    rep.checks.push_back(lie);
    rep.checks.push_back(env);
  }
  cache.pass = cache.worst_value <= cache.tolerance;
  rep.checks.push_back(cache);
  return rep;
}

/// max_t |lambda_x(t) + grad E(x(t))| for co-integrated adjoints.
inline VerificationReport check_adjoint_consistency(const TrajectoryRecord& traj,
                                                    const ObjectiveOracle& oracle, Scalar tol) {
  VerificationReport rep;
  if (traj.meta.mode != FlowMode::FullPrimalDual) {
    rep.checks.push_back(detail::not_applicable(
        "adjoint_consistency", "reduced mode: lambda_x is -grad E by construction"));
    return rep;
  }
  CheckResult c{"adjoint_consistency", true, true, 0, tol, 0, 0, {}};
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i].state;
    const Scalar r = (s.lambda_x + oracle.gradient(s.x)).norm();
    if (r > c.worst_value) {
      c.worst_value = r;
      c.index = i;
      c.time = s.t;
    }
  }
  c.pass = c.worst_value <= tol;
  rep.checks.push_back(c);
  return rep;
}

/// max_t |lambda_v(t)|; identically zero on a singular arc.
inline VerificationReport check_singular_arc(const TrajectoryRecord& traj, Scalar tol = 1e-8) {
  VerificationReport rep;
  if (traj.meta.mode != FlowMode::FullPrimalDual) {
    rep.checks.push_back(detail::not_applicable(
        "singular_arc", "reduced mode: lambda_v is not integrated"));
    return rep;
  }
  CheckResult c{"singular_arc", true, true, 0, tol, 0, 0, {}};
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i].state;
    const Scalar r = s.lambda_v.norm();
    if (r > c.worst_value) {
      c.worst_value = r;
      c.index = i;
      c.time = s.t;
    }
  }
  c.pass = c.worst_value <= tol;
  rep.checks.push_back(c);
  return rep;
}

/// Final |grad E| <= tol_g and |v| <= tol_v.
inline VerificationReport check_stationarity(const TrajectoryRecord& traj,
                                             const ObjectiveOracle& oracle, Scalar tol_g = 1e-6,
                                             Scalar tol_v = 1e-6) {
  VerificationReport rep;
  CheckResult g{"stationarity_grad", true, false, 0, tol_g, 0, 0, {}};
  CheckResult v{"stationarity_velocity", true, false, 0, tol_v, 0, 0, {}};
  if (traj.samples.empty()) {
    g.note = v.note = "empty trajectory";
  } else {
    const auto& s = traj.samples.back().state;
    const std::size_t last = traj.samples.size() - 1;
    g.worst_value = oracle.gradient(s.x).norm();
    v.worst_value = s.v.norm();
    g.index = v.index = last;
    g.time = v.time = s.t;
    g.pass = std::isfinite(g.worst_value) && g.worst_value <= tol_g;
    v.pass = std::isfinite(v.worst_value) && v.worst_value <= tol_v;
  }
  if (traj.status == FlowStatus::Diverged) {
    g.pass = v.pass = false;
    g.note = v.note = "diverged";
  } else if (traj.status == FlowStatus::Infeasible) {
    g.pass = v.pass = false;
    g.note = v.note = "infeasible control";
  }
  rep.checks.push_back(g);
  rep.checks.push_back(v);
  return rep;
}

inline VerificationReport check_stationarity(const IterateSequence& seq,
                                             const ObjectiveOracle& oracle,
                                             Scalar tol_g = 1e-6) {
  VerificationReport rep;
  CheckResult g{"stationarity_grad", true, false, 0, tol_g, 0, 0, {}};
  if (seq.points.empty()) {
    g.note = "empty sequence";
  } else {
    g.index = seq.points.size() - 1;
    g.time = static_cast<Scalar>(g.index);
    g.worst_value = oracle.gradient(seq.points.back()).norm();
    g.pass = std::isfinite(g.worst_value) && g.worst_value <= tol_g;
    if (!std::isfinite(g.worst_value)) g.note = "diverged";
  }
  rep.checks.push_back(g);
  return rep;
}

}  // namespace accel
