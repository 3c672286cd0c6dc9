// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include "accel/accel.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace accel;
using accel::testing::random_spd;
using accel::testing::random_vector;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Scalar max_abs_diff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return std::numeric_limits<Scalar>::infinity();
  Scalar worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return worst;
}

MetricSpec random_metric(MetricKind kind, std::mt19937_64& rng, Eigen::Index n) {
  MetricSpec m{kind, 1e-6, std::nullopt};
  if (kind == MetricKind::QuasiNewton) m.qn_state = random_spd(n, rng, 0.1, 10);
  return m;
}

// Random PD-quadratic or log-sum-exp problem with a random state.
struct Sample {
  ProblemInstance problem;
  Vector x, lambda, v;
};

Sample random_sample(std::mt19937_64& rng, int i, bool singular_arc) {
  const Eigen::Index n = 2 + i % 5;
  ProblemInstance p = i % 3 == 2 ? make_log_sum_exp(n, 2 * n, rng())
                                 : make_quadratic(random_spd(n, rng, 0.1, 20), random_vector(n, rng),
                                                  Vector::Zero(n));
  Vector x = random_vector(n, rng);
  Vector lambda = singular_arc ? Vector(-p.oracle.gradient(x)) : random_vector(n, rng);
  Vector v = random_vector(n, rng);
  return {std::move(p), std::move(x), std::move(lambda), std::move(v)};
}

Outcome ac1() {
  auto p = make_conditioned_quadratic(10, 100, 101);
  const Scalar L = 100, alpha = 1 / L, beta = 0.9;
  const auto one = nesterov_one_step_run(p.oracle, p.x0, alpha, beta, alpha * beta, 200, 0);
  const auto two = nesterov_two_step_run(p.oracle, p.x0, alpha, beta, 200, 0);
  const Scalar dev = max_abs_diff(one.points, two.points);
  return {one.iterations() == 200 && dev <= 1e-12,
          fmt("one-step vs two-step Nesterov, 200 iterations: max deviation %.3g (tol 1e-12)", dev)};
}

Outcome ac2() {
  std::mt19937_64 rng(202);
  auto p = make_conditioned_quadratic(10, 100, 202);
  const std::size_t steps = 100;
  std::vector<Scalar> alphas(steps), betas_cg(steps), betas(steps, 0);
  std::uniform_real_distribution<Scalar> ua(0.004, 0.01), ub(0.0, 0.4);
  for (std::size_t k = 0; k < steps; ++k) {
    alphas[k] = ua(rng);
    betas_cg[k] = k == 0 ? 0 : ub(rng);
  }
  for (std::size_t k = 1; k < steps; ++k) betas[k] = cg_to_momentum(alphas[k], alphas[k - 1], betas_cg[k]);
  const auto cg = cg_iterate(p.oracle, p.x0, steps, step_schedule(alphas), beta_schedule(betas_cg));
  const auto hb = heavy_ball_iterate(p.oracle, p.x0, p.x0, alphas, betas);
  const Scalar dev = max_abs_diff(cg.points, hb.points);

  // Finite termination with exact line search and Fletcher-Reeves.
  Scalar worst_g = 0;
  std::size_t worst_iters = 0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto q = make_conditioned_quadratic(10, 10, seed);
    const auto seq = cg_iterate(q.oracle, q.x0, 10, exact_quadratic_step(q.oracle), fletcher_reeves());
    worst_g = std::max(worst_g, q.oracle.gradient(seq.points.back()).norm());
    worst_iters = std::max(worst_iters, seq.iterations());
  }
  const bool pass = cg.iterations() == steps && dev <= 1e-12 && worst_g <= 1e-10 && worst_iters <= 10;
  return {pass, fmt("CG vs heavy ball, 100 steps: max deviation %.3g (tol 1e-12); ", dev) +
                    fmt("exact-line-search CG on 10-D (kappa 10): |g| %.3g after <= %g steps (tol 1e-10)",
                        worst_g, double(worst_iters))};
}

Outcome ac3() {
  std::mt19937_64 rng(303);
  Scalar worst = 0;
  int count = 0;
  for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton}) {
    for (int i = 0; i < 10000; ++i) {
      auto s = random_sample(rng, i, false);
      ControllerSpec c;
      c.family = ControlFamily::MinP;
      c.metric = random_metric(kind, rng, s.x.size());
      c.delta = std::exp(std::uniform_real_distribution<Scalar>(-4, 4)(rng));
      if (clf_grad_v(c.clf, s.lambda, s.v).norm() <= grad_v_zero_threshold(s.lambda, s.v)) continue;
      const Vector u = control_min_p(c, s.problem.oracle, s.x, s.lambda, s.v);
      const Matrix W = metric_matrix(c.metric, s.problem.oracle, s.x);
      worst = std::max(worst, std::abs(u.dot(W * u) - c.delta) / c.delta);
      ++count;
    }
  }
  return {worst <= 1e-10 && count == 30000,
          fmt("MinP u^T W u = Delta over %g states (3 metrics): worst relative error %.3g (tol 1e-10)",
              double(count), worst)};
}

Outcome ac4() {
  std::mt19937_64 rng(404);
  Scalar worst_active = 0, worst_inactive = -std::numeric_limits<Scalar>::infinity(), worst_u = 0;
  int active = 0, inactive = 0;
  for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton}) {
    for (int i = 0; i < 3000; ++i) {
      auto s = random_sample(rng, i, false);
      ControllerSpec c;
      c.family = ControlFamily::MinPStar;
      c.metric = random_metric(kind, rng, s.x.size());
      c.rate_eta = std::exp(std::uniform_real_distribution<Scalar>(-3, 2)(rng));
      const auto out = min_p_star_law(c, s.problem.oracle, s.x, s.lambda, s.v);
      const Scalar rho = c.rate_eta * clf_value(c.clf, s.lambda, s.v);
      const Scalar lie = lie_derivative(c.clf, s.problem.oracle, s.x, s.lambda, s.v, out.u);
      if (out.active) {
        ++active;
        worst_active = std::max(worst_active, std::abs(lie + rho) / std::max(Scalar(1), rho));
      } else {
        ++inactive;
        worst_inactive = std::max(worst_inactive, lie + rho);
        worst_u = std::max(worst_u, out.u.norm());
      }
    }
  }
  const bool pass = active > 0 && inactive > 0 && worst_active <= 1e-10 && worst_inactive <= 0 &&
                    worst_u == 0;
  return {pass, fmt("MinPStar: %g active states, |lieV + rho| <= %.3g (tol 1e-10); ", active,
                    worst_active) +
                    fmt("%g inactive states, u = 0, max(lieV + rho) = %.3g (<= 0)", inactive,
                        worst_inactive)};
}

Outcome ac5() {
  std::mt19937_64 rng(505);
  Scalar worst = 0;
  int count = 0;
  for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton}) {
    for (int i = 0; i < 1000; ++i) {
      auto s = random_sample(rng, i, true);
      ControllerSpec c;
      c.metric = random_metric(kind, rng, s.x.size());
      const auto& o = s.problem.oracle;
      const Vector g = o.gradient(s.x);
      const Matrix W = metric_matrix(c.metric, o, s.x);
      const Matrix Winv = W.inverse();
      const Vector dVdv = clf_grad_v(c.clf, s.lambda, s.v);
      const Scalar q = dVdv.dot(Winv * dVdv);
      auto compare = [&](const Vector& u, Scalar sigma) {
        const auto gp = gains_from_sigma(c.clf, sigma);
        const Vector ref = -Winv * (gp.gamma_a * g + gp.gamma_b * s.v);
        worst = std::max(worst, (u - ref).cwiseAbs().maxCoeff() /
                                    std::max(Scalar(1), ref.cwiseAbs().maxCoeff()));
      };
      c.family = ControlFamily::MinP;
      compare(control_min_p(c, o, s.x, s.lambda, s.v), std::sqrt(c.delta / q));
      c.family = ControlFamily::MinPStar;
      const auto star = min_p_star_law(c, o, s.x, s.lambda, s.v);
      if (star.active) {
        const Scalar drift = -clf_grad_lambda(c.clf, s.lambda, s.v).dot(o.hessian(s.x) * s.v);
        compare(star.u, (c.rate_eta * clf_value(c.clf, s.lambda, s.v) + drift) / q);
      }
      ++count;
    }
  }
  return {worst <= 1e-12,
          fmt("MinP/MinPStar equal -W^-1(gamma_a dE + gamma_b v) over %g states (3 metrics): "
              "worst componentwise deviation %.3g (tol 1e-12 x max(1, |u|_inf))",
              double(count), worst)};
}

Outcome ac6() {
  auto p = make_conditioned_quadratic(10, 100, 606);
  ControllerSpec c;
  c.family = ControlFamily::MinPStar;
  c.rate_eta = 1;
  FlowOptions o;
  o.h = 1e-3;
  o.t_max = 20;
  o.stop.tol_g = o.stop.tol_v = 0;
  const auto rec = integrate(c, p.oracle, AugmentedState::consistent(p.oracle, p.x0), o);
  const auto rep = check_dissipation(rec, p.oracle, c.clf, {DissipationMode::Rate, 1, 1e-6});
  Scalar env = 0;
  for (const auto& ch : rep.checks)
    if (ch.name == "exponential_envelope") env = ch.worst_value;
  const bool pass = rec.status == FlowStatus::MaxTime && rec.final_sample().state.t >= 20 - 1e-9 &&
                    env <= 1e-6;
  return {pass, fmt("MinPStar flow (eta 1), %g samples on [0, 20]: max V/(V0 e^-t) - 1 = %.3g "
                    "(tol 1e-6)",
                    double(rec.samples.size()), env)};
}

Outcome ac7() {
  auto quad = make_conditioned_quadratic(10, 100, 707);
  Vector r0(2);
  r0 << -1.2, 1;
  auto rosen = make_rosenbrock(r0);
  struct Flow {
    std::string name;
    ControllerSpec spec;
  };
  // Constant-gain instances of the metric-gradient form with sigma = 50 and the
  // default CLF (gamma_a = -c sigma, gamma_b = b sigma), plus the direct law.
  // Rosenbrock's Hessian is indefinite above the valley, so the Newton metric gets a
  // floor of 1e-2 and the quasi-Newton B starts from the floored Hessian at x0.
  const auto sigma_gains = gains_from_sigma(ClfParams{}, 50);
  auto fixed = [&](MetricKind k) {
    ControllerSpec s;
    s.family = ControlFamily::FixedGain;
    s.metric.kind = k;
    if (k == MetricKind::Hessian) s.metric.eig_floor = 1e-2;
    s.gains = {sigma_gains.gamma_a, sigma_gains.gamma_b, 0};
    return s;
  };
  ControllerSpec nesterov;
  nesterov.family = ControlFamily::Direct;
  nesterov.gains = {1, 1, 2};
  const std::vector<Flow> flows{{"polyak", fixed(MetricKind::Euclidean)},
                                {"newton", fixed(MetricKind::Hessian)},
                                {"quasi_newton", fixed(MetricKind::QuasiNewton)},
                                {"nesterov", nesterov}};
  bool pass = true;
  std::string detail;
  for (const auto& f : flows) {
    for (int which = 0; which < 2; ++which) {
      const auto& p = which == 0 ? quad : rosen;
      const Scalar tol = which == 0 ? 1e-6 : 1e-4;
      FlowOptions o;
      o.h = which == 0 ? 1e-3 : 5e-4;
      o.t_max = 1e3;
      o.stop = {tol, tol};
      o.record_stride = 1000;
      ControllerSpec spec = f.spec;
      if (spec.metric.kind == MetricKind::QuasiNewton)
        spec.metric.qn_state = floor_spectrum(p.oracle.hessian(p.x0), spec.metric.eig_floor);
      const auto rec = integrate(spec, p.oracle, AugmentedState::consistent(p.oracle, p.x0), o);
      const Scalar g = rec.final_sample().grad_norm;
      const bool ok = rec.status == FlowStatus::Converged && g <= tol;
      pass = pass && ok;
      detail += f.name + "/" + (which == 0 ? "quadratic" : "rosenbrock") +
                fmt(" |g| %.2g at t=%.4g", g, rec.final_sample().state.t) + (ok ? "" : " [FAIL]") +
                "; ";
    }
  }
  return {pass, detail};
}

Outcome ac8() {
  auto p = make_conditioned_quadratic(10, 100, 808);
  ControllerSpec c;
  c.family = ControlFamily::Direct;
  auto run = [&](const ProblemInstance& prob, Scalar h, Scalar t_max) {
    FlowOptions o;
    o.h = h;
    o.t_max = t_max;
    o.mode = FlowMode::FullPrimalDual;
    o.stop.tol_g = o.stop.tol_v = 0;
    return integrate(c, prob.oracle, AugmentedState::consistent(prob.oracle, prob.x0), o);
  };
  const auto fine = run(p, 1e-3, 20);
  const Scalar lambda_v = check_singular_arc(fine, 1e-8).checks[0].worst_value;
  const auto coarse = run(p, 2e-3, 20);
  const Scalar r_fine = check_adjoint_consistency(fine, p.oracle, 1).checks[0].worst_value;
  const Scalar r_coarse = check_adjoint_consistency(coarse, p.oracle, 1).checks[0].worst_value;
  const Scalar ratio = r_coarse / r_fine;
  const bool pass = lambda_v <= 1e-8 && ratio >= 8 && ratio <= 32;

  // Same measurement on a non-quadratic objective, where the residual is truncation error.
  auto lse = make_log_sum_exp(5, 10, 809);
  const Scalar l1 = check_adjoint_consistency(run(lse, 0.04, 10), lse.oracle, 1).checks[0].worst_value;
  const Scalar l2 = check_adjoint_consistency(run(lse, 0.02, 10), lse.oracle, 1).checks[0].worst_value;

  return {pass, fmt("quadratic: max |lambda_v| %.3g (tol 1e-8); ", lambda_v) +
                    fmt("max |lambda_x + dE| %.3g at h=2e-3, %.3g at h=1e-3, ", r_coarse, r_fine) +
                    fmt("ratio %.3g (required [8, 32]); ", ratio) +
                    fmt("log-sum-exp reference: ratio %.3g between h=0.04 and h=0.02", l1 / l2)};
}

Outcome ac9() {
  std::mt19937_64 rng(909);
  Scalar min_drift = std::numeric_limits<Scalar>::infinity();
  int sampled = 0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index n = 1 + i % 6;
    std::uniform_real_distribution<Scalar> u(0.1, 3), frac(0.05, 0.95);
    ClfParams clf;
    clf.a = u(rng);
    clf.b = u(rng);
    clf.c = -frac(rng) * std::sqrt(clf.a * clf.b);
    const Matrix H = random_spd(n, rng, 0.01, 100);
    const Vector v = random_vector(n, rng);
    const Vector lambda = -(clf.b / clf.c) * v;
    const auto r = drift_condition_check(clf, H, lambda, v);
    if (!r.applicable) continue;
    ++sampled;
    min_drift = std::min(min_drift, r.drift_term);
  }
  // c > 0: search for a state on the zero set with a non-positive drift term.
  std::string counterexample = "none found";
  bool found = false;
  for (int i = 0; i < 10000 && !found; ++i) {
    const ClfParams clf{2, 1, 1, false};
    const Matrix H = random_spd(2, rng, 0.5, 5);
    const Vector v = random_vector(2, rng);
    const Vector lambda = -(clf.b / clf.c) * v;
    const auto r = drift_condition_check(clf, H, lambda, v);
    if (r.applicable && !r.holds) {
      found = true;
      counterexample = fmt("(a,b,c)=(2,1,1), v=(%.3g, %.3g)", v[0], v[1]) +
                       fmt(", drift_term=%.3g", r.drift_term);
    }
  }
  return {sampled == 10000 && min_drift > 0 && found,
          fmt("c<0: %g zero-set states, min drift_term %.3g (> 0); ", double(sampled), min_drift) +
              "c>0 counterexample: " + counterexample};
}

Outcome ac10() {
  std::mt19937_64 rng(1010);
  Vector r0(2);
  r0 << -1.2, 1;
  struct Entry {
    ProblemInstance p;
    Scalar spread;
  };
  std::vector<Entry> catalog;
  catalog.push_back({make_conditioned_quadratic(10, 100, 1010), 1});
  catalog.push_back({make_rosenbrock(r0), 1.5});
  catalog.push_back({make_log_sum_exp(5, 8, 1010), 1});
  Scalar worst_g = 0, worst_h = 0;
  for (const auto& [p, spread] : catalog) {
    for (int i = 0; i < 100; ++i) {
      const Vector x = accel::testing::uniform_vector(p.oracle.dim(), rng, -spread, spread);
      worst_g = std::max(worst_g, detail::relative_error(p.oracle.gradient(x), finite_diff_gradient(p.oracle, x)));
      worst_h = std::max(worst_h, detail::relative_error(p.oracle.hessian(x), finite_diff_hessian(p.oracle, x)));
    }
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-5,
          fmt("catalog (quadratic, rosenbrock, log-sum-exp) x 100 points: gradient %.3g (tol 1e-6), ",
              worst_g) +
              fmt("Hessian %.3g (tol 1e-5)", worst_h)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-4s %s  %s (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}
