#include "accel/control.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace accel;
using accel::testing::vec;

namespace {

ControllerSpec spec_for(ControlFamily family, MetricKind metric = MetricKind::Euclidean) {
  ControllerSpec s;
  s.family = family;
  s.metric.kind = metric;
  return s;
}

ProblemInstance scalar_quadratic(Scalar q) {
  return make_quadratic(Matrix::Constant(1, 1, q), vec({0}), vec({1}));
}

}  // namespace

TEST(ControlMinP, UnitMetricExample) {
  auto p = make_quadratic(Matrix::Identity(2, 2), vec({0, 0}), vec({1, 1}));
  auto s = spec_for(ControlFamily::MinP);
  // dV/dv = c lambda + b v = v when lambda = 0
  const auto out = min_p_law(s, p.oracle, vec({0, 0}), vec({0, 0}), vec({3, 4}));
  EXPECT_NEAR(out.sigma, 0.2, 1e-15);
  EXPECT_NEAR(out.u[0], -0.6, 1e-15);
  EXPECT_NEAR(out.u[1], -0.8, 1e-15);
  EXPECT_NEAR(out.u.norm(), 1.0, 1e-15);
}

TEST(ControlMinP, WeightedMetricExample) {
  auto p = scalar_quadratic(4);
  auto s = spec_for(ControlFamily::MinP, MetricKind::Hessian);
  const Vector u = control_min_p(s, p.oracle, vec({0.7}), vec({0}), vec({2}));
  EXPECT_NEAR(u[0], -0.5, 1e-15);
  EXPECT_NEAR(u[0] * 4 * u[0], 1.0, 1e-15);
}

TEST(ControlMinP, ZeroFallbackOnZeroSet) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::MinP);
  EXPECT_EQ(control_min_p(s, p.oracle, vec({1}), vec({0}), vec({0})).norm(), 0.0);
  // lambda = v lies on dV/dv = 0 for (2, 1, -1)
  EXPECT_EQ(control_min_p(s, p.oracle, vec({1}), vec({0.5}), vec({0.5})).norm(), 0.0);
}

TEST(ControlMinP, TaperedRadius) {
  auto p = make_quadratic(Matrix::Identity(2, 2), vec({0, 0}), vec({1, 1}));
  auto s = spec_for(ControlFamily::MinP);
  s.delta_taper = true;
  const Vector small = vec({0.03, 0.04});
  const Vector u = control_min_p(s, p.oracle, vec({0, 0}), vec({0, 0}), small);
  EXPECT_NEAR(u.squaredNorm(), small.squaredNorm(), 1e-16);
  EXPECT_NEAR(control_min_p(s, p.oracle, vec({0, 0}), vec({0, 0}), vec({3, 4})).norm(), 1.0,
              1e-15);
}

TEST(ControlMinPStar, ActiveExampleMeetsRateExactly) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::MinPStar);
  // V(-1, 1) = 1 + 0.5 + 1 = 2.5, so eta = 0.4 gives rho = 1
  s.rate_eta = 0.4;
  const auto out = min_p_star_law(s, p.oracle, vec({0.2}), vec({-1}), vec({1}));
  ASSERT_TRUE(out.active);
  EXPECT_NEAR(out.sigma, 1.75, 1e-15);
  EXPECT_NEAR(out.u[0], -3.5, 1e-14);
  const Scalar lie = lie_derivative(s.clf, p.oracle, vec({0.2}), vec({-1}), vec({1}), out.u);
  EXPECT_NEAR(lie, -1.0, 1e-14);
}

TEST(ControlMinPStar, EquilibriumGivesZero) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::MinPStar);
  EXPECT_EQ(control_min_p_star(s, p.oracle, vec({0}), vec({0}), vec({0})).norm(), 0.0);
}

TEST(ControlMinPStar, InactiveWhenDriftMeetsRate) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::MinPStar);
  // lambda = v = 1: drift = -(2 - 1) * 2 = -2, V = 0.5, eta = 2 gives rho = 1
  s.rate_eta = 2;
  const Vector u = control_min_p_star(s, p.oracle, vec({0}), vec({1}), vec({1}));
  EXPECT_EQ(u.norm(), 0.0);
  const Scalar lie = lie_derivative(s.clf, p.oracle, vec({0}), vec({1}), vec({1}), u);
  EXPECT_DOUBLE_EQ(lie, -2.0);
  EXPECT_LE(lie, -1.0);
}

TEST(ControlMinPStar, InfeasibleOnZeroSetWhenRateTooAggressive) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::MinPStar);
  s.rate_eta = 5;  // rho = 2.5 exceeds the drift 2
  try {
    control_min_p_star(s, p.oracle, vec({0}), vec({1}), vec({1}));
    FAIL() << "expected InfeasibleControl";
  } catch (const InfeasibleControl& e) {
    EXPECT_TRUE(e.drift().applicable);
    EXPECT_TRUE(e.drift().holds);
    EXPECT_DOUBLE_EQ(e.drift().drift_term, 2.0);
  }
}

TEST(ControlDirect, Examples) {
  auto p = scalar_quadratic(2);
  auto s = spec_for(ControlFamily::Direct);
  s.gains = {1, 1, 2};
  EXPECT_DOUBLE_EQ(control_direct(s, p.oracle, vec({0}), vec({-1}), vec({0}))[0], -1.0);
  EXPECT_DOUBLE_EQ(control_direct(s, p.oracle, vec({0}), vec({0}), vec({1}))[0], -5.0);
  EXPECT_EQ(control_direct(s, p.oracle, vec({0}), vec({0}), vec({0})).norm(), 0.0);
}

TEST(ValidateDirectGains, Examples) {
  const ClfParams clf{2, 1, -1, true};
  EXPECT_TRUE(validate_direct_gains(clf, 1, 1, 2).holds);
  const auto bad_kc = validate_direct_gains(clf, 1, 1, 1);
  EXPECT_FALSE(bad_kc.holds);
  ASSERT_EQ(bad_kc.violated.size(), 1u);
  EXPECT_EQ(bad_kc.violated[0], "K_c = a/c");
  const auto zero_ka = validate_direct_gains(clf, 0, 1, 2);
  EXPECT_FALSE(zero_ka.holds);
  EXPECT_EQ(zero_ka.violated.front(), "K_a > 0");
}

TEST(ValidateDirectGains, ScalesWithGammaB) {
  const ClfParams clf{3, 2, -1.5, true};
  // K_a = c K_b / b, K_c = a / c
  const Scalar gb = 0.7;
  const Scalar ga = -clf.c * gb / clf.b;
  EXPECT_TRUE(validate_direct_gains(clf, ga, gb, -clf.a / clf.c).holds);
}

TEST(ControllerSpec, ValidateRejectsBadParameters) {
  auto s = spec_for(ControlFamily::Direct);
  s.gains = {1, 1, 1};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = spec_for(ControlFamily::MinP);
  s.delta = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = spec_for(ControlFamily::MinPStar);
  s.rate_eta = -1;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_NO_THROW(spec_for(ControlFamily::Direct).validate());
}

TEST(GainsFromSigma, Examples) {
  const ClfParams clf{2, 1, -1, true};
  auto g = gains_from_sigma(clf, 1);
  EXPECT_DOUBLE_EQ(g.gamma_a, 1);
  EXPECT_DOUBLE_EQ(g.gamma_b, 1);
  g = gains_from_sigma(clf, 2);
  EXPECT_DOUBLE_EQ(g.gamma_a, 2);
  EXPECT_DOUBLE_EQ(g.gamma_b, 2);
  EXPECT_TRUE(g.nonnegative);
  const auto flipped = gains_from_sigma(ClfParams{2, 1, 1, false}, 1);
  EXPECT_LT(flipped.gamma_a, 0);
  EXPECT_FALSE(flipped.nonnegative);
  EXPECT_THROW(gains_from_sigma(clf, 0), InvalidArgument);
}

// Property checks over random states on PD quadratics.

namespace {

struct RandomState {
  ProblemInstance problem;
  Vector x, v;
};

RandomState random_state(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix Q = accel::testing::random_spd(n, rng, 0.5, 20);
  auto p = make_quadratic(Q, accel::testing::random_vector(n, rng), Vector::Zero(n));
  return {std::move(p), accel::testing::random_vector(n, rng), accel::testing::random_vector(n, rng)};
}

MetricSpec random_metric(MetricKind kind, std::mt19937_64& rng, Eigen::Index n) {
  MetricSpec m{kind, 1e-6, std::nullopt};
  if (kind == MetricKind::QuasiNewton) m.qn_state = accel::testing::random_spd(n, rng, 0.2, 8);
  return m;
}

}  // namespace

TEST(ControlProperties, FunctionalFormUnderSingularArcSubstitution) {
  std::mt19937_64 rng(31);
  for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton}) {
    for (int trial = 0; trial < 300; ++trial) {
      auto st = random_state(rng, 5);
      const auto& o = st.problem.oracle;
      const Vector g = o.gradient(st.x);
      const Vector lambda = -g;
      ControllerSpec s = spec_for(ControlFamily::MinP, kind);
      s.metric = random_metric(kind, rng, 5);
      const Matrix W = metric_matrix(s.metric, o, st.x);
      const Matrix Winv = W.inverse();
      const Vector dVdv = s.clf.c * lambda + s.clf.b * st.v;

      // MinP: sigma^2 = Delta / (dVdv^T W^{-1} dVdv)
      const Scalar sigma = std::sqrt(s.delta / dVdv.dot(Winv * dVdv));
      const auto gp = gains_from_sigma(s.clf, sigma);
      const Vector ref = -Winv * (gp.gamma_a * g + gp.gamma_b * st.v);
      const Vector u = control_min_p(s, o, st.x, lambda, st.v);
      EXPECT_LE((u - ref).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()));

      s.family = ControlFamily::MinPStar;
      const Matrix H = o.hessian(st.x);
      const Scalar rho = s.rate_eta * clf_value(s.clf, lambda, st.v);
      const Scalar drift = -(s.clf.a * lambda + s.clf.c * st.v).dot(H * st.v);
      const Vector u_star = control_min_p_star(s, o, st.x, lambda, st.v);
      if (rho + drift > 0) {
        const Scalar sigma_star = (rho + drift) / dVdv.dot(Winv * dVdv);
        const auto gs = gains_from_sigma(s.clf, sigma_star);
        const Vector ref_star = -Winv * (gs.gamma_a * g + gs.gamma_b * st.v);
        EXPECT_LE((u_star - ref_star).cwiseAbs().maxCoeff(),
                  1e-12 * std::max(1.0, ref_star.cwiseAbs().maxCoeff()));
      } else {
        EXPECT_EQ(u_star.norm(), 0.0);
      }
    }
  }
}

TEST(ControlProperties, MinPConstraintActive) {
  std::mt19937_64 rng(41);
  for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian, MetricKind::QuasiNewton}) {
    for (int trial = 0; trial < 500; ++trial) {
      auto st = random_state(rng, 4);
      ControllerSpec s = spec_for(ControlFamily::MinP, kind);
      s.metric = random_metric(kind, rng, 4);
      s.delta = std::exp(std::uniform_real_distribution<Scalar>(-3, 3)(rng));
      const Vector lambda = accel::testing::random_vector(4, rng);
      const Vector u = control_min_p(s, st.problem.oracle, st.x, lambda, st.v);
      const Matrix W = metric_matrix(s.metric, st.problem.oracle, st.x);
      EXPECT_NEAR(u.dot(W * u), s.delta, 1e-10 * s.delta);
    }
  }
}

TEST(ControlProperties, MinPStarRateExactness) {
  std::mt19937_64 rng(43);
  int active = 0, inactive = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    auto st = random_state(rng, 3);
    ControllerSpec s = spec_for(ControlFamily::MinPStar, MetricKind::Euclidean);
    s.rate_eta = std::exp(std::uniform_real_distribution<Scalar>(-2, 1)(rng));
    const Vector lambda = accel::testing::random_vector(3, rng);
    const auto out = min_p_star_law(s, st.problem.oracle, st.x, lambda, st.v);
    const Scalar rho = s.rate_eta * clf_value(s.clf, lambda, st.v);
    const Scalar lie = lie_derivative(s.clf, st.problem.oracle, st.x, lambda, st.v, out.u);
    if (out.active) {
      ++active;
      EXPECT_NEAR(lie, -rho, 1e-10 * std::max(1.0, rho));
    } else {
      ++inactive;
      EXPECT_EQ(out.u.norm(), 0.0);
      EXPECT_LE(lie, -rho);
    }
  }
  EXPECT_GT(active, 0);
  EXPECT_GT(inactive, 0);
}

TEST(ControlProperties, DirectLawWithValidGainsDissipates) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10000; ++trial) {
    auto st = random_state(rng, 3);
    ControllerSpec s = spec_for(ControlFamily::Direct);
    const Scalar gb = std::uniform_real_distribution<Scalar>(0.1, 5)(rng);
    s.gains = {-s.clf.c * gb / s.clf.b, gb, -s.clf.a / s.clf.c};
    ASSERT_NO_THROW(s.validate());
    const Vector lambda = accel::testing::random_vector(3, rng);
    const Vector u = control_direct(s, st.problem.oracle, st.x, lambda, st.v);
    EXPECT_LT(lie_derivative(s.clf, st.problem.oracle, st.x, lambda, st.v, u), 0.0);
  }
}

TEST(ControlProperties, EquilibriumIsInvariant) {
  std::mt19937_64 rng(53);
  auto st = random_state(rng, 4);
  const Vector zero = Vector::Zero(4);
  for (auto family : {ControlFamily::MinP, ControlFamily::MinPStar, ControlFamily::Direct,
                      ControlFamily::FixedGain}) {
    for (auto kind : {MetricKind::Euclidean, MetricKind::Hessian}) {
      const ControllerSpec s = spec_for(family, kind);
      EXPECT_EQ(evaluate_control(s, st.problem.oracle, st.x, zero, zero).norm(), 0.0)
          << to_string(family);
    }
  }
}

TEST(ControlFixedGain, MatchesMetricGradientLaw) {
  std::mt19937_64 rng(59);
  auto st = random_state(rng, 4);
  ControllerSpec s = spec_for(ControlFamily::FixedGain, MetricKind::Hessian);
  s.gains = {1.5, 0.5, 0};
  const auto& o = st.problem.oracle;
  const Vector g = o.gradient(st.x);
  const Vector ref = -o.hessian(st.x).inverse() * (1.5 * g + 0.5 * st.v);
  const Vector u = control_fixed_gain(s, o, st.x, -g, st.v);
  EXPECT_LE((u - ref).norm(), 1e-12 * ref.norm());
}
