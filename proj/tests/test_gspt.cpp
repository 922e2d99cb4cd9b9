#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "slowfast/gspt.hpp"
#include "slowfast/ode.hpp"

using namespace slowfast;
using namespace slowfast::gspt;

namespace {

ModelParams params(double alpha, double beta, double gamma, double delta, double eps = 1.0) {
  ModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.delta = delta;
  p.epsilon = eps;
  return p;
}

const ModelParams kCanard = params(0.5, 0.22, 3, 0.3, 0.01);

// Invariance defect of v = q(u, eps): eps g(u, q) - q_u f(u, q), with q_u from
// a fourth-order central difference of the truncated expansion.
double invariance_residual(const SlowManifoldExpansion& q, const ModelParams& p, double u, double eps) {
  const double h = 1e-3;
  const double qu = (-q(u + 2 * h, eps) + 8 * q(u + h, eps) - 8 * q(u - h, eps) + q(u - 2 * h, eps)) / (12 * h);
  const double v = q(u, eps);
  const double f = p.gamma * u * (1 - u) * (u + p.beta) - u * v / (1 + p.alpha * u);
  const double g = v * (u / (1 + p.alpha * u) - p.delta);
  return eps * g - qu * f;
}

// Plain scan with step 1e-6 for the sign change, then bisection.
double entry_exit_scan(double tc, double v1) {
  auto F = [&](double v0) { return (v1 - v0) - tc * std::log(v1 / v0); };
  double a = 1e-6;
  while (a + 1e-6 < tc && (F(a) > 0) == (F(a + 1e-6) > 0)) a += 1e-6;
  double lo = a, hi = a + 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double m = 0.5 * (lo + hi);
    if ((F(m) > 0) == (F(lo) > 0)) lo = m; else hi = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(SlowManifold, ZerothOrderIsCriticalManifold) {
  const auto q = slow_manifold_expand(kCanard, 2);
  for (double u : {0.1, 0.3, 0.7, 0.9}) EXPECT_EQ(q(u, 0.0), kinetics::critical_manifold_q0(kCanard, u));
  const auto q0 = slow_manifold_expand(kCanard, 0);
  for (double u : {0.1, 0.7}) EXPECT_EQ(q0(u, 0.3), kinetics::critical_manifold_q0(kCanard, u));
}

TEST(SlowManifold, CorrectionsVanishAtCoexistence) {
  const auto q = slow_manifold_expand(kCanard, 2);
  const double us = kinetics::coexistence_point(kCanard)[0];
  EXPECT_EQ(q.q1(us), 0.0);
  EXPECT_EQ(q.q2(us), 0.0);
  for (double eps : {0.01, 0.1, 0.5}) EXPECT_EQ(q(us, eps), kinetics::critical_manifold_q0(kCanard, us));
}

TEST(SlowManifold, GuardRadius) {
  const auto q = slow_manifold_expand(kCanard, 2);
  const double uf = kinetics::fold_point(kCanard).fold_u;
  EXPECT_THROW(q(uf + 5e-4, 0.01), Error);
  EXPECT_THROW(q(5e-4, 0.01), Error);
  EXPECT_NO_THROW(q(uf + 2e-3, 0.01));
  try {
    q(uf, 0.01);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_expansion);
  }
  const auto wide = slow_manifold_expand(kCanard, 1, 0.05);
  EXPECT_THROW(wide(uf + 0.03, 0.01), Error);
}

TEST(SlowManifold, FirstDerivativeClosedForm) {
  const auto q = slow_manifold_expand(kCanard, 2);
  const double h = 1e-5;
  for (double u : {0.15, 0.3, 0.6, 0.85}) EXPECT_NEAR(q.q1_prime(u), (q.q1(u + h) - q.q1(u - h)) / (2 * h), 1e-6);
}

TEST(SlowManifold, InvarianceResidualIsThirdOrder) {
  const auto p = kCanard;
  const auto q = slow_manifold_expand(p, 2);
  const double us[] = {0.1, 0.15, 0.2, 0.25, 0.6, 0.65, 0.7, 0.8, 0.9, 0.95};
  for (double u : us) {
    double prev = invariance_residual(q, p, u, 1e-2);
    for (double eps : {5e-3, 2.5e-3, 1.25e-3}) {
      const double r = invariance_residual(q, p, u, eps);
      const double ratio = prev / r;
      EXPECT_GE(ratio, 6.0) << "u=" << u << " eps=" << eps;
      EXPECT_LE(ratio, 10.0) << "u=" << u << " eps=" << eps;
      prev = r;
    }
  }
}

TEST(SlowManifold, LowerOrdersHaveLargerDefect) {
  const auto p = kCanard;
  const double u = 0.7, eps = 0.005;
  const double r0 = std::abs(invariance_residual(slow_manifold_expand(p, 0), p, u, eps));
  const double r1 = std::abs(invariance_residual(slow_manifold_expand(p, 1), p, u, eps));
  const double r2 = std::abs(invariance_residual(slow_manifold_expand(p, 2), p, u, eps));
  EXPECT_GT(r0, r1);
  EXPECT_GT(r1, r2);
}

TEST(NormalForm, CoefficientValues) {
  const auto nf = normal_form_coefficients(kCanard);
  EXPECT_NEAR(nf.delta_star, 0.37687, 5e-5);
  EXPECT_NEAR(nf.b1, 0.46438, 1e-4);
  EXPECT_NEAR(nf.b2, -1.8203, 1e-3);
  EXPECT_GT(nf.b3, 0.0);
  EXPECT_GT(nf.b4, 0.0);
  EXPECT_EQ(nf.a1, 0.0);
  EXPECT_EQ(nf.a2, 1.0);
  EXPECT_NEAR(nf.a3, -(3.0 + 0.5 * 3.0 * (4 * nf.u_star + 0.22 - 1)), 1e-12);
}

TEST(NormalForm, CurvatureCoefficientMatchesSecondDerivative) {
  const auto nf = normal_form_coefficients(kCanard);
  const auto p = kCanard.with_delta(nf.delta_star);
  const double h = 1e-4, u = nf.u_star, v = nf.v_star;
  const double fuu = (kinetics::prey_rate(p, u + h, v) - 2 * kinetics::prey_rate(p, u, v) +
                      kinetics::prey_rate(p, u - h, v)) / (h * h);
  EXPECT_NEAR(nf.b2, 0.5 * (1 + p.alpha * u) * fuu, 1e-6);
  EXPECT_NEAR(nf.b3, v * (1 - p.alpha * nf.delta_star), 1e-12);
  EXPECT_NEAR(nf.b4, v * (1 + p.alpha * u), 1e-12);
}

TEST(NormalForm, RandomParametersSatisfyPositivity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> A(0.1, 2), B(0.01, 0.95), G(0.5, 5);
  for (int i = 0; i < 50; ++i) {
    const auto p = params(A(rng), B(rng), G(rng), 0.1);
    NormalFormCoefficients nf;
    try {
      nf = normal_form_coefficients(p);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::analysis_degenerate);
      continue;
    }
    EXPECT_NEAR(nf.b1, nf.u_star, 0.0);
    EXPECT_GT(nf.b1, 0.0);
    EXPECT_GT(nf.b3, 0.0);
    EXPECT_GT(nf.b4, 0.0);
    const auto m = melnikov_coefficients(nf);
    EXPECT_NEAR(m.A4, 2 * nf.b2 * nf.b2 / (nf.b1 * nf.b3), 1e-12 * m.A4);
    EXPECT_GT(m.A4, 0.0);
  }
}

TEST(Melnikov, ClosedFormMatchesQuadrature) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> pos(0.1, 3), any(-3, 3);
  int checked = 0;
  while (checked < 20) {
    NormalFormCoefficients nf;
    nf.b1 = pos(rng);
    nf.b2 = any(rng);
    nf.b3 = pos(rng);
    nf.b4 = pos(rng);
    nf.a1 = any(rng);
    nf.a2 = any(rng);
    nf.a3 = any(rng);
    nf.a4 = any(rng);
    nf.a5 = any(rng);
    if (std::abs(nf.b2) < 0.1) continue;
    const auto m = melnikov_coefficients(nf);
    ASSERT_GT(m.A4, 0.0);
    const double T = 20.0 / std::sqrt(m.A4);
    auto integrand = [&](double t) { return std::exp(-m.A4 * t * t) * (m.A1 * t * t * t * t + m.A2 * t * t + m.A3); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -T, T, 15, 1e-14);
    const double dr = std::numbers::e * I;
    EXPECT_NEAR(m.d_r, dr, 1e-8 * std::max(std::abs(dr), 1e-300)) << "set " << checked;
    const double Il = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::exp(-m.A4 * t * t); }, -T, T, 15, 1e-14);
    EXPECT_NEAR(m.d_lambda, std::numbers::e * m.A5 * Il, 1e-8 * std::abs(m.d_lambda));
    ++checked;
  }
}

TEST(Melnikov, ConstantTermOnly) {
  MelnikovCoefficients m;
  m.A1 = m.A2 = 0.0;
  m.A3 = 0.7;
  m.A4 = 2.0;
  m.A5 = -1.3;
  EXPECT_DOUBLE_EQ(m.distance_ratio(), 0.7 / -1.3);
}

TEST(Melnikov, CanardCoefficients) {
  const auto m = melnikov_coefficients(kCanard);
  EXPECT_GT(m.A4, 0.0);
  EXPECT_NEAR(m.A1, -0.766011417, 1e-6);
  EXPECT_NEAR(m.A2, -0.332203900, 1e-6);
  EXPECT_EQ(m.A3, 0.0);
  EXPECT_NEAR(m.A4, 12.975451827, 1e-6);
  EXPECT_NEAR(m.A5, -0.234220728, 1e-6);
  EXPECT_NEAR(m.d_r / m.d_lambda, m.distance_ratio(), 1e-14);
}

TEST(Curves, AnchoredAtHopfThreshold) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> A(0.1, 1.5), B(0.05, 0.9), G(0.5, 5);
  for (int i = 0; i < 20; ++i) {
    const auto p = params(A(rng), B(rng), G(rng), 0.1);
    double dH;
    try {
      dH = kinetics::stability_thresholds(p).delta_H;
      (void)slow_fast_curves(p);
    } catch (const Error&) {
      continue;
    }
    EXPECT_NEAR(singular_hopf_delta(p, 0.0), dH, 1e-12);
    EXPECT_NEAR(maximal_canard_delta(p, 0.0), dH, 1e-12);
  }
  EXPECT_NEAR(singular_hopf_delta(kCanard, 0.0), 0.37687, 5e-4);
}

TEST(Curves, SingularHopfNearTraceRoot) {
  // Hopf of the full system: E* changes stability where trace(J*) = 0.
  const double dH = singular_hopf_delta(kCanard, 0.01);
  const auto tr = [&](double d) { return kinetics::coexistence_trace(kCanard, d); };
  const auto [a, b] = slowfast::detail::bisect(tr, 0.3, 0.45, 1e-14);
  EXPECT_NEAR(dH, 0.5 * (a + b), 0.01);
  // and oscillations set in just below it
  EXPECT_EQ(ode::detect_limit_cycle(kCanard.with_delta(dH + 2e-3), ode::default_seed(kCanard.with_delta(dH + 2e-3))).type,
            ode::CycleType::none);
  EXPECT_NE(ode::detect_limit_cycle(kCanard.with_delta(dH - 2e-3), ode::default_seed(kCanard.with_delta(dH - 2e-3))).type,
            ode::CycleType::none);
}

TEST(Curves, MaximalCanardInsideExplosionBracket) {
  const double dc = maximal_canard_delta(kCanard, 0.01);
  EXPECT_GE(dc, 0.36);
  EXPECT_LE(dc, 0.3762);
  const auto w = ode::locate_explosion_window(kCanard, 0.01);
  // first-order curve; the neglected terms are O(eps^{3/2})
  const double slack = std::pow(0.01, 1.5);
  EXPECT_GE(dc, w.delta_lo - slack);
  EXPECT_LE(dc, w.delta_hi + slack);
}

TEST(EntryExit, WorkedExample) {
  const auto p = params(0.5, 0.2, 3, 0.3);
  const auto g = kinetics::fold_point(p);
  EXPECT_NEAR(g.fold_u, 0.472, 1e-3);
  EXPECT_NEAR(g.fold_v, 1.316, 1e-3);
  const auto s = entry_exit_point(p, 1.316);
  EXPECT_NEAR(s.v0, 0.207509, 5e-4);
  EXPECT_LT(std::abs(s.residual), 1e-12);
}

TEST(EntryExit, MatchesScanOracle) {
  auto p = params(0.5, 0.2, 3, 0.3);
  const auto s = entry_exit_point(p, 1.2);
  EXPECT_NEAR(s.v0, entry_exit_scan(0.6, 1.2), 1e-9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> B(0.05, 0.5), G(1, 5), K(1.05, 4);
  for (int i = 0; i < 10; ++i) {
    p.beta = B(rng);
    p.gamma = G(rng);
    const double tc = p.gamma * p.beta, v1 = K(rng) * tc;
    EXPECT_NEAR(entry_exit_point(p, v1).v0, entry_exit_scan(tc, v1), 1e-9);
  }
}

TEST(EntryExit, OrderingAndResidual) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> B(0.01, 0.9), G(0.5, 5), K(1.0001, 20);
  for (int i = 0; i < 200; ++i) {
    const auto p = params(0.5, B(rng), G(rng), 0.3);
    const double tc = p.gamma * p.beta, v1 = K(rng) * tc;
    const auto s = entry_exit_point(p, v1);
    EXPECT_GT(s.v0, 0.0);
    EXPECT_LT(s.v0, tc);
    EXPECT_LT(tc, s.v1);
    EXPECT_LT(std::abs(entry_exit_residual(tc, v1, s.v0)), 1e-10);
  }
}

TEST(EntryExit, IndependentOfDelta) {
  const auto a = entry_exit_point(params(0.5, 0.2, 3, 0.1), 1.316);
  const auto b = entry_exit_point(params(0.5, 0.2, 3, 0.5), 1.316);
  EXPECT_NEAR(a.v0, b.v0, 1e-12);
}

TEST(EntryExit, DegenerateEntry) {
  const auto p = params(0.5, 0.2, 3, 0.3);
  EXPECT_NEAR(entry_exit_point(p, 0.6 * (1 + 1e-6)).v0, 0.6, 1e-5);
  try {
    entry_exit_point(p, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_exit);
  }
}

TEST(Relaxation, Feasibility) {
  EXPECT_TRUE(relaxation_feasible(params(0.5, 0.2, 3, 0.3)));
  EXPECT_FALSE(relaxation_feasible(params(0.5, 0.2, 3, 0.6)));
  const double dH = kinetics::stability_thresholds(params(0.5, 0.2, 3, 0.3)).delta_H;
  EXPECT_FALSE(relaxation_feasible(params(0.5, 0.2, 3, dH)));
  try {
    relaxation_feasible(params(0.5, 0.2, 3, 0.7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_applicable);
  }
}

TEST(Regime, Labels) {
  EXPECT_EQ(classify_regime(kCanard.with_delta(0.40), 0.01).regime, Regime::I);
  EXPECT_EQ(classify_regime(kCanard.with_delta(0.3762), 0.01).regime, Regime::II);
  EXPECT_EQ(classify_regime(kCanard.with_delta(0.36), 0.01).regime, Regime::III_or_IV);
  const double ro = ode::locate_explosion_window(kCanard, 0.01).delta_lo;
  EXPECT_EQ(classify_regime(kCanard.with_delta(0.36), 0.01, ro).regime, Regime::IV);
  const auto l = classify_regime(kCanard.with_delta(0.5 * (ro + maximal_canard_delta(kCanard, 0.01))), 0.01, ro);
  EXPECT_EQ(l.regime, Regime::III);
}

TEST(Regime, ExhaustiveAndOrdered) {
  const double ro = 0.3761;
  for (double d = 0.30; d < 0.45; d += 1e-4) {
    const auto l = classify_regime(kCanard.with_delta(d), 0.01, ro);
    const int hits = (d > l.delta_H) + (d <= l.delta_H && d > l.delta_c) + (d <= l.delta_c && d > ro) + (d <= ro);
    EXPECT_EQ(hits, 1);
    EXPECT_LE(l.delta_c, l.delta_H);
  }
  EXPECT_THROW(classify_regime(kCanard, 0.0), Error);
}
