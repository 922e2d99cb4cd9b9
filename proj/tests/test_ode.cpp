#include <gtest/gtest.h>

#include <cmath>

#include "slowfast/ode.hpp"

using namespace slowfast;
using namespace slowfast::ode;

namespace {

ModelParams params(double alpha, double beta, double gamma, double delta, double eps) {
  ModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma;
  p.delta = delta;
  p.epsilon = eps;
  return p;
}

const ModelParams kCanard = params(0.5, 0.22, 3, 0.3, 0.01);
const ModelParams kRelax = params(0.5, 0.2, 3, 0.3, 0.01);

IntegratorOptions cartesian() {
  IntegratorOptions o;
  o.coordinates = Coordinates::cartesian;
  return o;
}

}  // namespace

TEST(Integrate, VAxisDecay) {
  for (auto opt : {IntegratorOptions{}, cartesian()}) {
    const auto p = params(0.5, 0.22, 3, 0.3, 0.1);
    const auto tr = integrate(p, State{0.0, 0.5}, 100.0, opt);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      EXPECT_EQ(tr.states[i].u, 0.0);
      EXPECT_NEAR(tr.states[i].v, 0.5 * std::exp(-p.epsilon * p.delta * tr.times[i]), 1e-6);
    }
  }
}

TEST(Integrate, UAxisInvariant) {
  for (auto opt : {IntegratorOptions{}, cartesian()}) {
    const auto tr = integrate(kCanard, State{0.3, 0.0}, 100.0, opt);
    for (const auto& s : tr.states) EXPECT_LE(std::abs(s.v), 1e-12);
    EXPECT_NEAR(tr.states.back().u, 1.0, 1e-6);
  }
}

TEST(Integrate, EquilibriumFidelity) {
  for (auto opt : {IntegratorOptions{}, cartesian()}) {
    for (const auto& e : kinetics::equilibria(kCanard)) {
      const auto tr = integrate(kCanard, State{e.u, e.v}, 100.0, opt);
      const double scale = 1.0 + std::hypot(e.u, e.v);
      for (const auto& s : tr.states) EXPECT_LT(std::hypot(s.u - e.u, s.v - e.v), 1e-8 * scale);
    }
  }
}

TEST(Integrate, TrajectoryInvariants) {
  const auto tr = integrate(kRelax, State{0.5, 1.0}, 3000.0, cartesian());
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  for (const auto& s : tr.states) {
    EXPECT_GE(s.u, 0.0);
    EXPECT_GE(s.v, 0.0);
  }
  EXPECT_EQ(tr.times.back(), 3000.0);
  EXPECT_GT(tr.stats.accepted, 0u);
}

TEST(Integrate, StableCoexistence) {
  const auto p = kCanard.with_delta(0.40);
  const auto [us, vs] = kinetics::coexistence_point(p);
  const auto tr = integrate(p, State{us + 0.01, vs - 0.01}, 20000.0);
  EXPECT_LT(std::hypot(tr.states.back().u - us, tr.states.back().v - vs), 1e-4);
}

TEST(Integrate, RelaxationFromGenericStart) {
  const auto tr = integrate(kCanard.with_delta(0.36), State{0.5, 1.0}, 6000.0);
  double umin = 1, umax = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    if (tr.times[i] > 3000.0) {
      umin = std::min(umin, tr.states[i].u);
      umax = std::max(umax, tr.states[i].u);
    }
  EXPECT_LT(umin, 0.05);
  EXPECT_GT(umax, 0.9);
}

TEST(Integrate, LogAndCartesianAgree) {
  const auto p = params(0.5, 0.22, 3, 0.3, 1.0);
  const auto a = integrate(p, State{0.5, 1.0}, 50.0);
  const auto b = integrate(p, State{0.5, 1.0}, 50.0, cartesian());
  EXPECT_NEAR(a.states.back().u, b.states.back().u, 1e-6);
  EXPECT_NEAR(a.states.back().v, b.states.back().v, 1e-6);
}

TEST(Integrate, StepUnderflowIsReported) {
  IntegratorOptions o;
  o.tol = 1e-15;
  o.h_min = 0.5;
  try {
    integrate(kRelax, State{0.5, 1.0}, 100.0, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::stiffness_failure);
    EXPECT_TRUE(e.numerical());
  }
}

TEST(Integrate, RejectsBadInput) {
  EXPECT_THROW(integrate(kRelax, State{-0.1, 1.0}, 10.0), Error);
  EXPECT_THROW(integrate(kRelax, State{0.1, 1.0}, -1.0), Error);
}

TEST(Cycle, NoneAboveHopf) {
  const auto p = kCanard.with_delta(0.40);
  EXPECT_EQ(detect_limit_cycle(p, default_seed(p)).type, CycleType::none);
  const auto q = params(0.5, 0.22, 3, 0.45, 1.0);
  EXPECT_EQ(detect_limit_cycle(q, default_seed(q)).type, CycleType::none);
}

TEST(Cycle, CanardFamilyTypes) {
  auto type_at = [](double d) {
    const auto p = kCanard.with_delta(d);
    return detect_limit_cycle(p, default_seed(p)).type;
  };
  EXPECT_EQ(type_at(0.3766), CycleType::hopf_small);
  EXPECT_EQ(type_at(0.3762), CycleType::canard_headless);
  EXPECT_EQ(type_at(0.376165), CycleType::canard_with_head);
  EXPECT_EQ(type_at(0.36), CycleType::relaxation);
}

TEST(Cycle, SummaryInvariants) {
  for (double d : {0.3766, 0.3762, 0.376165, 0.36}) {
    const auto p = kCanard.with_delta(d);
    const auto c = detect_limit_cycle(p, default_seed(p));
    ASSERT_NE(c.type, CycleType::none);
    EXPECT_GT(c.period, 0.0);
    EXPECT_LE(c.u_min, c.u_max);
    EXPECT_LE(c.v_min, c.v_max);
    EXPECT_GE(c.returns, 2);
    EXPECT_LE(c.residual, 1e-6);
  }
}

TEST(Cycle, ToleranceRefinement) {
  const auto p = params(0.5, 0.22, 3, 0.3, 1.0);
  CycleOptions a, b;
  a.integrator.tol = 1e-8;
  b.integrator.tol = 1e-10;
  const auto ca = detect_limit_cycle(p, default_seed(p), a);
  const auto cb = detect_limit_cycle(p, default_seed(p), b);
  ASSERT_NE(ca.type, CycleType::none);
  EXPECT_NEAR(ca.u_max / ca.u_min, cb.u_max / cb.u_min, 1e-3);
  EXPECT_NEAR(ca.v_max / ca.v_min, cb.v_max / cb.v_min, 1e-3);
}

TEST(Cycle, HalvingToleranceMovesExtremaLittle) {
  const auto p = params(0.5, 0.22, 3, 0.3, 1.0);
  for (double tol : {1e-8, 1e-9}) {
    CycleOptions a, b;
    a.integrator.tol = tol;
    b.integrator.tol = tol / 2;
    const auto ca = detect_limit_cycle(p, default_seed(p), a);
    const auto cb = detect_limit_cycle(p, default_seed(p), b);
    for (auto [x, y] : {std::pair{ca.u_min, cb.u_min}, std::pair{ca.u_max, cb.u_max}, std::pair{ca.v_min, cb.v_min},
                        std::pair{ca.v_max, cb.v_max}})
      EXPECT_LT(std::abs(x - y), 10 * tol);
  }
}

TEST(Cycle, RelaxationUniqueAcrossStarts) {
  const auto a = detect_limit_cycle(kRelax, State{0.5, 1.0});
  const auto b = detect_limit_cycle(kRelax, State{0.9, 0.3});
  const auto c = detect_limit_cycle(kRelax, State{0.05, 2.0});
  for (const auto* o : {&b, &c}) {
    EXPECT_NEAR(a.u_max, o->u_max, 1e-4);
    EXPECT_NEAR(a.v_min, o->v_min, 1e-4);
    EXPECT_NEAR(a.v_max, o->v_max, 1e-4);
    EXPECT_NEAR(a.u_min, o->u_min, 1e-4);
  }
  EXPECT_EQ(a.type, CycleType::relaxation);
}

TEST(Cycle, ConvergesToSingularOrbit) {
  const auto so = singular_relaxation_orbit(kRelax);
  EXPECT_NEAR(so.v1, 1.315658, 1e-5);
  EXPECT_NEAR(so.v0, 0.207510, 1e-5);
  double prev = INFINITY;
  for (double eps : {0.1, 0.01, 0.001}) {
    const auto p = kRelax.with_epsilon(eps);
    const auto c = detect_limit_cycle(p, State{0.5, 1.0});
    ASSERT_EQ(c.type, CycleType::relaxation) << eps;
    const double gap = orbit_gap(c.orbit, so.points);
    EXPECT_LT(gap, prev) << eps;
    prev = gap;
  }
}

TEST(OrbitGap, Basics) {
  const std::vector<State> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_EQ(orbit_gap(sq, sq), 0.0);
  std::vector<State> shifted = sq;
  for (auto& s : shifted) s.u += 0.25;
  EXPECT_NEAR(orbit_gap(sq, shifted), 0.25, 1e-15);
}

TEST(Sweep, SteadyAboveHopfCycleBelow) {
  const auto base = params(0.5, 0.2, 3, 0.3, 1.0);
  const double dH = kinetics::stability_thresholds(base).delta_H;
  const auto rows = bifurcation_sweep(base, 0.5, 0.2, 31, 1.0);
  ASSERT_EQ(rows.size(), 31u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty());
    if (r.delta > dH + 5e-3) EXPECT_EQ(r.type, CycleType::none) << r.delta;
    if (r.delta < dH - 5e-3) EXPECT_NE(r.type, CycleType::none) << r.delta;
  }
}

TEST(Sweep, RejectsBadRange) {
  EXPECT_THROW(bifurcation_sweep(kCanard, 0.3, 0.3, 5, 0.01), Error);
  EXPECT_THROW(bifurcation_sweep(kCanard, 0.3, 0.2, 1, 0.01), Error);
}

TEST(Sweep, ParallelMatchesSerialWithoutContinuation) {
  const auto base = params(0.5, 0.22, 3, 0.3, 1.0);
  SweepOptions one, three;
  one.continuation = three.continuation = false;
  one.threads = 1;
  three.threads = 3;
  const auto a = bifurcation_sweep(base, 0.4, 0.25, 7, 1.0, one);
  const auto b = bifurcation_sweep(base, 0.4, 0.25, 7, 1.0, three);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].delta, b[i].delta);
    EXPECT_EQ(a[i].type, b[i].type);
    EXPECT_EQ(a[i].period, b[i].period);
    EXPECT_EQ(a[i].u_min, b[i].u_min);
    EXPECT_EQ(a[i].v_max, b[i].v_max);
  }
}

TEST(Sweep, FailuresStayInRow) {
  SweepOptions o;
  o.cycle.integrator.h_min = 0.5;
  o.cycle.integrator.tol = 1e-15;
  const auto rows = bifurcation_sweep(kCanard, 0.36, 0.35, 2, 0.01, o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_FALSE(r.error.empty());
}

TEST(Explosion, WindowAtSmallEpsilon) {
  const auto w = locate_explosion_window(kCanard, 0.01);
  EXPECT_GE(w.delta_lo, 0.36);
  EXPECT_LE(w.delta_hi, 0.3762);
  EXPECT_LE(w.width(), 0.005);
  EXPECT_GT(cycle_amplitude(kCanard.with_delta(w.delta_lo)), 0.8);
  EXPECT_LT(cycle_amplitude(kCanard.with_delta(w.delta_hi)), 0.3);
}

TEST(Explosion, NarrowsAsEpsilonShrinks) {
  const auto a = locate_explosion_window(kCanard, 0.005);
  const auto b = locate_explosion_window(kCanard, 0.02);
  EXPECT_LT(a.width(), b.width());
}

TEST(Explosion, AbsentWithoutSlowFastStructure) {
  try {
    locate_explosion_window(kCanard, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::explosion_not_detected);
  }
}

TEST(Explosion, LargeAlleeParameterSpreadsTheTransition) {
  // Count sweep points with an intermediate amplitude on a common delta step.
  auto intermediate = [](const ModelParams& base, double from, double to, int n) {
    const auto rows = bifurcation_sweep(base, from, to, n, base.epsilon);
    const double full = rows.back().u_max - rows.back().u_min;
    int k = 0;
    for (const auto& r : rows) {
      const double a = r.u_max - r.u_min;
      if (a > 0.2 * full && a < 0.8 * full) ++k;
    }
    return k;
  };
  const int narrow = intermediate(kCanard, 0.3775, 0.3745, 7);
  const int wide = intermediate(params(0.5, 0.8, 3, 0.3, 0.01), 0.2395, 0.2305, 19);
  EXPECT_LE(narrow, 1);
  EXPECT_GE(wide, 3);
}
