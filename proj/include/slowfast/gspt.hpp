#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "slowfast/error.hpp"
#include "slowfast/kinetics.hpp"
#include "slowfast/params.hpp"

/// Geometric singular perturbation analytics: the perturbed slow manifold,
/// the canard-point normal form and its blow-up coefficients, the singular
/// Hopf and maximal canard curves, the entry-exit map along the v-axis and
/// the four-domain regime classification.
namespace slowfast::gspt {

inline constexpr double kDefaultGuardRadius = 1e-3;

// ---------------------------------------------------------------------------
// Slow manifold  v = q(u, eps) = q0(u) + eps q1(u) + eps^2 q2(u)

/// Second-order asymptotic expansion of the invariant slow manifold near the
/// parabolic branch of the critical manifold. q1 and q2 follow from
/// collecting powers of eps in the invariance condition
///
///   eps q (u (1 - alpha delta) - delta) = u q_u (q0 - q),
///
/// and both blow up like 1 / q0'(u), so evaluation is refused within
/// `guard_radius` of u = 0 and of the critical points of q0.
class SlowManifoldExpansion {
 public:
  SlowManifoldExpansion(const ModelParams& p, int order, double guard_radius = kDefaultGuardRadius)
      : p_(p), order_(order), guard_(guard_radius) {
    if (order < 0 || order > 2) throw Error(ErrorKind::invalid_input, "expansion order must be 0, 1 or 2");
    if (!(guard_radius >= 0.0)) throw Error(ErrorKind::invalid_input, "guard radius must be non-negative");
    singular_.push_back(0.0);
    // Real roots of q0'(u) = 0.
    const auto c = kinetics::q0_cubic(p);
    const double qa = 3.0 * c.c3, qb = 2.0 * c.c2, qc = c.c1;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      singular_.push_back((-qb + s) / (2.0 * qa));
      singular_.push_back((-qb - s) / (2.0 * qa));
    }
  }

  int order() const noexcept { return order_; }
  double guard_radius() const noexcept { return guard_; }
  const ModelParams& params() const noexcept { return p_; }

  /// u = 0 and every real critical point of q0.
  const std::vector<double>& singular_set() const noexcept { return singular_; }

  bool near_singular(double u) const noexcept {
    for (double s : singular_)
      if (std::abs(u - s) < guard_) return true;
    return false;
  }

  double q0(double u) const noexcept { return kinetics::critical_manifold_q0(p_, u); }

  double q1(double u) const {
    check(u);
    return numerator_factor(u) * q0(u) / denominator(u);
  }

  /// Closed-form derivative of q1.
  double q1_prime(double u) const {
    check(u);
    const double s = numerator_factor(u);
    const double n = q0(u) * s;
    const double n_prime = kinetics::critical_manifold_slope(p_, u) * s + q0(u) * (1.0 - p_.alpha * p_.delta);
    const double den = denominator(u);
    const double den_prime =
        -kinetics::critical_manifold_slope(p_, u) - u * kinetics::critical_manifold_curvature(p_, u);
    return (n_prime * den - n * den_prime) / (den * den);
  }

  double q2(double u) const {
    const double q1u = q1(u);
    return (q1u * numerator_factor(u) + u * q1u * q1_prime(u)) / denominator(u);
  }

  /// q(u, eps) truncated at the configured order.
  double operator()(double u, double epsilon) const {
    double q = q0(u);
    if (order_ >= 1) q += epsilon * q1(u);
    if (order_ >= 2) q += epsilon * epsilon * q2(u);
    return q;
  }

 private:
  /// u (1 - alpha delta) - delta, which vanishes at u*.
  double numerator_factor(double u) const noexcept { return u * (1.0 - p_.alpha * p_.delta) - p_.delta; }
  double denominator(double u) const noexcept { return -u * kinetics::critical_manifold_slope(p_, u); }

  void check(double u) const {
    if (near_singular(u)) {
      std::ostringstream os;
      os << "u = " << u << " lies within " << guard_ << " of a non-hyperbolic point of the critical manifold";
      throw Error(ErrorKind::singular_expansion, os.str());
    }
  }

  ModelParams p_;
  int order_;
  double guard_;
  std::vector<double> singular_;
};

inline SlowManifoldExpansion slow_manifold_expand(const ModelParams& p, int order,
                                                  double guard_radius = kDefaultGuardRadius) {
  p.validate();
  return SlowManifoldExpansion(p, order, guard_radius);
}

// ---------------------------------------------------------------------------
// Canard-point normal form and blow-up coefficients.

/// Coefficients of the chart-K2 desingularised system at the canard point
/// delta = delta*:
///
///   U' = -b1 V + b2 U^2 + r (a1 U - a2 U V + a3 U^3)
///   V' =  b3 U - b4 lambda + r (a4 U^2 + a5 V)
///
/// a1 = 0 because the fast equation has no eps-dependent term; a5 is the
/// V-coefficient u* - (1 + alpha u*) delta* of the slow equation, which
/// vanishes at the canard point; a4 is the U^2-coefficient of the rescaled
/// slow equation, which is zero because G = v (u (1 - alpha delta) - delta)
/// is linear in u. See docs/normal_form.md for the derivation.
struct NormalFormCoefficients {
  double delta_star = 0.0;
  double u_star = 0.0;
  double v_star = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0;
};

inline NormalFormCoefficients normal_form_coefficients(const ModelParams& p) {
  const auto thresholds = kinetics::stability_thresholds(p);
  const ModelParams at = p.with_delta(thresholds.delta_H);
  if (!kinetics::coexistence_feasible(at))
    throw Error(ErrorKind::analysis_degenerate, "coexistence equilibrium infeasible at delta_H");

  const double a = p.alpha, b = p.beta, g = p.gamma, ds = thresholds.delta_H;
  const auto [us, vs] = kinetics::coexistence_point(at);

  NormalFormCoefficients nf;
  nf.delta_star = ds;
  nf.u_star = us;
  nf.v_star = vs;
  nf.b1 = us;
  nf.b2 = -g * (-1.0 + 6.0 * us * us * a + 3.0 * us * (1.0 + a * (b - 1.0)) + b - a * b);
  nf.b3 = vs * (1.0 - a * ds);
  nf.b4 = vs * (1.0 + a * us);
  nf.a1 = 0.0;
  nf.a2 = 1.0;
  nf.a3 = -(g + a * g * (4.0 * us + b - 1.0));
  nf.a4 = 0.0;
  nf.a5 = 0.0;

  // The U^2 coefficient of the time-rescaled fast equation F = (1 + alpha u) f
  // is F_uu / 2 = (1 + alpha u*) f_uu / 2 at the fold, where f_u = 0.
  const double half_Fuu = 0.5 * (1.0 + a * us) * kinetics::prey_rate_duu(at, us, vs);
  if (std::abs(nf.b2 - half_Fuu) > 1e-9 * std::max(1.0, std::abs(nf.b2)))
    throw Error(ErrorKind::internal_consistency, "b2 disagrees with the fold curvature");
  const double h6 = us - (1.0 + us * a) * ds;
  if (std::abs(h6) > 1e-10)
    throw Error(ErrorKind::internal_consistency, "slow equation has a V term at the canard point");
  if (!(nf.b1 > 0.0 && nf.b3 > 0.0 && nf.b4 > 0.0))
    throw Error(ErrorKind::analysis_degenerate, "blow-up coefficients b1, b3, b4 must be positive");
  return nf;
}

/// Melnikov aggregation constants and the distance coefficients d_r and
/// d_lambda between the attracting and repelling slow manifolds.
struct MelnikovCoefficients {
  double A1 = 0.0, A2 = 0.0, A3 = 0.0, A4 = 0.0, A5 = 0.0;
  double d_r = 0.0;
  double d_lambda = 0.0;

  /// (3 A1 / (4 A4^2) + A2 / (2 A4) + A3): the Gaussian-moment combination.
  double moment_sum() const noexcept { return 3.0 * A1 / (4.0 * A4 * A4) + A2 / (2.0 * A4) + A3; }

  /// d_r / d_lambda without going through the common prefactor.
  double distance_ratio() const noexcept { return moment_sum() / A5; }
};

inline MelnikovCoefficients melnikov_coefficients(const NormalFormCoefficients& nf) {
  const double b1 = nf.b1, b2 = nf.b2, b3 = nf.b3, b4 = nf.b4;
  if (b1 == 0.0 || b2 == 0.0)
    throw Error(ErrorKind::analysis_degenerate, "b1 and b2 must be non-zero");
  MelnikovCoefficients m;
  m.A1 = nf.a3 * b3 - nf.a2 * b2 * b3 / b1;
  m.A2 = nf.a1 * b3 + nf.a2 * b3 * b3 / (2.0 * b2) - nf.a4 * b1 * b3 / (2.0 * b2) - nf.a5 * b3 / 2.0;
  m.A3 = nf.a5 * b1 * b3 * b3 / (4.0 * b2 * b2);
  m.A4 = 2.0 * b2 * b2 / (b1 * b3);
  m.A5 = b1 * b3 * b4 / (2.0 * b2);
  if (!(m.A4 > 0.0)) throw Error(ErrorKind::analysis_degenerate, "A4 must be positive");
  const double prefactor = std::numbers::e * std::sqrt(std::numbers::pi / m.A4);
  m.d_r = prefactor * m.moment_sum();
  m.d_lambda = prefactor * m.A5;
  return m;
}

inline MelnikovCoefficients melnikov_coefficients(const ModelParams& p) {
  return melnikov_coefficients(normal_form_coefficients(p));
}

/// delta_H(sqrt eps) and delta_c(sqrt eps) together with the coefficients
/// they are built from.
struct SlowFastCurves {
  NormalFormCoefficients normal_form;
  MelnikovCoefficients melnikov;

  double delta_star() const noexcept { return normal_form.delta_star; }

  /// First-order singular Hopf curve; the O(eps^{3/2}) remainder is dropped.
  double singular_hopf(double epsilon) const {
    const auto& n = normal_form;
    return n.delta_star - n.b3 * (n.a1 + n.a5) / (2.0 * n.b2 * n.b4) * epsilon;
  }

  /// First-order maximal canard curve.
  double maximal_canard(double epsilon) const {
    return normal_form.delta_star - melnikov.distance_ratio() * epsilon;
  }
};

inline SlowFastCurves slow_fast_curves(const ModelParams& p) {
  SlowFastCurves c;
  c.normal_form = normal_form_coefficients(p);
  c.melnikov = melnikov_coefficients(c.normal_form);
  return c;
}

inline double singular_hopf_delta(const ModelParams& p, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::invalid_input, "epsilon must be non-negative");
  return slow_fast_curves(p).singular_hopf(epsilon);
}

inline double maximal_canard_delta(const ModelParams& p, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::invalid_input, "epsilon must be non-negative");
  return slow_fast_curves(p).maximal_canard(epsilon);
}

// ---------------------------------------------------------------------------
// Entry-exit along the v-axis.

struct EntryExitSolution {
  double v1 = 0.0;        ///< entry predator density (above gamma beta)
  double v0 = 0.0;        ///< exit predator density (below gamma beta)
  double tc = 0.0;        ///< transcritical level gamma beta
  double residual = 0.0;  ///< (v1 - v0) - tc ln(v1 / v0)
};

/// (v1 - v0) - tc ln(v1 / v0). Increasing in v0 on (0, tc).
inline double entry_exit_residual(double tc, double v1, double v0) noexcept {
  return (v1 - v0) - tc * std::log(v1 / v0);
}

/// Exit point v0 of a trajectory that lands on the v-axis at v1 > gamma beta.
/// The balance does not involve delta.
inline EntryExitSolution entry_exit_point(const ModelParams& p, double v1) {
  const double tc = p.gamma * p.beta;
  if (!(tc > 0.0)) throw Error(ErrorKind::not_applicable, "entry-exit needs gamma beta > 0");
  if (!std::isfinite(v1) || v1 <= tc) {
    std::ostringstream os;
    os << "v1 = " << v1 << " does not exceed gamma beta = " << tc << "; the trajectory never enters the repelling segment";
    throw Error(ErrorKind::no_exit, os.str());
  }
  const auto F = [&](double v0) { return entry_exit_residual(tc, v1, v0); };

  double lo = 0.5 * tc;
  for (int i = 0; F(lo) >= 0.0; ++i) {
    if (i > 2000 || lo == 0.0) throw Error(ErrorKind::internal_consistency, "entry-exit root not bracketed");
    lo *= 0.5;
  }
  double hi = tc;
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double r = F(mid);
    if (std::abs(r) < 1e-12 && hi - lo < 1e-12 * tc) break;
    if (mid <= lo || mid >= hi) break;
    if (r < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {v1, mid, tc, F(mid)};
}

// ---------------------------------------------------------------------------
// Relaxation-oscillation hypothesis and regime labels.

/// True iff E* sits on the repelling branch of the critical manifold,
/// u* < u_f (strictly, with a 1e-12 margin so the canard point is excluded).
inline bool relaxation_feasible(const ModelParams& p) {
  if (!kinetics::coexistence_feasible(p))
    throw Error(ErrorKind::not_applicable, "coexistence equilibrium is infeasible");
  const double us = kinetics::coexistence_point(p)[0];
  const double uf = kinetics::fold_point(p).fold_u;
  return us < uf - 1e-12;
}

enum class Regime { I, II, III, IV, III_or_IV };

constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
    case Regime::IV: return "IV";
    case Regime::III_or_IV: return "III|IV";
  }
  return "?";
}

constexpr std::string_view describe(Regime r) noexcept {
  switch (r) {
    case Regime::I: return "stable coexistence";
    case Regime::II: return "canard without head";
    case Regime::III: return "canard with head";
    case Regime::IV: return "relaxation oscillation";
    case Regime::III_or_IV: return "canard with head or relaxation oscillation";
  }
  return "?";
}

struct RegimeLabel {
  Regime regime = Regime::I;
  double delta_H = 0.0;               ///< singular Hopf threshold at this eps
  double delta_c = 0.0;               ///< maximal canard threshold at this eps
  std::optional<double> delta_ro;     ///< relaxation onset, when supplied
};

/// Places (delta, eps) in one of the four domains bounded by the singular
/// Hopf curve, the maximal canard curve and the relaxation onset. The onset
/// has no closed form; without it the lower two domains are merged.
inline RegimeLabel classify_regime(const ModelParams& p, double epsilon,
                                   std::optional<double> delta_ro = std::nullopt) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::invalid_input, "epsilon must lie in (0, 1]");
  const auto curves = slow_fast_curves(p);
  RegimeLabel label;
  label.delta_H = curves.singular_hopf(epsilon);
  label.delta_c = curves.maximal_canard(epsilon);
  label.delta_ro = delta_ro;
  const double d = p.delta;
  if (d > label.delta_H)
    label.regime = Regime::I;
  else if (d > label.delta_c)
    label.regime = Regime::II;
  else if (!delta_ro)
    label.regime = Regime::III_or_IV;
  else if (d > *delta_ro)
    label.regime = Regime::III;
  else
    label.regime = Regime::IV;
  return label;
}

}  // namespace slowfast::gspt
