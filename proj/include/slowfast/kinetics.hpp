#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string_view>
#include <vector>

#include "slowfast/detail/numerics.hpp"
#include "slowfast/error.hpp"
#include "slowfast/params.hpp"

/// Reaction terms, equilibria, Jacobians and critical-manifold geometry of
/// the slow-fast prey-predator model.
namespace slowfast::kinetics {

/// Eigenvalues with |Re| below this are reported as non-hyperbolic.
inline constexpr double kHyperbolicityTol = 1e-9;

struct Rates {
  double du_dt = 0.0;
  double dv_dt = 0.0;
};

namespace detail {
inline void require_finite_state(double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v))
    throw Error(ErrorKind::invalid_input, "state must be finite");
}
}  // namespace detail

/// Holling type II functional response u / (1 + alpha u).
inline double functional_response(const ModelParams& p, double u) noexcept {
  return u / (1.0 + p.alpha * u);
}

/// Per-capita prey rate f1 = f / u. Both rates are written in Kolmogorov
/// form so the axes stay exactly invariant.
inline double prey_per_capita(const ModelParams& p, double u, double v) noexcept {
  return p.gamma * (1.0 - u) * (u + p.beta) - v / (1.0 + p.alpha * u);
}

/// Per-capita predator rate g1 = g / v (without the epsilon factor).
inline double predator_per_capita(const ModelParams& p, double u) noexcept {
  return functional_response(p, u) - p.delta;
}

/// f(u, v) of the prey equation.
inline double prey_rate(const ModelParams& p, double u, double v) noexcept {
  return u * prey_per_capita(p, u, v);
}

/// g(u, v) of the predator equation, without the epsilon factor.
inline double predator_rate(const ModelParams& p, double u, double v) noexcept {
  return v * predator_per_capita(p, u);
}

inline Rates reaction_rates(const ModelParams& p, double u, double v) {
  detail::require_finite_state(u, v);
  return {prey_rate(p, u, v), p.epsilon * predator_rate(p, u, v)};
}

// ---------------------------------------------------------------------------
// Critical manifold v = q0(u) and its derivatives.

inline double critical_manifold_q0(const ModelParams& p, double u) noexcept {
  return p.gamma * (1.0 - u) * (u + p.beta) * (1.0 + p.alpha * u);
}

/// q0(u) = gamma * (c3 u^3 + c2 u^2 + c1 u + c0).
struct CubicCoefficients {
  double c3, c2, c1, c0;
};

inline CubicCoefficients q0_cubic(const ModelParams& p) noexcept {
  const double a = p.alpha, b = p.beta;
  return {-a, a - a * b - 1.0, 1.0 - b + a * b, b};
}

inline double critical_manifold_slope(const ModelParams& p, double u) noexcept {
  const auto c = q0_cubic(p);
  return p.gamma * ((3.0 * c.c3 * u + 2.0 * c.c2) * u + c.c1);
}

inline double critical_manifold_curvature(const ModelParams& p, double u) noexcept {
  const auto c = q0_cubic(p);
  return p.gamma * (6.0 * c.c3 * u + 2.0 * c.c2);
}

/// Discriminant 1 + a + a^2 - a b + a^2 b + a^2 b^2 shared by the fold and
/// Hopf formulas.
inline double fold_discriminant(double alpha, double beta) noexcept {
  const double a = alpha, b = beta;
  return 1.0 + a + a * a - a * b + a * a * b + a * a * b * b;
}

// ---------------------------------------------------------------------------
// Jacobian of (f, eps g), hand-differentiated.

struct Jacobian {
  double fu, fv, gu, gv;  // gu, gv include the epsilon factor

  double trace() const noexcept { return fu + gv; }
  double det() const noexcept { return fu * gv - fv * gu; }

  std::array<std::complex<double>, 2> eigenvalues() const {
    const double tr = trace();
    const double disc = tr * tr - 4.0 * det();
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      // Avoid cancellation in the smaller root.
      const double big = tr >= 0.0 ? 0.5 * (tr + s) : 0.5 * (tr - s);
      const double small = big != 0.0 ? det() / big : 0.0;
      std::array<std::complex<double>, 2> ev{std::complex<double>(big), std::complex<double>(small)};
      if (ev[0].real() < ev[1].real()) std::swap(ev[0], ev[1]);
      return ev;
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
  }
};

inline double prey_rate_du(const ModelParams& p, double u, double v) noexcept {
  const double s = 1.0 + p.alpha * u;
  return p.gamma * (u * (2.0 - 3.0 * u - 2.0 * p.beta) + p.beta) - v / (s * s);
}

inline double prey_rate_dv(const ModelParams& p, double u) noexcept {
  return -u / (1.0 + p.alpha * u);
}

inline double prey_rate_duu(const ModelParams& p, double u, double v) noexcept {
  const double s = 1.0 + p.alpha * u;
  return p.gamma * (2.0 - 6.0 * u - 2.0 * p.beta) + 2.0 * p.alpha * v / (s * s * s);
}

inline Jacobian jacobian(const ModelParams& p, double u, double v) noexcept {
  const double s = 1.0 + p.alpha * u;
  return {prey_rate_du(p, u, v), prey_rate_dv(p, u), p.epsilon * v / (s * s),
          p.epsilon * predator_per_capita(p, u)};
}

// ---------------------------------------------------------------------------
// Equilibria.

enum class EquilibriumKind { origin, prey_only, coexistence };

enum class Stability {
  stable_node,
  stable_focus,
  unstable_node,
  unstable_focus,
  saddle,
  non_hyperbolic,
};

constexpr std::string_view to_string(EquilibriumKind k) noexcept {
  switch (k) {
    case EquilibriumKind::origin: return "E0";
    case EquilibriumKind::prey_only: return "E1";
    case EquilibriumKind::coexistence: return "E*";
  }
  return "?";
}

constexpr std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::stable_node: return "stable_node";
    case Stability::stable_focus: return "stable_focus";
    case Stability::unstable_node: return "unstable_node";
    case Stability::unstable_focus: return "unstable_focus";
    case Stability::saddle: return "saddle";
    case Stability::non_hyperbolic: return "non_hyperbolic";
  }
  return "?";
}

inline Stability classify(const std::array<std::complex<double>, 2>& ev) noexcept {
  if (std::abs(ev[0].real()) < kHyperbolicityTol || std::abs(ev[1].real()) < kHyperbolicityTol)
    return Stability::non_hyperbolic;
  const bool complex_pair = ev[0].imag() != 0.0;
  if (complex_pair) return ev[0].real() < 0.0 ? Stability::stable_focus : Stability::unstable_focus;
  if ((ev[0].real() < 0.0) != (ev[1].real() < 0.0)) return Stability::saddle;
  return ev[0].real() < 0.0 ? Stability::stable_node : Stability::unstable_node;
}

struct EquilibriumReport {
  EquilibriumKind kind;
  double u = 0.0;
  double v = 0.0;
  Stability stability = Stability::non_hyperbolic;
  std::array<std::complex<double>, 2> eigenvalues{};
};

inline bool coexistence_feasible(const ModelParams& p) noexcept {
  return p.delta * (p.alpha + 1.0) < 1.0;
}

/// Coordinates of E*: u* = delta / (1 - alpha delta), v* = q0(u*).
/// Meaningful only when coexistence_feasible(p).
inline std::array<double, 2> coexistence_point(const ModelParams& p) noexcept {
  const double u = p.delta / (1.0 - p.alpha * p.delta);
  return {u, critical_manifold_q0(p, u)};
}

inline EquilibriumReport make_report(const ModelParams& p, EquilibriumKind kind, double u, double v) {
  EquilibriumReport r{kind, u, v};
  r.eigenvalues = jacobian(p, u, v).eigenvalues();
  r.stability = classify(r.eigenvalues);
  return r;
}

inline std::vector<EquilibriumReport> equilibria(const ModelParams& p) {
  p.validate();
  std::vector<EquilibriumReport> out;
  out.push_back(make_report(p, EquilibriumKind::origin, 0.0, 0.0));
  out.push_back(make_report(p, EquilibriumKind::prey_only, 1.0, 0.0));
  if (coexistence_feasible(p)) {
    const auto [u, v] = coexistence_point(p);
    out.push_back(make_report(p, EquilibriumKind::coexistence, u, v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thresholds.

struct StabilityThresholds {
  double delta_T;  ///< transcritical E1 / E*: 1 / (1 + alpha)
  double delta_H;  ///< Hopf of E*
};

/// Closed-form Hopf threshold. Independent of gamma and epsilon.
inline double hopf_threshold_closed_form(double alpha, double beta) {
  const double a = alpha, b = beta;
  const double denom = a * (-1.0 - a + a * b + a * a * b);
  if (std::abs(denom) < 1e-14)
    throw Error(ErrorKind::analysis_degenerate, "Hopf threshold denominator vanishes");
  const double disc = fold_discriminant(a, b);
  if (disc < 0.0) throw Error(ErrorKind::analysis_degenerate, "negative discriminant in Hopf threshold");
  return (1.0 + a * a * b - std::sqrt(disc)) / denom;
}

/// Trace of the Jacobian at E* as a function of delta (other parameters from p).
inline double coexistence_trace(const ModelParams& p, double delta) {
  const ModelParams q = p.with_delta(delta);
  const auto [u, v] = coexistence_point(q);
  return jacobian(q, u, v).trace();
}

/// delta_T and delta_H. The closed form is cross-checked against a bracketed
/// root of trace(J*) in delta; a disagreement above 1e-6 throws
/// ErrorKind::internal_consistency. `p.delta` is ignored.
inline StabilityThresholds stability_thresholds(const ModelParams& p) {
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0) || !std::isfinite(p.beta))
    throw Error(ErrorKind::invalid_input, "alpha and gamma must be positive, beta finite");
  const double delta_T = 1.0 / (1.0 + p.alpha);
  const double delta_H = hopf_threshold_closed_form(p.alpha, p.beta);
  if (!(delta_H > 0.0 && delta_H < delta_T))
    throw Error(ErrorKind::analysis_degenerate, "Hopf threshold outside the coexistence range");

  const auto trace = [&](double d) { return coexistence_trace(p, d); };
  double lo = 1e-9, hi = delta_T * (1.0 - 1e-12);
  if ((trace(lo) > 0.0) == (trace(hi) > 0.0))
    throw Error(ErrorKind::internal_consistency, "trace(J*) has no sign change over (0, delta_T)");
  const auto [a, b] = slowfast::detail::bisect(trace, lo, hi, 1e-15);
  const double bracketed = 0.5 * (a + b);
  if (std::abs(bracketed - delta_H) > 1e-6)
    throw Error(ErrorKind::internal_consistency, "closed-form Hopf threshold disagrees with trace root");
  return {delta_T, delta_H};
}

// ---------------------------------------------------------------------------
// Fold point of the critical manifold.

struct CriticalManifoldGeometry {
  double fold_u = 0.0;
  double fold_v = 0.0;
  double transcritical_v = 0.0;  ///< gamma beta, where q0 meets the v-axis
  std::array<double, 2> attracting_range{};  ///< (u_f, 1]
  std::array<double, 2> repelling_range{};   ///< [0, u_f)
};

inline double fold_u_closed_form(double alpha, double beta) {
  const double disc = fold_discriminant(alpha, beta);
  if (disc < 0.0) throw Error(ErrorKind::analysis_degenerate, "negative fold discriminant");
  return ((alpha - alpha * beta - 1.0) + std::sqrt(disc)) / (3.0 * alpha);
}

inline CriticalManifoldGeometry fold_point(const ModelParams& p) {
  if (!(p.alpha > 0.0)) throw Error(ErrorKind::invalid_input, "alpha must be positive");
  const double uf = fold_u_closed_form(p.alpha, p.beta);
  if (!(uf > 0.0 && uf < 1.0))
    throw Error(ErrorKind::analysis_degenerate, "fold point lies outside (0, 1)");
  const double vf = critical_manifold_q0(p, uf);

  // Fold conditions on f itself.
  const double scale = p.gamma * (1.0 + std::abs(p.beta));
  if (std::abs(prey_rate_du(p, uf, vf)) > 1e-9 * scale)
    throw Error(ErrorKind::internal_consistency, "f_u does not vanish at the fold");
  if (prey_rate_dv(p, uf) == 0.0 || prey_rate_duu(p, uf, vf) == 0.0 ||
      critical_manifold_curvature(p, uf) >= 0.0)
    throw Error(ErrorKind::analysis_degenerate, "fold is degenerate");

  CriticalManifoldGeometry g;
  g.fold_u = uf;
  g.fold_v = vf;
  g.transcritical_v = p.gamma * p.beta;
  g.attracting_range = {uf, 1.0};
  g.repelling_range = {0.0, uf};
  return g;
}

/// Direction of the fast (layer) flow at predator level v_const:
/// +1 prey grows, -1 prey declines, 0 on the critical manifold.
inline int layer_flow_direction(const ModelParams& p, double u, double v_const) {
  if (!(u > 0.0)) throw Error(ErrorKind::invalid_input, "layer flow needs u > 0");
  const double q = critical_manifold_q0(p, u);
  // f = u / (1 + alpha u) * (q0(u) - v)
  const double diff = q - v_const;
  if (std::abs(diff) <= 1e-12 * std::max({1.0, std::abs(q), std::abs(v_const)})) return 0;
  return diff > 0.0 ? 1 : -1;
}

}  // namespace slowfast::kinetics
