#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "slowfast/detail/numerics.hpp"
#include "slowfast/error.hpp"
#include "slowfast/gspt.hpp"
#include "slowfast/kinetics.hpp"
#include "slowfast/params.hpp"

namespace slowfast::ode {

struct State {
  double u = 0.0;
  double v = 0.0;
};

/// Integration variables. In `log` mode the integrator advances (ln u, ln v),
/// which keeps both densities positive and resolves the exponentially small
/// prey densities reached on the v-axis during relaxation oscillations. A
/// density that is exactly zero maps to -inf and stays there, so both axes
/// remain invariant.
enum class Coordinates { log, cartesian };

struct IntegratorOptions {
  double tol = 1e-10;
  double h_init = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-14;
  Coordinates coordinates = Coordinates::log;
  std::size_t max_steps = 200'000'000;
};

struct StepStatistics {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t projections = 0;  ///< negative components reset to zero (cartesian mode)
};

/// Raw integration variables, either (u, v) or (ln u, ln v).
struct RawState {
  std::array<double, 2> z{0.0, 0.0};
  Coordinates coordinates = Coordinates::log;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  StepStatistics stats;
  RawState final_raw;
};

namespace detail {

inline double to_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

/// Dormand-Prince 5(4) with a PI-free standard controller.
class Dopri5 {
 public:
  Dopri5(const ModelParams& p, const RawState& start, double t0, const IntegratorOptions& opt)
      : p_(p), opt_(opt), mode_(start.coordinates), z_(start.z), t_(t0), h_(opt.h_init) {
    if (!(opt.tol > 0.0)) throw Error(ErrorKind::invalid_input, "integrator tolerance must be positive");
    if (!(opt.h_init > 0.0) || !(opt.h_max > 0.0)) throw Error(ErrorKind::invalid_input, "step bounds must be positive");
    z_prev_ = z_;
    t_prev_ = t_;
    k1_ = rhs(z_);
  }

  Dopri5(const ModelParams& p, State y0, double t0, const IntegratorOptions& opt)
      : Dopri5(p, encode(y0, opt.coordinates), t0, opt) {}

  static RawState encode(State y, Coordinates c) {
    if (!(std::isfinite(y.u) && std::isfinite(y.v)) || y.u < 0.0 || y.v < 0.0)
      throw Error(ErrorKind::invalid_input, "initial state must be finite and non-negative");
    if (c == Coordinates::log) return {{to_log(y.u), to_log(y.v)}, c};
    return {{y.u, y.v}, c};
  }

  State decode(const std::array<double, 2>& z) const noexcept {
    if (mode_ == Coordinates::log) return {std::exp(std::min(z[0], 700.0)), std::exp(std::min(z[1], 700.0))};
    return {z[0], z[1]};
  }

  double t() const noexcept { return t_; }
  double t_prev() const noexcept { return t_prev_; }
  double last_h() const noexcept { return t_ - t_prev_; }
  State state() const noexcept { return decode(z_); }
  State prev_state() const noexcept { return decode(z_prev_); }
  RawState raw() const noexcept { return {z_, mode_}; }
  const std::array<double, 2>& z() const noexcept { return z_; }
  const StepStatistics& stats() const noexcept { return stats_; }
  void set_h_max(double h) noexcept { opt_.h_max = h; }

  /// Time derivative of the integration variables.
  std::array<double, 2> rhs(const std::array<double, 2>& z) const noexcept {
    if (mode_ == Coordinates::log) {
      const double u = std::exp(std::min(z[0], 700.0));
      const double v = std::exp(std::min(z[1], 700.0));
      const double du = std::isinf(z[0]) ? 0.0 : kinetics::prey_per_capita(p_, u, v);
      const double dv = std::isinf(z[1]) ? 0.0 : p_.epsilon * kinetics::predator_per_capita(p_, u);
      return {du, dv};
    }
    return {kinetics::prey_rate(p_, z[0], z[1]), p_.epsilon * kinetics::predator_rate(p_, z[0], z[1])};
  }

  /// One accepted step that does not pass `t_limit`. Returns false when the
  /// integrator already sits at `t_limit`.
  bool step(double t_limit) {
    if (t_ >= t_limit) return false;
    for (;;) {
      double h = std::min({h_, opt_.h_max, t_limit - t_});
      const bool hits_limit = (h == t_limit - t_);
      if (h < opt_.h_min || t_ + h == t_) {
        std::ostringstream os;
        os << "step size " << h << " underflowed at t = " << t_ << "; reduce tol or t_end";
        throw Error(ErrorKind::stiffness_failure, os.str());
      }
      if (++steps_ > opt_.max_steps) throw Error(ErrorKind::stiffness_failure, "step budget exhausted");

      std::array<double, 2> z5, k7;
      const double err = attempt(h, z5, k7);
      if (!(err <= 1.0)) {
        ++stats_.rejected;
        const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
        h_ = h * fac;
        continue;
      }
      if (mode_ == Coordinates::cartesian) {
        bool reject = false;
        std::size_t fixes = 0;
        for (double& c : z5) {
          if (c < 0.0) {
            if (-c < opt_.tol) {
              c = 0.0;
              ++fixes;
            } else {
              reject = true;
            }
          }
        }
        if (reject) {
          ++stats_.rejected;
          h_ = 0.5 * h;
          continue;
        }
        if (fixes) {
          stats_.projections += fixes;
          k7 = rhs(z5);
        }
      }
      ++stats_.accepted;
      z_prev_ = z_;
      t_prev_ = t_;
      z_ = z5;
      t_ = hits_limit ? t_limit : t_ + h;
      k1_ = k7;
      const double fac = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
      h_ = h * fac;
      return true;
    }
  }

  /// State at t_prev + s, recomputed by a single step of length s from the
  /// previous accepted point; 0 <= s <= last_h().
  State sub_step(double s) const {
    if (s <= 0.0) return decode(z_prev_);
    std::array<double, 2> z5, k7;
    const auto k1 = rhs(z_prev_);
    stage(z_prev_, k1, s, z5, k7, nullptr);
    if (mode_ == Coordinates::cartesian) {
      z5[0] = std::max(z5[0], 0.0);
      z5[1] = std::max(z5[1], 0.0);
    }
    return decode(z5);
  }

  std::array<double, 2> sub_step_raw(double s) const {
    if (s <= 0.0) return z_prev_;
    std::array<double, 2> z5, k7;
    stage(z_prev_, rhs(z_prev_), s, z5, k7, nullptr);
    return z5;
  }

 private:
  double attempt(double h, std::array<double, 2>& z5, std::array<double, 2>& k7) const {
    std::array<double, 2> e{};
    stage(z_, k1_, h, z5, k7, &e);
    double acc = 0.0;
    int n = 0;
    for (int i = 0; i < 2; ++i) {
      if (mode_ == Coordinates::log && std::isinf(z_[i])) continue;
      if (!std::isfinite(z5[i])) return std::numeric_limits<double>::infinity();
      const double sc = opt_.tol * (1.0 + std::max(std::abs(z_[i]), std::abs(z5[i])));
      const double r = e[i] / sc;
      acc += r * r;
      ++n;
    }
    return n ? std::sqrt(acc / n) : 0.0;
  }

  void stage(const std::array<double, 2>& z, const std::array<double, 2>& k1, double h, std::array<double, 2>& z5,
             std::array<double, 2>& k7, std::array<double, 2>* err) const {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                     b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    std::array<double, 2> y, k2, k3, k4, k5, k6;
    auto fwd = [&](auto&& combo) {
      for (int i = 0; i < 2; ++i) y[i] = std::isinf(z[i]) ? z[i] : z[i] + h * combo(i);
      return rhs(y);
    };
    k2 = fwd([&](int i) { return a21 * k1[i]; });
    k3 = fwd([&](int i) { return a31 * k1[i] + a32 * k2[i]; });
    k4 = fwd([&](int i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    k5 = fwd([&](int i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    k6 = fwd([&](int i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
    for (int i = 0; i < 2; ++i)
      z5[i] = std::isinf(z[i]) ? z[i] : z[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = rhs(z5);
    if (err)
      for (int i = 0; i < 2; ++i)
        (*err)[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }

  ModelParams p_;
  IntegratorOptions opt_;
  Coordinates mode_;
  std::array<double, 2> z_, z_prev_, k1_;
  double t_, t_prev_;
  double h_;
  std::size_t steps_ = 0;
  StepStatistics stats_;
};

/// Locates the zero of `g(sub_step(s))` on (0, last_h] given g(prev) and
/// g(current) of opposite sign, by the Illinois variant of regula falsi.
template <class G>
double refine_event(const Dopri5& ig, G&& g, double g0, double g1) {
  double a = 0.0, b = ig.last_h();
  double fa = g0, fb = g1;
  int side = 0;
  double s = b;
  for (int i = 0; i < 60; ++i) {
    s = (a * fb - b * fa) / (fb - fa);
    if (!(s > a && s < b)) s = 0.5 * (a + b);
    const double fs = g(ig.sub_step_raw(s));
    if (fs == 0.0 || b - a < 1e-15 * (1.0 + std::abs(ig.t()))) break;
    if ((fs < 0.0) == (fa < 0.0)) {
      a = s;
      fa = fs;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = s;
      fb = fs;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (std::abs(fs) < 1e-14) break;
  }
  return s;
}

}  // namespace detail

/// Integrates from y0 over [0, t_end], recording every `stride`-th accepted
/// step plus both end points.
inline Trajectory integrate(const ModelParams& p, State y0, double t_end, const IntegratorOptions& opt = {},
                            std::size_t stride = 1) {
  p.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::invalid_input, "t_end must be finite and >= 0");
  detail::Dopri5 ig(p, y0, 0.0, opt);
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(ig.state());
  std::size_t n = 0;
  while (ig.step(t_end)) {
    ++n;
    if ((stride && n % stride == 0) || ig.t() >= t_end) {
      tr.times.push_back(ig.t());
      tr.states.push_back(ig.state());
    }
  }
  tr.stats = ig.stats();
  tr.final_raw = ig.raw();
  return tr;
}

/// Continues from raw integration variables, as produced by a previous run.
inline Trajectory integrate(const ModelParams& p, const RawState& start, double t_end, const IntegratorOptions& opt,
                            std::size_t stride = 1) {
  p.validate();
  IntegratorOptions o = opt;
  o.coordinates = start.coordinates;
  detail::Dopri5 ig(p, start, 0.0, o);
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(ig.state());
  std::size_t n = 0;
  while (ig.step(t_end)) {
    ++n;
    if ((stride && n % stride == 0) || ig.t() >= t_end) {
      tr.times.push_back(ig.t());
      tr.states.push_back(ig.state());
    }
  }
  tr.stats = ig.stats();
  tr.final_raw = ig.raw();
  return tr;
}

// ---------------------------------------------------------------------------
// Limit cycles

enum class CycleType { none, hopf_small, canard_headless, canard_with_head, relaxation };

constexpr std::string_view to_string(CycleType t) noexcept {
  switch (t) {
    case CycleType::none: return "none";
    case CycleType::hopf_small: return "hopf_small";
    case CycleType::canard_headless: return "canard_headless";
    case CycleType::canard_with_head: return "canard_with_head";
    case CycleType::relaxation: return "relaxation";
  }
  return "unknown";
}

struct CycleOptions {
  double transient = -1.0;  ///< < 0 selects max(200, 20 / eps)
  double max_time = -1.0;   ///< < 0 selects transient + 2000 + 200 / eps
  double match_rtol = 1e-6;
  double record_h_max = 0.25;
  IntegratorOptions integrator{};
};

struct CycleSummary {
  CycleType type = CycleType::none;
  double period = 0.0;
  double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
  double log_u_min = 0.0;  ///< ln of u_min, finite even when u_min underflows
  int returns = 0;         ///< upward section crossings observed
  double residual = 0.0;   ///< relative v mismatch of the last two crossings
  double tracking_extent = 0.0;  ///< u-extent followed along the repelling branch
  std::optional<CycleType> alternate;  ///< second label when the classification is ambiguous
  std::vector<std::string> warnings;
  std::vector<double> orbit_t;   ///< one period, recorded after convergence
  std::vector<State> orbit;
  RawState final_raw;            ///< where integration stopped, for continuation
  State final_state;
};

struct ClassifierOptions {
  double tube_radius = 0.02;
  double tracking_extent = 0.1;
  double small_amplitude = 0.1;
  double axis_u = 0.05;
  double axis_v_span = 0.1;
  double fold_window = 0.01;
  double ambiguity_band = 0.1;  ///< relative band around the thresholds
};

namespace detail {

/// Longest u-extent below the fold that a contiguous piece of the orbit
/// spends within `tube` of q0, counting only pieces that pass through the
/// fold neighbourhood.
inline double repelling_tracking_extent(const ModelParams& p, const std::vector<State>& orbit,
                                        const ClassifierOptions& o) {
  const auto fold = kinetics::fold_point(p);
  const std::size_t n = orbit.size();
  if (n < 2) return 0.0;
  auto in_tube = [&](std::size_t i) {
    const State& s = orbit[i % n];
    return std::abs(s.v - kinetics::critical_manifold_q0(p, s.u)) < o.tube_radius;
  };
  auto near_fold = [&](std::size_t i) { return std::abs(orbit[i % n].u - fold.fold_u) < o.fold_window; };
  double best = 0.0;
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] || !in_tube(i) || !near_fold(i)) continue;
    std::size_t lo = i, hi = i, steps = 0;
    while (steps < n && in_tube(lo + n - 1)) {
      lo = (lo + n - 1) % n;
      ++steps;
    }
    while (steps < n && in_tube(hi + 1)) {
      hi = (hi + 1) % n;
      ++steps;
    }
    double u_low = orbit[i].u;
    for (std::size_t k = lo;; k = (k + 1) % n) {
      seen[k] = 1;
      u_low = std::min(u_low, orbit[k].u);
      if (k == hi) break;
    }
    best = std::max(best, fold.fold_u - u_low);
  }
  return best;
}

}  // namespace detail

/// Labels a converged cycle from its recorded period. With-head takes
/// precedence over relaxation when a cycle both tracks the repelling branch
/// and visits the v-axis.
inline CycleType classify_cycle(CycleSummary& c, const ModelParams& p, const ClassifierOptions& o = {}) {
  if (c.period <= 0.0 || c.orbit.empty()) return CycleType::none;
  const double amp = std::max(c.u_max - c.u_min, c.v_max - c.v_min);
  if (amp < o.small_amplitude) {
    c.type = CycleType::hopf_small;
    if (amp > (1.0 - o.ambiguity_band) * o.small_amplitude) {
      c.alternate = CycleType::canard_headless;
      c.warnings.push_back("classification-ambiguous: hopf_small/canard_headless (amplitude near threshold)");
    }
    return c.type;
  }

  c.tracking_extent = detail::repelling_tracking_extent(p, c.orbit, o);
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = -v_lo;
  for (const State& s : c.orbit)
    if (s.u < o.axis_u) {
      v_lo = std::min(v_lo, s.v);
      v_hi = std::max(v_hi, s.v);
    }
  const bool visits_axis = c.u_min < o.axis_u && v_hi - v_lo >= o.axis_v_span;

  const double lo_band = (1.0 - o.ambiguity_band) * o.tracking_extent;
  const double hi_band = (1.0 + o.ambiguity_band) * o.tracking_extent;
  if (visits_axis) {
    c.type = c.tracking_extent >= o.tracking_extent ? CycleType::canard_with_head : CycleType::relaxation;
    if (c.tracking_extent > lo_band && c.tracking_extent < hi_band) {
      c.alternate = c.type == CycleType::relaxation ? CycleType::canard_with_head : CycleType::relaxation;
      c.warnings.push_back("classification-ambiguous: canard_with_head/relaxation (tracking extent near threshold)");
    }
  } else {
    c.type = CycleType::canard_headless;
    if (amp < (1.0 + o.ambiguity_band) * o.small_amplitude) {
      c.alternate = CycleType::hopf_small;
      c.warnings.push_back("classification-ambiguous: canard_headless/hopf_small (amplitude near threshold)");
    }
  }
  return c.type;
}

/// Runs past the transient and watches upward crossings of the section
/// u = u*. The cycle is accepted once two successive crossings agree in v to
/// `match_rtol`; a crossing sequence that extrapolates onto E* is reported as
/// type none.
inline CycleSummary detect_limit_cycle(const ModelParams& p, const RawState& start, const CycleOptions& opt = {},
                                       const ClassifierOptions& cls = {}) {
  p.validate();
  return [&] {
    CycleSummary out;
    const double eps = p.epsilon;
    const double transient = opt.transient >= 0.0 ? opt.transient : std::max(200.0, 20.0 / eps);
    const double max_time = opt.max_time >= 0.0 ? opt.max_time : transient + 2000.0 + 200.0 / eps;

    IntegratorOptions iopt = opt.integrator;
    iopt.coordinates = start.coordinates;
    detail::Dopri5 ig(p, start, 0.0, iopt);
    while (ig.step(transient)) {
    }
    auto finish_none = [&] {
      out.type = CycleType::none;
      if (ig.t() >= max_time) out.warnings.push_back("no periodic return within max_time");
      out.final_raw = ig.raw();
      out.final_state = ig.state();
      out.u_min = out.u_max = out.final_state.u;
      out.v_min = out.v_max = out.final_state.v;
      out.log_u_min = detail::to_log(out.u_min);
      return out;
    };
    if (!kinetics::coexistence_feasible(p)) {
      while (ig.step(max_time)) {
      }
      return finish_none();
    }
    const auto [us, vs] = kinetics::coexistence_point(p);
    const bool log_mode = start.coordinates == Coordinates::log;
    const double section = log_mode ? std::log(us) : us;
    auto g = [&](const std::array<double, 2>& z) { return z[0] - section; };
    auto at_equilibrium = [&](State s) {
      return std::abs(s.u - us) < 1e-9 * (1.0 + us) && std::abs(s.v - vs) < 1e-9 * (1.0 + vs);
    };

    std::vector<double> cross_t, cross_v;
    bool converged = false;
    while (!converged) {
      const double g0 = g(ig.z());
      if (!ig.step(max_time)) break;
      const double g1 = g(ig.z());
      if (at_equilibrium(ig.state())) return finish_none();
      if (!(g0 < 0.0 && g1 >= 0.0)) continue;
      const double s = detail::refine_event(ig, g, g0, g1);
      cross_t.push_back(ig.t_prev() + s);
      cross_v.push_back(ig.sub_step(s).v);
      const std::size_t k = cross_v.size();
      out.returns = static_cast<int>(k);
      if (k < 2) continue;
      const double dv = cross_v[k - 1] - cross_v[k - 2];
      out.residual = std::abs(dv) / std::abs(cross_v[k - 1]);
      if (out.residual <= opt.match_rtol) {
        if (std::abs(cross_v[k - 1] - vs) <= 1e-5 * vs) return finish_none();
        converged = true;
        break;
      }
      if (k >= 3) {
        const double d1 = cross_v[k - 2] - cross_v[k - 3];
        const double d2 = dv - d1;
        if (d2 != 0.0 && std::abs(dv) < std::abs(d1)) {
          const double limit = cross_v[k - 1] - dv * dv / d2;
          if (std::abs(limit - vs) <= 1e-5 * vs && std::abs(cross_v[k - 1] - vs) <= 1e-2 * vs) return finish_none();
        }
      }
    }
    if (!converged) return finish_none();

    // Record one more period densely and refine extrema on the way.
    const double prev_period = cross_t.back() - cross_t[cross_t.size() - 2];
    ig.set_h_max(std::min(opt.record_h_max, prev_period / 2000.0));
    const double t_cross = cross_t.back();
    double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
    double lu_min = u_min;
    double v_min = u_min, v_max = -u_min;
    out.orbit_t.push_back(0.0);
    out.orbit.push_back(ig.sub_step(t_cross - ig.t_prev()));
    auto fast_rate = [&](const std::array<double, 2>& z) { return ig.rhs(z)[0]; };
    auto consider = [&](const std::array<double, 2>& z) {
      const State s = ig.decode(z);
      u_min = std::min(u_min, s.u);
      u_max = std::max(u_max, s.u);
      lu_min = std::min(lu_min, log_mode ? z[0] : detail::to_log(z[0]));
      v_min = std::min(v_min, s.v);
      v_max = std::max(v_max, s.v);
    };
    consider(ig.z());
    double t_next = 0.0;
    for (;;) {
      const auto z0 = ig.z();
      const double g0 = g(z0), r0 = fast_rate(z0);
      if (!ig.step(std::numeric_limits<double>::max())) break;
      if (ig.t() - t_cross > 50.0 * prev_period + max_time)
        throw Error(ErrorKind::internal_consistency, "cycle did not close after convergence");
      const auto& z1 = ig.z();
      const double g1 = g(z1), r1 = fast_rate(z1);
      consider(z1);
      if ((r0 > 0.0) != (r1 > 0.0)) consider(ig.sub_step_raw(detail::refine_event(ig, fast_rate, r0, r1)));
      if ((g0 > 0.0) != (g1 > 0.0) && g0 != 0.0) consider(ig.sub_step_raw(detail::refine_event(ig, g, g0, g1)));
      if (g0 < 0.0 && g1 >= 0.0 && ig.t() - t_cross > 0.5 * prev_period) {
        const double s = detail::refine_event(ig, g, g0, g1);
        t_next = ig.t_prev() + s;
        out.orbit_t.push_back(t_next - t_cross);
        out.orbit.push_back(ig.sub_step(s));
        break;
      }
      out.orbit_t.push_back(ig.t() - t_cross);
      out.orbit.push_back(ig.state());
    }
    out.period = 0.5 * (t_next - cross_t[cross_t.size() - 2]);
    out.u_min = u_min;
    out.u_max = u_max;
    out.log_u_min = lu_min;
    out.v_min = v_min;
    out.v_max = v_max;
    out.final_raw = ig.raw();
    out.final_state = ig.state();
    classify_cycle(out, p, cls);
    return out;
  }();
}

inline CycleSummary detect_limit_cycle(const ModelParams& p, State y0, const CycleOptions& opt = {},
                                       const ClassifierOptions& cls = {}) {
  return detect_limit_cycle(p, detail::Dopri5::encode(y0, opt.integrator.coordinates), opt, cls);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double delta = 0.0;
  double epsilon = 0.0;
  CycleType type = CycleType::none;
  double period = 0.0;
  double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
  std::string error;  ///< empty unless the point failed
};

struct SweepOptions {
  bool continuation = true;
  unsigned threads = 1;  ///< used only without continuation
  std::optional<State> seed;
  CycleOptions cycle{};
  ClassifierOptions classifier{};
};

inline SweepRow sweep_point(const ModelParams& p, const std::optional<RawState>& seed, State default_seed,
                            const SweepOptions& opt, RawState* final_raw) {
  SweepRow row;
  row.delta = p.delta;
  row.epsilon = p.epsilon;
  try {
    const CycleSummary c = seed ? detect_limit_cycle(p, *seed, opt.cycle, opt.classifier)
                                : detect_limit_cycle(p, default_seed, opt.cycle, opt.classifier);
    row.type = c.type;
    row.period = c.period;
    row.u_min = c.u_min;
    row.u_max = c.u_max;
    row.v_min = c.v_min;
    row.v_max = c.v_max;
    if (final_raw) *final_raw = c.final_raw;
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

/// Default starting point: slightly off E* when it exists, else inside the
/// unit square.
inline State default_seed(const ModelParams& p) {
  if (kinetics::coexistence_feasible(p)) {
    const auto [us, vs] = kinetics::coexistence_point(p);
    return {us + 0.01, vs};
  }
  return {0.5, 0.5};
}

/// Runs detect_limit_cycle on n evenly spaced deltas from `delta_from` to
/// `delta_to` (in that order, so continuation follows the given direction).
inline std::vector<SweepRow> bifurcation_sweep(const ModelParams& base, double delta_from, double delta_to, int n,
                                               double epsilon, const SweepOptions& opt = {}) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "sweep needs at least two points");
  if (!(delta_from > 0.0 && delta_to > 0.0) || delta_from == delta_to)
    throw Error(ErrorKind::invalid_input, "delta range must be a non-empty positive interval");
  ModelParams pe = base.with_epsilon(epsilon);
  pe.validate();
  std::vector<double> deltas(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) deltas[i] = delta_from + (delta_to - delta_from) * i / (n - 1);
  std::vector<SweepRow> rows(deltas.size());

  if (opt.continuation) {
    std::optional<RawState> carry;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const ModelParams p = pe.with_delta(deltas[i]);
      const State seed0 = opt.seed.value_or(default_seed(p));
      RawState next{};
      rows[i] = sweep_point(p, carry, seed0, opt, &next);
      if (rows[i].error.empty())
        carry = next;
      else
        carry.reset();
    }
    return rows;
  }

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(deltas.size())));
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < deltas.size(); i += stride) {
      const ModelParams p = pe.with_delta(deltas[i]);
      rows[i] = sweep_point(p, std::nullopt, opt.seed.value_or(default_seed(p)), opt, nullptr);
    }
  };
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Canard explosion

struct ExplosionWindow {
  double delta_lo = 0.0;  ///< largest delta found with amplitude > upper threshold
  double delta_hi = 0.0;  ///< smallest delta found with amplitude < lower threshold
  double width() const noexcept { return delta_hi - delta_lo; }
  int evaluations = 0;
};

struct ExplosionOptions {
  double low_amplitude = 0.3;
  double high_amplitude = 0.8;
  double first_offset = 1e-5;  ///< initial distance below delta_H, doubled per probe
  double max_width = 0.02;
  double x_tol = 1e-15;
  int max_bisections = 60;
  CycleOptions cycle{};
};

/// u_max - u_min of the attractor reached from just off E*; zero when the
/// orbit settles on an equilibrium.
inline double cycle_amplitude(const ModelParams& p, const CycleOptions& opt = {}) {
  const CycleSummary c = detect_limit_cycle(p, default_seed(p), opt);
  return c.type == CycleType::none ? 0.0 : c.u_max - c.u_min;
}

/// Brackets the amplitude jump below delta_H: probes delta_H - first_offset *
/// 2^k until the amplitude exceeds `high_amplitude`, then bisects once for
/// each threshold.
inline ExplosionWindow locate_explosion_window(const ModelParams& base, double epsilon,
                                               const ExplosionOptions& opt = {}) {
  ModelParams pe = base.with_epsilon(epsilon);
  pe.validate();
  const auto th = kinetics::stability_thresholds(pe);
  ExplosionWindow w;
  auto amp = [&](double delta) {
    ++w.evaluations;
    return cycle_amplitude(pe.with_delta(delta), opt.cycle);
  };

  double above_small = th.delta_H;  // latest probe with amplitude < low
  double above_large = th.delta_H;  // latest probe with amplitude <= high
  double found_large = -1.0;
  double found_small_gap = -1.0;    // first probe with amplitude >= low
  for (double off = opt.first_offset; th.delta_H - off > 1e-3; off *= 2.0) {
    const double d = th.delta_H - off;
    const double a = amp(d);
    if (a < opt.low_amplitude) above_small = d;
    if (a >= opt.low_amplitude && found_small_gap < 0.0) found_small_gap = d;
    if (a > opt.high_amplitude) {
      found_large = d;
      break;
    }
    above_large = d;
  }
  if (found_large < 0.0)
    throw Error(ErrorKind::explosion_not_detected, "amplitude never exceeded the upper threshold below delta_H");
  if (th.delta_H - found_large > 0.0 && above_large - found_large > opt.max_width) {
    std::ostringstream os;
    os << "amplitude rose gradually between delta = " << found_large << " and " << above_large;
    throw Error(ErrorKind::explosion_not_detected, os.str());
  }
  if (found_small_gap < 0.0) found_small_gap = found_large;

  auto [lo1, hi1] =
      slowfast::detail::bisect([&](double d) { return amp(d) < opt.low_amplitude ? 1.0 : -1.0; }, found_small_gap,
                               above_small, opt.x_tol, opt.max_bisections);
  auto [lo2, hi2] =
      slowfast::detail::bisect([&](double d) { return amp(d) > opt.high_amplitude ? -1.0 : 1.0; }, found_large,
                               above_large, opt.x_tol, opt.max_bisections);
  (void)lo1;
  (void)hi2;
  w.delta_hi = hi1;
  w.delta_lo = lo2;
  if (w.width() > opt.max_width) {
    std::ostringstream os;
    os << "amplitude jump spans " << w.width() << " in delta, wider than " << opt.max_width;
    throw Error(ErrorKind::explosion_not_detected, os.str());
  }
  return w;
}

// ---------------------------------------------------------------------------
// Singular relaxation orbit

/// The eps -> 0 limit of the relaxation cycle: the attracting branch of q0
/// up to the fold, the fast jump to the v-axis, the v-axis down to the
/// entry-exit point v0, and the fast jump back to the attracting branch.
struct SingularOrbit {
  std::vector<State> points;
  double v1 = 0.0;      ///< fold level, where the orbit reaches the v-axis
  double v0 = 0.0;      ///< exit level on the v-axis
  double u_land = 0.0;  ///< landing point on the attracting branch
};

inline SingularOrbit singular_relaxation_orbit(const ModelParams& p, std::size_t samples_per_segment = 400) {
  const auto fold = kinetics::fold_point(p);
  SingularOrbit o;
  o.v1 = fold.fold_v;
  o.v0 = gspt::entry_exit_point(p, o.v1).v0;
  if (o.v0 <= 0.0 || o.v0 >= fold.fold_v) throw Error(ErrorKind::not_applicable, "exit level outside the branch");
  auto [lo, hi] = slowfast::detail::bisect(
      [&](double u) { return kinetics::critical_manifold_q0(p, u) - o.v0; }, fold.fold_u, 1.0, 1e-15);
  o.u_land = 0.5 * (lo + hi);
  const std::size_t n = std::max<std::size_t>(samples_per_segment, 2);
  auto lerp = [&](double a, double b, std::size_t i) { return a + (b - a) * static_cast<double>(i) / (n - 1); };
  for (std::size_t i = 0; i < n; ++i) {
    const double u = lerp(o.u_land, fold.fold_u, i);
    o.points.push_back({u, kinetics::critical_manifold_q0(p, u)});
  }
  for (std::size_t i = 1; i < n; ++i) o.points.push_back({lerp(fold.fold_u, 0.0, i), o.v1});
  for (std::size_t i = 1; i < n; ++i) o.points.push_back({0.0, lerp(o.v1, o.v0, i)});
  for (std::size_t i = 1; i < n; ++i) o.points.push_back({lerp(0.0, o.u_land, i), o.v0});
  return o;
}

namespace detail {

inline double point_segment_distance(State p, State a, State b) noexcept {
  const double dx = b.u - a.u, dy = b.v - a.v;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.u - a.u) * dx + (p.v - a.v) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.u - (a.u + t * dx), p.v - (a.v + t * dy));
}

inline double one_sided_gap(const std::vector<State>& from, const std::vector<State>& to_closed) {
  double worst = 0.0;
  const std::size_t m = to_closed.size();
  for (const State& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) best = std::min(best, point_segment_distance(p, to_closed[j], to_closed[(j + 1) % m]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

/// Symmetric Hausdorff distance between two closed polylines in the (u, v)
/// plane.
inline double orbit_gap(const std::vector<State>& a, const std::vector<State>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::invalid_input, "orbit_gap needs two non-empty orbits");
  return std::max(detail::one_sided_gap(a, b), detail::one_sided_gap(b, a));
}

}  // namespace slowfast::ode
