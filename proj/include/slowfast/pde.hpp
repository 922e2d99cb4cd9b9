#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "slowfast/detail/numerics.hpp"
#include "slowfast/error.hpp"
#include "slowfast/kinetics.hpp"
#include "slowfast/params.hpp"

namespace slowfast::pde {

/// Cell-centred densities on [0, nx dx] (x [0, ny dy] in 2D), row-major with
/// x fastest. No-flux boundaries throughout.
struct Field {
  int dims = 1;
  std::size_t nx = 0;
  std::size_t ny = 1;
  double dx = 1.0;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;

  std::size_t size() const noexcept { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }
  double x(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx; }
  double y(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dx; }
  double length_x() const noexcept { return static_cast<double>(nx) * dx; }
  double length_y() const noexcept { return static_cast<double>(ny) * dx; }

  void validate() const {
    if (dims != 1 && dims != 2) throw Error(ErrorKind::invalid_input, "field dims must be 1 or 2");
    if (nx == 0 || ny == 0) throw Error(ErrorKind::invalid_input, "field must have at least one cell");
    if (dims == 1 && ny != 1) throw Error(ErrorKind::invalid_input, "1D field must have ny = 1");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw Error(ErrorKind::invalid_input, "dx must be positive");
    if (u.size() != size() || v.size() != size()) throw Error(ErrorKind::invalid_input, "array sizes do not match the grid");
    for (std::size_t k = 0; k < size(); ++k)
      if (!std::isfinite(u[k]) || !std::isfinite(v[k]) || u[k] < 0.0 || v[k] < 0.0)
        throw Error(ErrorKind::invalid_input, "field entries must be finite and non-negative");
  }
};

struct Grid {
  int dims = 1;
  std::size_t nx = 600;
  std::size_t ny = 1;
  double dx = 0.5;
};

inline Field uniform_field(const Grid& g, double u0, double v0) {
  Field f;
  f.dims = g.dims;
  f.nx = g.nx;
  f.ny = g.dims == 1 ? 1 : g.ny;
  f.dx = g.dx;
  if (f.nx == 0 || f.ny == 0) throw Error(ErrorKind::invalid_input, "grid must have at least one cell");
  f.u.assign(f.size(), u0);
  f.v.assign(f.size(), v0);
  return f;
}

// ---------------------------------------------------------------------------
// Travelling waves

inline void require_tw_params(const ModelParams& p) {
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0) || !(p.delta > 0.0) || !(p.epsilon >= 0.0) || !(p.epsilon <= 1.0) ||
      !(p.d >= 0.0))
    throw Error(ErrorKind::invalid_input, "invalid travelling-wave parameters");
}

/// Minimal speed of the predator invasion front into the prey-only state.
inline double tw_min_speed(const ModelParams& p) {
  require_tw_params(p);
  if (p.delta * (1.0 + p.alpha) >= 1.0) {
    std::ostringstream os;
    os << "delta (1 + alpha) = " << p.delta * (1.0 + p.alpha) << " >= 1: the predator cannot invade";
    throw Error(ErrorKind::invasion_infeasible, os.str());
  }
  const double c = std::sqrt(4.0 * p.epsilon * p.d * (1.0 - p.delta - p.alpha * p.delta) / (1.0 + p.alpha));
  const double c_v = 2.0 * std::sqrt(p.epsilon * p.d * (1.0 / (p.alpha + 1.0) - p.delta));
  if (std::abs(c - c_v) > 1e-12 * std::max(1.0, c))
    throw Error(ErrorKind::internal_consistency, "the two forms of the minimal speed disagree");
  return c;
}

enum class WaveType { monotone, non_monotone, periodic };

constexpr std::string_view to_string(WaveType w) noexcept {
  switch (w) {
    case WaveType::monotone: return "monotone";
    case WaveType::non_monotone: return "non_monotone";
    case WaveType::periodic: return "periodic";
  }
  return "unknown";
}

using Eigen4 = std::array<std::complex<double>, 4>;

struct TWAnalysis {
  double c = 0.0;
  Eigen4 q1_eigenvalues{};
  std::optional<Eigen4> qstar_eigenvalues;
  std::optional<WaveType> wave_type;
  std::optional<std::complex<double>> dominant;  ///< the pair member that set the wave type (Im >= 0)
};

/// Jacobian of the first-order travelling-wave system in (u, p, v, q) with
/// u' = -p and v' = -q, at a homogeneous state (u, v).
inline Eigen::Matrix4d tw_jacobian(const ModelParams& p, double c, double u, double v) {
  const auto J = kinetics::jacobian(p, u, v);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 1) = -1.0;
  m(1, 0) = J.fu;
  m(1, 1) = -c;
  m(1, 2) = J.fv;
  m(2, 3) = -1.0;
  m(3, 0) = J.gu / p.d;
  m(3, 2) = J.gv / p.d;
  m(3, 3) = -c / p.d;
  return m;
}

inline Eigen4 eigenvalues4(const Eigen::Matrix4d& m) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::internal_consistency, "4x4 eigen solve failed");
  Eigen4 out;
  for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

/// Linearisation at Q1 = (1, 0, 0, 0) and Q* = (u*, 0, v*, 0). The wave type
/// follows the spectrum at Q*: all real gives a monotone profile; otherwise
/// the complex pair whose real part has the sign of the temporal trace at E*
/// selects non-monotone (negative) or periodic (positive).
inline TWAnalysis tw_eigen_analysis(const ModelParams& p, double c) {
  require_tw_params(p);
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorKind::invalid_input, "wave speed must be non-negative");
  if (!(p.d > 0.0)) throw Error(ErrorKind::invalid_input, "travelling-wave analysis needs d > 0");
  TWAnalysis a;
  a.c = c;
  a.q1_eigenvalues = eigenvalues4(tw_jacobian(p, c, 1.0, 0.0));
  if (!kinetics::coexistence_feasible(p)) return a;

  const auto [us, vs] = kinetics::coexistence_point(p);
  const Eigen4 ev = eigenvalues4(tw_jacobian(p, c, us, vs));
  a.qstar_eigenvalues = ev;
  double scale = 1.0;
  for (const auto& z : ev) scale = std::max(scale, std::abs(z));
  const bool all_real = std::all_of(ev.begin(), ev.end(), [&](auto z) { return std::abs(z.imag()) <= 1e-10 * scale; });
  if (all_real) {
    a.wave_type = WaveType::monotone;
    return a;
  }
  const bool stable = kinetics::jacobian(p, us, vs).trace() < 0.0;
  std::optional<std::complex<double>> pick;
  for (const auto& z : ev) {
    if (z.imag() <= 1e-10 * scale) continue;
    if (stable ? z.real() < 0.0 : z.real() > 0.0) {
      if (!pick || (stable ? z.real() > pick->real() : z.real() < pick->real())) pick = z;
    }
  }
  if (!pick)
    for (const auto& z : ev)
      if (z.imag() > 1e-10 * scale) pick = z;
  a.dominant = pick;
  a.wave_type = pick->real() < 0.0 ? WaveType::non_monotone : WaveType::periodic;
  return a;
}

// ---------------------------------------------------------------------------
// Initial conditions

/// Piecewise-constant 1D profile: (u_core, v_core) on x <= x_u resp. x <= x_v,
/// (u_far, v_far) beyond.
struct Step1D {
  double u_core = 1.0, u_far = 0.0, x_u = 3.0;
  double v_core = 0.2, v_far = 0.0, x_v = 2.0;
};

/// Elliptic inoculum: u0 inside (x-x1)^2/D11 + (y-y1)^2/D12 <= 1, v0 inside
/// (x-x2)^2/D21 + (y-y2)^2/D22 <= 1, zero elsewhere.
struct Elliptic2D {
  double u0 = 1.0, v0 = 0.2;
  double x1 = 153.5, y1 = 145.0, x2 = 150.0, y2 = 150.0;
  double d11 = 12.5, d12 = 12.5, d21 = 5.0, d22 = 10.0;
};

/// Small heterogeneous perturbation of (u*, v*); the offsets 225, 675 and 450
/// are scaled by L / 900.
struct Perturbed2D {
  double e1 = 2e-7, e2 = 3e-5, e3 = 2e-4;
};

using InitialCondition = std::variant<Step1D, Elliptic2D, Perturbed2D>;

struct InitialConditionReport {
  Field field;
  std::size_t clamped = 0;
  std::vector<std::string> warnings;
};

/// Step1D needed with both species set explicitly: the first 1D condition
/// puts E* on [0, 3] and E1 beyond.
inline Step1D step_from_equilibrium(const ModelParams& p, double x_split = 3.0) {
  const auto [us, vs] = kinetics::coexistence_point(p);
  return {us, 1.0, x_split, vs, 0.0, x_split};
}

inline InitialConditionReport make_initial_condition(const InitialCondition& ic, const Grid& g,
                                                     const ModelParams& p = {}) {
  InitialConditionReport r;
  Field& f = r.field = uniform_field(g, 0.0, 0.0);
  if (const auto* s = std::get_if<Step1D>(&ic)) {
    if (g.dims != 1) throw Error(ErrorKind::invalid_input, "step_1d needs a 1D grid");
    for (std::size_t i = 0; i < f.nx; ++i) {
      const double x = f.x(i);
      f.u[i] = x <= s->x_u ? s->u_core : s->u_far;
      f.v[i] = x <= s->x_v ? s->v_core : s->v_far;
    }
  } else if (const auto* e = std::get_if<Elliptic2D>(&ic)) {
    if (g.dims != 2) throw Error(ErrorKind::invalid_input, "elliptic_2d needs a 2D grid");
    auto inside = [](double x, double y, double cx, double cy, double a, double b) {
      if (!(a > 0.0) || !(b > 0.0)) return false;
      return (x - cx) * (x - cx) / a + (y - cy) * (y - cy) / b <= 1.0;
    };
    for (std::size_t j = 0; j < f.ny; ++j)
      for (std::size_t i = 0; i < f.nx; ++i) {
        const std::size_t k = f.index(i, j);
        f.u[k] = inside(f.x(i), f.y(j), e->x1, e->y1, e->d11, e->d12) ? e->u0 : 0.0;
        f.v[k] = inside(f.x(i), f.y(j), e->x2, e->y2, e->d21, e->d22) ? e->v0 : 0.0;
      }
  } else {
    const auto& q = std::get<Perturbed2D>(ic);
    if (g.dims != 2) throw Error(ErrorKind::invalid_input, "perturbed_2d needs a 2D grid");
    if (!kinetics::coexistence_feasible(p))
      throw Error(ErrorKind::invalid_input, "perturbed_2d needs a feasible coexistence equilibrium");
    const auto [us, vs] = kinetics::coexistence_point(p);
    const double s = f.length_x() / 900.0;
    for (std::size_t j = 0; j < f.ny; ++j)
      for (std::size_t i = 0; i < f.nx; ++i) {
        const double x = f.x(i), y = f.y(j);
        const std::size_t k = f.index(i, j);
        f.u[k] = us - q.e1 * (x - 0.1 * y - 225.0 * s) * (x - 0.1 * y - 675.0 * s);
        f.v[k] = vs - q.e2 * (x - 450.0 * s) - q.e3 * (y - 450.0 * s);
      }
  }
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (double* c : {&f.u[k], &f.v[k]})
      if (*c < 0.0) {
        *c = 0.0;
        ++r.clamped;
      }
  }
  if (r.clamped) r.warnings.push_back("initial condition produced negative densities; clamped " +
                                      std::to_string(r.clamped) + " entries to 0");
  return r;
}

// ---------------------------------------------------------------------------
// Time stepping

/// Fixed set of worker threads that each own one horizontal band of rows.
/// The work split never changes the arithmetic done per cell.
class TilePool {
 public:
  explicit TilePool(unsigned tiles) : tiles_(std::max(1u, tiles)) {
    for (unsigned w = 1; w < tiles_; ++w)
      workers_.emplace_back([this, w](std::stop_token st) { loop(st, w); });
  }
  ~TilePool() {
    {
      std::lock_guard lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
  }
  TilePool(const TilePool&) = delete;
  TilePool& operator=(const TilePool&) = delete;

  unsigned tiles() const noexcept { return tiles_; }

  void run(const std::function<void(unsigned)>& job) {
    if (tiles_ == 1) {
      job(0);
      return;
    }
    {
      std::lock_guard lk(m_);
      job_ = &job;
      pending_ = tiles_ - 1;
      ++generation_;
    }
    cv_.notify_all();
    job(0);
    std::unique_lock lk(m_);
    done_.wait(lk, [&] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void loop(std::stop_token, unsigned w) {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(unsigned)>* job;
      {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
      }
      (*job)(w);
      {
        std::lock_guard lk(m_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  unsigned tiles_;
  std::mutex m_;
  std::condition_variable cv_, done_;
  const std::function<void(unsigned)>* job_ = nullptr;
  unsigned pending_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::jthread> workers_;
};

struct StepOptions {
  bool reactions = true;  ///< false switches to pure diffusion (test hook)
  unsigned tiles = 1;
};

struct StepReport {
  std::size_t clamped = 0;
  double max_fu = 0.0;  ///< max |df/du| over the pre-step field
};

inline double cfl_limit(const Field& f, const ModelParams& p) {
  return 0.9 * f.dx * f.dx / (2.0 * std::max(1.0, p.d) * f.dims);
}

inline void check_cfl(const Field& f, const ModelParams& p, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::configuration, "dt must be positive");
  const double limit = cfl_limit(f, p);
  if (dt > limit) {
    std::ostringstream os;
    os << "dt = " << dt << " violates the diffusion limit " << limit << " for dx = " << f.dx;
    throw Error(ErrorKind::configuration, os.str());
  }
}

namespace detail {

/// Advances rows [j0, j1) from (u, v) into (un, vn).
inline void update_rows(const Field& f, const ModelParams& p, double dt, bool reactions, std::size_t j0,
                        std::size_t j1, std::vector<double>& un, std::vector<double>& vn, double& max_fu) {
  const std::size_t nx = f.nx, ny = f.ny;
  const double inv_dx2 = 1.0 / (f.dx * f.dx);
  const bool two_d = f.dims == 2;
  const double a = p.alpha, b = p.beta, g = p.gamma, eps = p.epsilon, dl = p.delta, dv = p.d;
  double mfu = max_fu;
  for (std::size_t j = j0; j < j1; ++j) {
    const double* u = f.u.data() + j * nx;
    const double* v = f.v.data() + j * nx;
    const double* us = f.u.data() + (j == 0 ? 0 : j - 1) * nx;
    const double* vs = f.v.data() + (j == 0 ? 0 : j - 1) * nx;
    const double* un_ = f.u.data() + (j + 1 == ny ? j : j + 1) * nx;
    const double* vn_ = f.v.data() + (j + 1 == ny ? j : j + 1) * nx;
    double* uo = un.data() + j * nx;
    double* vo = vn.data() + j * nx;
    auto cell = [&](std::size_t i, std::size_t il, std::size_t ir) {
      const double uk = u[i], vk = v[i];
      double lu = u[il] + u[ir] - 2.0 * uk;
      double lv = v[il] + v[ir] - 2.0 * vk;
      if (two_d) {
        lu += us[i] + un_[i] - 2.0 * uk;
        lv += vs[i] + vn_[i] - 2.0 * vk;
      }
      double ru = 0.0, rv = 0.0;
      if (reactions) {
        // f, eps g and df/du sharing one reciprocal.
        const double s = 1.0 / (1.0 + a * uk);
        ru = uk * (g * (1.0 - uk) * (uk + b) - vk * s);
        rv = eps * vk * (uk * s - dl);
        const double fu = g * (uk * (2.0 - 3.0 * uk - 2.0 * b) + b) - vk * s * s;
        mfu = std::max(mfu, std::abs(fu));
      }
      uo[i] = uk + dt * (ru + lu * inv_dx2);
      vo[i] = vk + dt * (rv + dv * lv * inv_dx2);
    };
    if (nx == 1) {
      cell(0, 0, 0);
      continue;
    }
    cell(0, 0, 1);
    for (std::size_t i = 1; i + 1 < nx; ++i) cell(i, i - 1, i + 1);
    cell(nx - 1, nx - 2, nx - 1);
  }
  max_fu = mfu;
}

}  // namespace detail

/// Stepper that keeps scratch buffers and worker threads across steps.
class Stepper {
 public:
  Stepper(const ModelParams& p, double dt, StepOptions opt = {}) : p_(p), dt_(dt), opt_(opt), pool_(opt.tiles) {}

  unsigned tiles() const noexcept { return pool_.tiles(); }

  /// One forward-Euler step in place; `step_index` is only used in messages.
  StepReport advance(Field& f, std::size_t step_index = 0) {
    check_cfl(f, p_, dt_);
    const std::size_t n = f.size();
    un_.resize(n);
    vn_.resize(n);
    const unsigned tiles = pool_.tiles();
    std::vector<double> max_fu(tiles, 0.0);
    std::vector<std::size_t> clamped(tiles, 0);
    std::vector<char> bad(tiles, 0);
    const std::size_t rows = f.ny;
    pool_.run([&](unsigned w) {
      const std::size_t j0 = rows * w / tiles, j1 = rows * (w + 1) / tiles;
      detail::update_rows(f, p_, dt_, opt_.reactions, j0, j1, un_, vn_, max_fu[w]);
      for (std::size_t k = j0 * f.nx; k < j1 * f.nx; ++k) {
        if (!std::isfinite(un_[k]) || !std::isfinite(vn_[k])) bad[w] = 1;
        if (un_[k] < 0.0) {
          un_[k] = 0.0;
          ++clamped[w];
        }
        if (vn_[k] < 0.0) {
          vn_[k] = 0.0;
          ++clamped[w];
        }
      }
    });
    StepReport r;
    for (unsigned w = 0; w < tiles; ++w) {
      r.max_fu = std::max(r.max_fu, max_fu[w]);
      r.clamped += clamped[w];
      if (bad[w]) {
        std::ostringstream os;
        os << "non-finite density at step " << step_index << " (t = " << f.t << ")";
        throw Error(ErrorKind::blow_up, os.str());
      }
    }
    if (dt_ * r.max_fu >= 0.5) {
      std::ostringstream os;
      os << "dt * max|df/du| = " << dt_ * r.max_fu << " >= 0.5 at step " << step_index << "; reduce dt";
      throw Error(ErrorKind::configuration, os.str());
    }
    f.u.swap(un_);
    f.v.swap(vn_);
    f.t += dt_;
    return r;
  }

 private:
  ModelParams p_;
  double dt_;
  StepOptions opt_;
  TilePool pool_;
  std::vector<double> un_, vn_;
};

/// Single step returning a new field.
inline Field step(const Field& field, const ModelParams& p, double dt, StepOptions opt = {}) {
  Field out = field;
  Stepper(p, dt, opt).advance(out);
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

struct SpatialAverageSeries {
  std::vector<double> t, mean_u, mean_v;
};

struct SimulationOptions {
  double snapshot_every = 0.0;  ///< <= 0 keeps only the first and last field
  StepOptions step{};
};

struct SimulationResult {
  std::vector<Field> snapshots;
  SpatialAverageSeries means;
  Field final_field;
  std::size_t steps = 0;
  std::size_t clamped = 0;
};

inline std::pair<double, double> spatial_means(const Field& f) {
  const double n = static_cast<double>(f.size());
  return {slowfast::detail::pairwise_sum(f.u) / n, slowfast::detail::pairwise_sum(f.v) / n};
}

inline SimulationResult simulate(const Field& field0, const ModelParams& p, double dt, double t_end,
                                 const SimulationOptions& opt = {}) {
  field0.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::invalid_input, "t_end must be finite and >= 0");
  check_cfl(field0, p, dt);
  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const std::size_t every =
      opt.snapshot_every > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.snapshot_every / dt)))
                               : 0;
  SimulationResult r;
  Field f = field0;
  const double t0 = f.t;
  Stepper stepper(p, dt, opt.step);
  auto record_means = [&] {
    const auto [mu, mv] = spatial_means(f);
    r.means.t.push_back(f.t);
    r.means.mean_u.push_back(mu);
    r.means.mean_v.push_back(mv);
  };
  r.snapshots.push_back(f);
  record_means();
  for (std::size_t s = 1; s <= n_steps; ++s) {
    r.clamped += stepper.advance(f, s).clamped;
    f.t = t0 + static_cast<double>(s) * dt;
    record_means();
    if ((every && s % every == 0) || (!every && s == n_steps)) r.snapshots.push_back(f);
  }
  r.steps = n_steps;
  r.final_field = std::move(f);
  return r;
}

// ---------------------------------------------------------------------------
// Fronts

enum class Species { u, v };

struct FrontRecord {
  std::vector<double> t, x_front;
  double speed = 0.0;
  double residual = 0.0;  ///< RMS deviation of the fitted line
  std::size_t fitted = 0;  ///< samples in the fit
};

/// Rightmost x at which `species` falls through `level`, linearly interpolated
/// between cell centres; nullopt if the profile never reaches the level.
inline std::optional<double> front_position(const Field& f, Species species, double level) {
  const auto& a = species == Species::u ? f.u : f.v;
  for (std::size_t i = f.nx; i-- > 0;) {
    if (a[i] >= level) {
      if (i + 1 == f.nx) return f.x(i);
      const double t = (a[i] - level) / (a[i] - a[i + 1]);
      return f.x(i) + t * f.dx;
    }
  }
  return std::nullopt;
}

inline FrontRecord measure_front_speed(const std::vector<Field>& snapshots, Species species, double level) {
  if (snapshots.size() < 5) throw Error(ErrorKind::invalid_input, "front speed needs at least 5 snapshots");
  FrontRecord r;
  for (const Field& f : snapshots) {
    if (f.dims != 1) throw Error(ErrorKind::invalid_input, "front speed is defined for 1D fields");
    if (const auto x = front_position(f, species, level)) {
      r.t.push_back(f.t);
      r.x_front.push_back(*x);
    }
  }
  if (r.t.empty()) throw Error(ErrorKind::front_not_found, "no snapshot crosses the requested level");
  const std::size_t n = r.t.size();
  const std::size_t first = n / 2;
  r.fitted = n - first;
  if (r.fitted < 5) throw Error(ErrorKind::front_not_found, "fewer than 5 front samples in the fitting window");
  double st = 0.0, sx = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    st += r.t[k];
    sx += r.x_front[k];
  }
  const double m = static_cast<double>(r.fitted);
  const double tb = st / m, xb = sx / m;
  double stt = 0.0, stx = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    stt += (r.t[k] - tb) * (r.t[k] - tb);
    stx += (r.t[k] - tb) * (r.x_front[k] - xb);
  }
  r.speed = stt > 0.0 ? stx / stt : 0.0;
  double ss = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    const double e = r.x_front[k] - (xb + r.speed * (r.t[k] - tb));
    ss += e * e;
  }
  r.residual = std::sqrt(ss / m);
  return r;
}

// ---------------------------------------------------------------------------
// Sensitivity to initial conditions

struct DivergenceResult {
  double initial_gap = 0.0;
  double final_gap = 0.0;
  double factor = 0.0;
  bool sensitive = false;
};

inline double l2_gap(const Field& a, const Field& b) {
  std::vector<double> sq(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double du = a.u[k] - b.u[k], dv = a.v[k] - b.v[k];
    sq[k] = du * du + dv * dv;
  }
  return std::sqrt(slowfast::detail::pairwise_sum(sq) * std::pow(a.dx, a.dims));
}

/// Twin runs from field0 and from field0 with `perturbation` added to u in
/// the centre cell; factor > 1e4 marks sensitive dependence.
inline DivergenceResult divergence_diagnostic(const Field& field0, const ModelParams& p, double dt, double t_end,
                                              double perturbation = 1e-8, StepOptions opt = {}) {
  if (field0.dims != 2) throw Error(ErrorKind::invalid_input, "divergence diagnostic expects a 2D field");
  Field twin = field0;
  twin.u[twin.index(twin.nx / 2, twin.ny / 2)] += perturbation;
  DivergenceResult r;
  r.initial_gap = l2_gap(field0, twin);
  SimulationOptions so;
  so.step = opt;
  const auto a = simulate(field0, p, dt, t_end, so);
  const auto b = simulate(twin, p, dt, t_end, so);
  r.final_gap = l2_gap(a.final_field, b.final_field);
  r.factor = r.final_gap / r.initial_gap;
  r.sensitive = r.factor > 1e4;
  return r;
}

}  // namespace slowfast::pde
