#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "slowfast/config.hpp"
#include "slowfast/error.hpp"
#include "slowfast/gspt.hpp"
#include "slowfast/io.hpp"
#include "slowfast/kinetics.hpp"
#include "slowfast/ode.hpp"
#include "slowfast/params.hpp"
#include "slowfast/pde.hpp"

// Command implementations behind the `slowfast` executable.
namespace slowfast::app {

namespace fs = std::filesystem;
using config::Config;
using config::Type;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// A run rejected by the explicit scheme's stability limits; exits 3.
class StabilityLimit : public Error {
 public:
  explicit StabilityLimit(const Error& e) : Error(e) {}
};

inline config::Schema schema() {
  using K = config::KeySpec;
  return {
      {"",
       {K{"command", Type::choice, "analyze", {"analyze", "sweep", "simulate", "entry-exit"}},
        K{"preset", Type::text, "none", {}}}},
      {"model",
       {K{"alpha", Type::real, "0.5", {}}, K{"beta", Type::real, "0.22", {}}, K{"gamma", Type::real, "3", {}},
        K{"delta", Type::real, "0.3", {}}, K{"epsilon", Type::real, "1", {}}, K{"d", Type::real, "1", {}}}},
      {"integrator",
       {K{"tol", Type::real, "1e-10", {}}, K{"coordinates", Type::choice, "log", {"log", "cartesian"}},
        K{"h_max", Type::real_or_auto, "auto", {}}}},
      {"cycle",
       {K{"transient", Type::real_or_auto, "auto", {}}, K{"max_time", Type::real_or_auto, "auto", {}},
        K{"match_rtol", Type::real, "1e-6", {}}}},
      {"analyze", {K{"locate_onset", Type::boolean, "true", {}}}},
      {"sweep",
       {K{"delta_from", Type::real, "0.5", {}}, K{"delta_to", Type::real, "0.2", {}}, K{"n", Type::integer, "31", {}},
        K{"continuation", Type::boolean, "true", {}}, K{"threads", Type::integer, "1", {}},
        K{"explosion", Type::boolean, "false", {}}, K{"max_width", Type::real, "0.02", {}}}},
      {"simulate", {K{"kind", Type::choice, "ode", {"ode", "pde1d", "pde2d"}}}},
      {"ode",
       {K{"u0", Type::real_or_auto, "auto", {}}, K{"v0", Type::real_or_auto, "auto", {}},
        K{"t_end", Type::real, "2000", {}}, K{"deltas", Type::real_list, "none", {}},
        K{"mode", Type::choice, "trajectory", {"trajectory", "cycle"}}, K{"record_stride", Type::integer, "1", {}}}},
      {"grid",
       {K{"nx", Type::integer, "600", {}}, K{"ny", Type::integer, "1", {}}, K{"dx", Type::real, "0.5", {}},
        K{"dt", Type::real, "0.005", {}}, K{"t_end", Type::real, "200", {}},
        K{"snapshot_every", Type::real, "1", {}},
        K{"snapshot_format", Type::choice, "csv", {"csv", "pgm", "none"}}, K{"tiles", Type::integer, "1", {}}}},
      {"initial",
       {K{"type", Type::choice, "step_1d", {"step_1d", "elliptic_2d", "perturbed_2d", "uniform"}},
        K{"u_core", Type::real_or_auto, "auto", {}}, K{"u_far", Type::real, "1", {}}, K{"x_u", Type::real, "3", {}},
        K{"v_core", Type::real_or_auto, "auto", {}}, K{"v_far", Type::real, "0", {}}, K{"x_v", Type::real, "3", {}},
        K{"u0", Type::real, "1", {}}, K{"v0", Type::real, "0.2", {}}, K{"x1", Type::real, "153.5", {}},
        K{"y1", Type::real, "145", {}}, K{"x2", Type::real, "150", {}}, K{"y2", Type::real, "150", {}},
        K{"d11", Type::real, "12.5", {}}, K{"d12", Type::real, "12.5", {}}, K{"d21", Type::real, "5", {}},
        K{"d22", Type::real, "10", {}}, K{"e1", Type::real, "2e-7", {}}, K{"e2", Type::real, "3e-5", {}},
        K{"e3", Type::real, "2e-4", {}}}},
      {"front",
       {K{"enabled", Type::boolean, "true", {}}, K{"species", Type::choice, "v", {"u", "v"}},
        K{"level", Type::real_or_auto, "auto", {}}}},
      {"divergence",
       {K{"enabled", Type::boolean, "false", {}}, K{"perturbation", Type::real, "1e-8", {}}}},
      {"entry_exit", {K{"v1", Type::real_or_auto, "auto", {}}, K{"deltas", Type::real_list, "none", {}}}},
  };
}

/// Upper bound on worker threads from SLOWFAST_THREADS; 0 when unset.
inline unsigned thread_cap() {
  const char* s = std::getenv("SLOWFAST_THREADS");
  if (!s || !*s) return 0;
  const auto v = config::parse_integer(s);
  if (!v || *v < 1) throw Error(ErrorKind::configuration, "SLOWFAST_THREADS must be a positive integer");
  return static_cast<unsigned>(*v);
}

inline unsigned capped(long long requested) {
  const unsigned req = static_cast<unsigned>(std::max<long long>(1, requested));
  const unsigned cap = thread_cap();
  return cap ? std::min(req, cap) : req;
}

inline ModelParams model_from(const Config& c) {
  ModelParams p;
  p.alpha = c.real("model", "alpha");
  p.beta = c.real("model", "beta");
  p.gamma = c.real("model", "gamma");
  p.delta = c.real("model", "delta");
  p.epsilon = c.real("model", "epsilon");
  p.d = c.real("model", "d");
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::configuration, c.origin() + ": [model] " + e.what());
  }
  return p;
}

inline ode::IntegratorOptions integrator_from(const Config& c) {
  ode::IntegratorOptions o;
  o.tol = c.real("integrator", "tol");
  if (!(o.tol > 0.0)) c.reject("integrator", "tol", "must be positive");
  o.coordinates = c.text("integrator", "coordinates") == "log" ? ode::Coordinates::log : ode::Coordinates::cartesian;
  if (auto h = c.real_or_auto("integrator", "h_max")) {
    if (!(*h > 0.0)) c.reject("integrator", "h_max", "must be positive");
    o.h_max = *h;
  }
  return o;
}

inline ode::CycleOptions cycle_from(const Config& c) {
  ode::CycleOptions o;
  o.integrator = integrator_from(c);
  if (auto t = c.real_or_auto("cycle", "transient")) o.transient = *t;
  if (auto t = c.real_or_auto("cycle", "max_time")) o.max_time = *t;
  o.match_rtol = c.real("cycle", "match_rtol");
  return o;
}

struct Outputs {
  fs::path dir;
  std::vector<std::string> written;

  void write(const std::string& name, const std::string& content) {
    io::write_atomic(dir / name, content);
    written.push_back(name);
  }
};

// ---------------------------------------------------------------------------
// analyze

inline std::string complex_text(std::complex<double> z) {
  return io::num(z.real()) + (z.imag() < 0 ? "-" : "+") + io::num(std::abs(z.imag())) + "i";
}

inline void cmd_analyze(const Config& c, Outputs& out) {
  const ModelParams p = model_from(c);
  io::CsvBuilder csv({"quantity", "value"});
  auto put = [&](const std::string& k, const std::string& v) { csv.row_strings({k, v}); };
  auto putn = [&](const std::string& k, double v) { put(k, io::num(v)); };

  put("allee_regime", std::string(to_string(p.allee_regime())));
  const auto eqs = kinetics::equilibria(p);
  const char* names[] = {"E0", "E1", "E*"};
  for (const auto& e : eqs) {
    const std::string n = names[static_cast<int>(e.kind)];
    putn(n + ".u", e.u);
    putn(n + ".v", e.v);
    put(n + ".stability", std::string(to_string(e.stability)));
    put(n + ".eigenvalue1", complex_text(e.eigenvalues[0]));
    put(n + ".eigenvalue2", complex_text(e.eigenvalues[1]));
  }
  if (!kinetics::coexistence_feasible(p)) put("E*.status", "no coexistence equilibrium");

  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.numerical()) throw;
      put(key, std::string(to_string(e.kind())));
    }
  };
  guarded("thresholds", [&] {
    const auto th = kinetics::stability_thresholds(p);
    putn("delta_T", th.delta_T);
    putn("delta_H", th.delta_H);
  });
  guarded("fold", [&] {
    const auto g = kinetics::fold_point(p);
    putn("fold_u", g.fold_u);
    putn("fold_v", g.fold_v);
    putn("transcritical_v", g.transcritical_v);
  });
  guarded("regime", [&] {
    std::optional<double> onset;
    if (c.boolean("analyze", "locate_onset")) {
      try {
        ode::ExplosionOptions eo;
        eo.cycle = cycle_from(c);
        onset = ode::locate_explosion_window(p, p.epsilon, eo).delta_lo;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::explosion_not_detected) throw;
        put("relaxation_onset", "explosion-not-detected");
      }
    }
    const auto label = gspt::classify_regime(p, p.epsilon, onset);
    putn("delta_H_eps", label.delta_H);
    putn("delta_c_eps", label.delta_c);
    if (onset) putn("delta_ro", *onset);
    put("regime", std::string(gspt::to_string(label.regime)));
    put("regime_description", std::string(gspt::describe(label.regime)));
  });
  guarded("relaxation_feasible", [&] { put("relaxation_feasible", gspt::relaxation_feasible(p) ? "true" : "false"); });
  guarded("c_min", [&] {
    const double cm = pde::tw_min_speed(p);
    putn("c_min", cm);
    const auto tw = pde::tw_eigen_analysis(p, cm);
    for (int i = 0; i < 4; ++i) put("tw.Q1.eigenvalue" + std::to_string(i + 1), complex_text(tw.q1_eigenvalues[i]));
    if (tw.qstar_eigenvalues)
      for (int i = 0; i < 4; ++i)
        put("tw.Qstar.eigenvalue" + std::to_string(i + 1), complex_text((*tw.qstar_eigenvalues)[i]));
    if (tw.wave_type) put("tw.wave_type", std::string(pde::to_string(*tw.wave_type)));
  });
  out.write("report.csv", csv.str());
}

// ---------------------------------------------------------------------------
// sweep

inline void cmd_sweep(const Config& c, Outputs& out) {
  const ModelParams p = model_from(c);
  const double from = c.real("sweep", "delta_from"), to = c.real("sweep", "delta_to");
  const long long n = c.integer("sweep", "n");
  if (n < 2) c.reject("sweep", "n", "must be at least 2");
  if (from == to) c.reject("sweep", "delta_to", "gives an empty delta range");
  if (!(from > 0.0) || !(to > 0.0)) c.reject("sweep", "delta_from", "and delta_to must be positive");
  ode::SweepOptions so;
  so.continuation = c.boolean("sweep", "continuation");
  so.threads = capped(c.integer("sweep", "threads"));
  so.cycle = cycle_from(c);
  const auto rows = ode::bifurcation_sweep(p, from, to, static_cast<int>(n), p.epsilon, so);
  io::CsvBuilder csv({"delta", "epsilon", "type", "period", "u_min", "u_max", "v_min", "v_max"});
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      const std::string kind = r.error.substr(0, r.error.find(':'));
      csv.row_strings({io::num(r.delta), io::num(r.epsilon), "failed:" + kind, "nan", "nan", "nan", "nan", "nan"});
      continue;
    }
    csv.row_strings({io::num(r.delta), io::num(r.epsilon), std::string(ode::to_string(r.type)), io::num(r.period),
                     io::num(r.u_min), io::num(r.u_max), io::num(r.v_min), io::num(r.v_max)});
  }
  out.write("sweep.csv", csv.str());

  if (c.boolean("sweep", "explosion")) {
    io::CsvBuilder w({"epsilon", "delta_lo", "delta_hi", "width", "status"});
    ode::ExplosionOptions eo;
    eo.cycle = so.cycle;
    eo.max_width = c.real("sweep", "max_width");
    try {
      const auto win = ode::locate_explosion_window(p, p.epsilon, eo);
      w.row_strings({io::num(p.epsilon), io::num(win.delta_lo), io::num(win.delta_hi), io::num(win.width()), "ok"});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::explosion_not_detected) throw;
      w.row_strings({io::num(p.epsilon), "nan", "nan", "nan", "explosion-not-detected"});
    }
    out.write("window.csv", w.str());
  }
}

// ---------------------------------------------------------------------------
// simulate

inline void simulate_ode(const Config& c, const ModelParams& p, Outputs& out) {
  std::vector<double> deltas = c.reals("ode", "deltas");
  if (deltas.empty()) deltas.push_back(p.delta);
  const double t_end = c.real("ode", "t_end");
  if (!(t_end > 0.0)) c.reject("ode", "t_end", "must be positive");
  const long long stride = c.integer("ode", "record_stride");
  if (stride < 1) c.reject("ode", "record_stride", "must be at least 1");
  const bool cycle_mode = c.text("ode", "mode") == "cycle";
  const auto copt = cycle_from(c);

  io::CsvBuilder summary({"delta", "epsilon", "type", "period", "u_min", "u_max", "v_min", "v_max"});
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    ModelParams q = p.with_delta(deltas[k]);
    try {
      q.validate();
    } catch (const Error& e) {
      c.reject("ode", "deltas", std::string("contains an invalid value: ") + e.what());
    }
    ode::State y0 = ode::default_seed(q);
    if (auto u = c.real_or_auto("ode", "u0")) y0.u = *u;
    if (auto v = c.real_or_auto("ode", "v0")) y0.v = *v;
    if (!(y0.u >= 0.0 && y0.v >= 0.0)) c.reject("ode", "u0", "and v0 must be non-negative");
    io::CsvBuilder csv({"t", "u", "v"});
    if (cycle_mode) {
      const auto cs = ode::detect_limit_cycle(q, y0, copt);
      for (std::size_t i = 0; i < cs.orbit.size(); ++i) csv.row({cs.orbit_t[i], cs.orbit[i].u, cs.orbit[i].v});
      summary.row_strings({io::num(q.delta), io::num(q.epsilon), std::string(ode::to_string(cs.type)),
                           io::num(cs.period), io::num(cs.u_min), io::num(cs.u_max), io::num(cs.v_min),
                           io::num(cs.v_max)});
      out.write("cycle_" + std::to_string(k) + ".csv", csv.str());
    } else {
      const auto tr = ode::integrate(q, y0, t_end, copt.integrator, static_cast<std::size_t>(stride));
      for (std::size_t i = 0; i < tr.times.size(); ++i) csv.row({tr.times[i], tr.states[i].u, tr.states[i].v});
      out.write("trajectory_" + std::to_string(k) + ".csv", csv.str());
    }
  }
  if (cycle_mode) out.write("cycles.csv", summary.str());
}

inline pde::InitialCondition initial_from(const Config& c, const ModelParams& p, int dims) {
  const std::string type = c.text("initial", "type");
  if (type == "step_1d" || type == "uniform") {
    pde::Step1D s;
    const bool has_star = kinetics::coexistence_feasible(p);
    const auto star = has_star ? kinetics::coexistence_point(p) : std::array<double, 2>{1.0, 0.0};
    if (!has_star && (!c.was_set("initial", "u_core") || !c.was_set("initial", "v_core")))
      c.reject("initial", "type", "needs explicit u_core and v_core when E* does not exist");
    s.u_core = c.real_or_auto("initial", "u_core").value_or(star[0]);
    s.v_core = c.real_or_auto("initial", "v_core").value_or(star[1]);
    s.u_far = c.real("initial", "u_far");
    s.v_far = c.real("initial", "v_far");
    s.x_u = c.real("initial", "x_u");
    s.x_v = c.real("initial", "x_v");
    if (type == "uniform") {
      s.u_far = s.u_core;
      s.v_far = s.v_core;
    } else if (dims != 1) {
      c.reject("initial", "type", "step_1d needs kind = pde1d");
    }
    return s;
  }
  if (dims != 2) c.reject("initial", "type", type + " needs kind = pde2d");
  if (type == "elliptic_2d") {
    pde::Elliptic2D e;
    e.u0 = c.real("initial", "u0");
    e.v0 = c.real("initial", "v0");
    e.x1 = c.real("initial", "x1");
    e.y1 = c.real("initial", "y1");
    e.x2 = c.real("initial", "x2");
    e.y2 = c.real("initial", "y2");
    e.d11 = c.real("initial", "d11");
    e.d12 = c.real("initial", "d12");
    e.d21 = c.real("initial", "d21");
    e.d22 = c.real("initial", "d22");
    return e;
  }
  pde::Perturbed2D q;
  q.e1 = c.real("initial", "e1");
  q.e2 = c.real("initial", "e2");
  q.e3 = c.real("initial", "e3");
  return q;
}

inline void simulate_pde(const Config& c, const ModelParams& p, int dims, Outputs& out, std::ostream& log) {
  const long long nx = c.integer("grid", "nx"), ny = dims == 1 ? 1 : c.integer("grid", "ny");
  if (nx < 1) c.reject("grid", "nx", "must be at least 1");
  if (ny < 1) c.reject("grid", "ny", "must be at least 1");
  const double dx = c.real("grid", "dx"), dt = c.real("grid", "dt"), t_end = c.real("grid", "t_end");
  if (!(dx > 0.0)) c.reject("grid", "dx", "must be positive");
  if (!(dt > 0.0)) c.reject("grid", "dt", "must be positive");
  if (!(t_end >= 0.0)) c.reject("grid", "t_end", "must be non-negative");
  pde::Grid g{dims, static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), dx};

  const auto spec = initial_from(c, p, dims);
  pde::InitialConditionReport ic;
  if (c.text("initial", "type") == "uniform") {
    const auto& s = std::get<pde::Step1D>(spec);
    if (!(s.u_core >= 0.0 && s.v_core >= 0.0)) c.reject("initial", "u_core", "and v_core must be non-negative");
    ic.field = pde::uniform_field(g, s.u_core, s.v_core);
  } else {
    ic = pde::make_initial_condition(spec, g, p);
  }
  for (const auto& w : ic.warnings) log << "warning: " << w << "\n";
  const pde::Field& f0 = ic.field;
  try {
    pde::check_cfl(f0, p, dt);
  } catch (const Error& e) {
    throw StabilityLimit(e);
  }

  pde::SimulationOptions so;
  so.snapshot_every = c.real("grid", "snapshot_every");
  so.step.tiles = capped(c.integer("grid", "tiles"));
  const auto guarded = [&](auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::configuration) throw StabilityLimit(e);
      throw;
    }
  };
  const auto res = guarded([&] { return pde::simulate(f0, p, dt, t_end, so); });
  if (res.clamped) log << "note: clamped " << res.clamped << " negative densities to 0\n";

  io::CsvBuilder means({"t", "mean_u", "mean_v"});
  for (std::size_t i = 0; i < res.means.t.size(); ++i)
    means.row({res.means.t[i], res.means.mean_u[i], res.means.mean_v[i]});
  out.write("means.csv", means.str());

  const std::string fmt = c.text("grid", "snapshot_format");
  if (fmt != "none") {
    io::CsvBuilder index({"index", "t"});
    for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
      const auto& s = res.snapshots[k];
      std::ostringstream stem;
      stem << "snapshots/" << std::setw(5) << std::setfill('0') << k;
      index.row_strings({std::to_string(k), io::num(s.t)});
      for (auto sp : {pde::Species::u, pde::Species::v}) {
        const std::string name = stem.str() + (sp == pde::Species::u ? "_u" : "_v");
        if (fmt == "csv") {
          out.write(name + ".csv", io::field_csv(s, sp));
        } else {
          const auto img = io::field_pgm(s, sp);
          out.write(name + ".pgm", img.bytes);
          out.write(name + ".pgm.txt", img.scaling);
        }
      }
    }
    out.write("snapshots/index.csv", index.str());
  }

  if (dims == 1 && c.boolean("front", "enabled")) {
    const auto species = c.text("front", "species") == "u" ? pde::Species::u : pde::Species::v;
    double level = 0.0;
    if (auto l = c.real_or_auto("front", "level")) {
      level = *l;
    } else {
      if (!kinetics::coexistence_feasible(p)) c.reject("front", "level", "cannot be auto without E*");
      level = 0.5 * kinetics::coexistence_point(p)[species == pde::Species::u ? 0 : 1];
    }
    io::CsvBuilder fcsv({"t", "x_front"});
    try {
      const auto fr = pde::measure_front_speed(res.snapshots, species, level);
      for (std::size_t i = 0; i < fr.t.size(); ++i) fcsv.row({fr.t[i], fr.x_front[i]});
      fcsv.line("# speed=" + io::num(fr.speed) + ", residual=" + io::num(fr.residual));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::front_not_found && e.kind() != ErrorKind::invalid_input) throw;
      fcsv.line(std::string("# ") + e.what());
    }
    out.write("front.csv", fcsv.str());
  }

  if (dims == 2 && c.boolean("divergence", "enabled")) {
    const auto d = guarded(
        [&] { return pde::divergence_diagnostic(f0, p, dt, t_end, c.real("divergence", "perturbation"), so.step); });
    io::CsvBuilder dcsv({"initial_gap", "final_gap", "factor", "label"});
    dcsv.row_strings({io::num(d.initial_gap), io::num(d.final_gap), io::num(d.factor),
                      d.sensitive ? "sensitive" : "non-sensitive"});
    out.write("divergence.csv", dcsv.str());
  }
}

inline void cmd_simulate(const Config& c, Outputs& out, std::ostream& log) {
  const ModelParams p = model_from(c);
  const std::string kind = c.text("simulate", "kind");
  if (kind == "ode")
    simulate_ode(c, p, out);
  else
    simulate_pde(c, p, kind == "pde1d" ? 1 : 2, out, log);
}

// ---------------------------------------------------------------------------
// entry-exit

inline void cmd_entry_exit(const Config& c, Outputs& out) {
  const ModelParams p = model_from(c);
  std::vector<double> deltas{p.delta};
  for (double d : c.reals("entry_exit", "deltas")) deltas.push_back(d);
  io::CsvBuilder csv({"delta", "u_max", "v1", "v0", "residual"});
  for (double d : deltas) {
    const ModelParams q = p.with_delta(d);
    const auto fold = kinetics::fold_point(q);
    const double v1 = c.real_or_auto("entry_exit", "v1").value_or(fold.fold_v);
    const auto s = gspt::entry_exit_point(q, v1);
    csv.row({d, fold.fold_u, s.v1, s.v0, s.residual});
  }
  out.write("entry_exit.csv", csv.str());
}

// ---------------------------------------------------------------------------

/// Runs one command. Errors are reported on `log` and mapped to the exit
/// code contract: 2 for configuration or input problems, 3 for numerical
/// failures.
inline int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
               std::ostream& log) {
  try {
    thread_cap();
    Config c = Config::load(config_path, schema());
    if (c.was_set("", "command") && c.text("", "command") != command)
      c.reject("", "command", "is '" + c.text("", "command") + "' but the command line asks for '" + command + "'");
    c.set("", "command", command);
    Outputs out{fs::path(out_dir), {}};
    if (command == "analyze")
      cmd_analyze(c, out);
    else if (command == "sweep")
      cmd_sweep(c, out);
    else if (command == "simulate")
      cmd_simulate(c, out, log);
    else if (command == "entry-exit")
      cmd_entry_exit(c, out);
    else
      throw Error(ErrorKind::configuration, "unknown command '" + command + "'");
    out.write("manifest.cfg", "# slowfast run manifest; replay with: slowfast " + command +
                                  " --config manifest.cfg\n" + c.resolved());
    for (const auto& w : out.written) log << "wrote " << (out.dir / w).string() << "\n";
    return kExitOk;
  } catch (const StabilityLimit& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.numerical() ? kExitNumerical : kExitConfig;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace slowfast::app
