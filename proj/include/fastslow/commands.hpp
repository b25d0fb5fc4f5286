#pragma once

// The analyze / simulate / sweep / reproduce commands behind the CLI. Each
// returns a Report; CSV output goes under CommandOptions::out.

#include "fastslow/csv.hpp"
#include "fastslow/parallel.hpp"
#include "fastslow/report.hpp"
#include "fastslow/rho2.hpp"
#include "fastslow/scenario.hpp"
#include "fastslow/simulate.hpp"
#include "fastslow/stability.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fastslow {

/// Built-in benchmark: one slow state, two fast channels. A = 2,
/// B = [1 2], G2 = [-1 0]^T, z0 = 1, y0 = (-cos(5 pi x / 2), 0).
inline constexpr const char* kBenchmarkScenario = R"json({
  "name": "section5",
  "system": {
    "A": [[2.0]],
    "B": [[1.0, 2.0]],
    "G1": [[1.0, -2.0], [0.25, -0.5]],
    "G2": [[-1.0], [0.0]],
    "Lambda": [1.0, 0.5]
  },
  "initial": {
    "z0": [1.0],
    "y0": ["-cos(5*pi/2*x)", "0"]
  },
  "run": {
    "eps": [0.2, 0.1, 0.05, 0.01],
    "T": 5.0,
    "dt": 0.001,
    "K": 200,
    "solver": "characteristics"
  },
  "analysis": {
    "alpha": 0.5,
    "eps_max": 0.2,
    "eps_tol": 0.001
  }
}
)json";

struct CommandOptions {
  std::optional<SolverChoice> solver;
  std::filesystem::path out = "out";
  std::optional<std::vector<double>> eps;
  std::optional<double> alpha;
  std::optional<double> im_max;
  std::optional<double> T, dt, upwind_dt;
  std::optional<int> K;
  bool euler_z = false;
  bool write_files = true;
  unsigned workers = worker_count();
};

/// Scenario with the command-line overrides applied.
inline Scenario apply_overrides(Scenario sc, const CommandOptions& o) {
  if (o.solver) sc.run.solver = *o.solver;
  if (o.eps) sc.run.eps = *o.eps;
  if (o.alpha) sc.analysis.alpha = *o.alpha;
  if (o.im_max) sc.analysis.im_max = *o.im_max;
  if (o.T) sc.run.T = *o.T;
  if (o.dt) sc.run.dt = *o.dt;
  if (o.upwind_dt) sc.run.upwind_dt = *o.upwind_dt;
  if (o.K) sc.run.K = *o.K;
  if (o.euler_z) sc.run.euler_z = true;
  if (!(sc.analysis.alpha > 0.0)) throw Error(ErrorKind::ValidationError, ErrorKind::PreconditionViolation, "alpha must be positive");
  for (double e : sc.run.eps)
    if (!(e > 0.0)) throw Error(ErrorKind::ValidationError, ErrorKind::PreconditionViolation, "eps values must be positive");
  return sc;
}

namespace detail {

/// Margin used when checking that the reduced-order and boundary-layer
/// systems are exponentially stable at all.
inline constexpr double kHypothesisMargin = 1e-6;

inline VerdictOptions verdict_options(const Scenario& sc) {
  VerdictOptions vo;
  vo.radius_cap = sc.analysis.radius_cap;
  vo.bls_im_max = sc.analysis.im_max;
  return vo;
}

inline std::optional<SearchWindow> bls_window_override(const Scenario& sc, double alpha) {
  const auto& a = sc.analysis;
  if (!a.re_min && !a.re_max && !a.im_max) return std::nullopt;
  SearchWindow w = default_bls_window(sc.system, alpha, a.im_max);
  if (a.re_min) w.re_min = *a.re_min;
  if (a.re_max) w.re_max = *a.re_max;
  w.tol = a.root_tol;
  return w;
}

inline Provenance provenance_of(const Scenario& sc) {
  Provenance p;
  const auto& a = sc.analysis;
  p.alpha = a.alpha;
  p.seed = a.seed;
  p.root_tol = a.root_tol;
  p.rho2_tol = a.rho2_tol;
  p.eps_tol = a.eps_tol;
  p.compat_tol = a.compat_tol;
  p.det_tol = a.det_tol;
  p.radius_cap = a.radius_cap;
  p.T = sc.run.T;
  p.dt = sc.run.dt;
  p.K = sc.run.K;
  p.im_max = a.im_max;
  return p;
}

inline SweepRow row_of(const StabilityReport& r) {
  SweepRow row;
  row.eps = r.eps;
  row.verdict = r.verdict;
  row.abscissa = r.spectral_abscissa;
  row.window = r.window;
  row.window_certified = r.window_certified;
  row.kappa = r.kappa_estimate;
  row.radius = r.radius;
  return row;
}

inline std::string eps_tag(double eps) { return "eps_" + g6(eps); }

inline std::vector<double> snapshot_times_for(double eps, double T) {
  std::vector<double> ts{0.0};
  for (double t : {8.0 * eps, 0.5 * T, T})
    if (t <= T) ts.push_back(t);
  return ts;
}

inline Trajectory run_solver(const Scenario& sc, const InitialCondition& ic, double eps, SolverTag tag,
                             const std::vector<double>& snapshots) {
  if (tag == SolverTag::upwind) {
    UpwindOptions uo;
    uo.courant = sc.run.courant;
    uo.dt = sc.run.upwind_dt;
    uo.snapshot_times = snapshots;
    return simulate_full_upwind(sc.system, eps, ic, sc.run.T, sc.run.K, uo);
  }
  CharacteristicsOptions co;
  co.K = sc.run.K;
  co.euler_z = sc.run.euler_z;
  co.snapshot_times = snapshots;
  return simulate_full_characteristics(sc.system, eps, ic, sc.run.T, sc.run.dt, co);
}

inline std::vector<SolverTag> solver_tags(SolverChoice c) {
  switch (c) {
    case SolverChoice::characteristics: return {SolverTag::characteristics};
    case SolverChoice::upwind: return {SolverTag::upwind};
    case SolverChoice::both: return {SolverTag::characteristics, SolverTag::upwind};
  }
  return {};
}

/// z(t) by linear interpolation in the stored samples.
inline Vec z_at(const Trajectory& tr, double t) {
  const auto& ts = tr.times;
  if (t <= ts.front()) return tr.z.front();
  if (t >= ts.back()) return tr.z.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const auto k = static_cast<std::size_t>(it - ts.begin());
  const double a = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return (1.0 - a) * tr.z[k - 1] + a * tr.z[k];
}

/// max_{x,i} |y_i(x, t) - y_i(1, t)| / max_i |ystar_i(t)| with ystar the
/// boundary equilibrium of z(t).
inline double spatial_oscillation_ratio(const SystemParams& sys, const Trajectory& tr, double t) {
  const ProfileSnapshot* p = tr.profile_at(t);
  if (!p) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index K = p->y.cols() - 1;
  double osc = 0.0;
  for (Eigen::Index i = 0; i < p->y.rows(); ++i)
    for (Eigen::Index j = 0; j <= K; ++j) osc = std::max(osc, std::abs(p->y(i, j) - p->y(i, K)));
  const Vec ystar = equilibrium_profile(sys, tr.z[p->step]);
  return osc / ystar.cwiseAbs().maxCoeff();
}

inline std::optional<bool> sign_agreement(Verdict v, const DecayEstimate& fit) {
  if (v == Verdict::inconclusive || !(std::abs(fit.nu) > 3.0 * fit.nu_stderr)) return std::nullopt;
  return (v == Verdict::stable) == (fit.nu > 0.0);
}

}  // namespace detail

/// ros/bls verdicts, rho2 and the Lyapunov criterion, full-system verdicts at
/// every run eps, and the eps search on (0, eps_max].
inline Report cmd_analyze(const Scenario& sc_in, const CommandOptions& opts = {}) {
  const Scenario sc = apply_overrides(sc_in, opts);
  const auto& sys = sc.system;
  const double alpha = sc.analysis.alpha;
  const VerdictOptions vo = detail::verdict_options(sc);

  Report rep;
  rep.command = "analyze";
  rep.scenario = sc.name;
  rep.provenance = detail::provenance_of(sc);
  rep.ros = stability_verdict(sys, Subsystem::ros, {}, detail::kHypothesisMargin);
  rep.bls = stability_verdict(sys, Subsystem::bls, {}, detail::kHypothesisMargin,
                              detail::bls_window_override(sc, detail::kHypothesisMargin), vo);

  Rho2Options ro;
  ro.tol = sc.analysis.rho2_tol;
  ro.seed = sc.analysis.seed;
  rep.rho2 = rho2(sys.G1(), sys.speeds(), ro);
  rep.lyapunov = lyapunov_criterion(sys.G1(), sys.speeds(), *rep.rho2, sc.analysis.rho2_tol);
  const bool hyp = rep.ros->verdict == Verdict::stable && rep.bls->verdict == Verdict::stable;
  rep.hypotheses_hold = hyp;

  const auto& eps = sc.run.eps;
  rep.sweep = parallel_map<SweepRow>(
      eps.size(),
      [&](std::size_t i) { return detail::row_of(stability_verdict(sys, Subsystem::full, eps[i], alpha, {}, vo)); },
      opts.workers);

  if (!hyp) {
    rep.notes.push_back(std::string(to_string(ErrorKind::NoStableEpsilonFound)) +
                        ": reduced-order or boundary-layer system not certified stable; eps search skipped");
    return rep;
  }
  try {
    const auto es = epsilon_star_search(sys, alpha, sc.eps_max(), sc.analysis.eps_tol, vo);
    rep.eps_star = es.eps_hat;
    rep.notes.push_back("eps search: " + std::to_string(es.reports.size()) +
                        " full-system verdicts on (0, " + detail::g6(sc.eps_max()) + "], margin alpha " +
                        detail::g6(alpha));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoStableEpsilonFound && e.kind() != ErrorKind::PreconditionViolation) throw;
    rep.notes.push_back(std::string(to_string(e.kind())) + ": " + e.what() + "; eps search skipped");
  }
  return rep;
}

/// One trajectory CSV per (eps, solver) plus profile snapshots at
/// t = 0, 8 eps, T/2, T in a directory of the same name.
inline Report cmd_simulate(const Scenario& sc_in, const CommandOptions& opts = {}) {
  const Scenario sc = apply_overrides(sc_in, opts);
  const InitialCondition ic = sc.initial_condition();
  Report rep;
  rep.command = "simulate";
  rep.scenario = sc.name;
  rep.provenance = detail::provenance_of(sc);
  if (!ic.compatible) rep.notes.push_back("initial data violate y0(0) = G1 y0(1) + G2 z0");

  struct Job {
    double eps;
    SolverTag tag;
  };
  std::vector<Job> jobs;
  for (double e : sc.run.eps)
    for (SolverTag t : detail::solver_tags(sc.run.solver)) jobs.push_back({e, t});

  const auto runs = parallel_map<Trajectory>(
      jobs.size(),
      [&](std::size_t i) {
        return detail::run_solver(sc, ic, jobs[i].eps, jobs[i].tag, detail::snapshot_times_for(jobs[i].eps, sc.run.T));
      },
      opts.workers);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string stem = detail::eps_tag(jobs[i].eps) + "_" + to_string(jobs[i].tag);
    if (opts.write_files) {
      const auto path = opts.out / (stem + ".csv");
      write_trajectory_csv(path, runs[i]);
      rep.files.push_back(path.string());
      for (const auto& p : write_profile_snapshots(opts.out / stem, runs[i],
                                                   detail::snapshot_times_for(jobs[i].eps, sc.run.T)))
        rep.files.push_back(p.string());
    }
    rep.metrics.emplace_back("final |z| " + stem, runs[i].norm_z.back());
  }
  // Cross-solver z agreement when both solvers ran.
  for (std::size_t i = 0; i + 1 < jobs.size(); ++i) {
    if (jobs[i].tag != SolverTag::characteristics || jobs[i + 1].tag != SolverTag::upwind) continue;
    double diff = 0.0;
    for (std::size_t k = 0; k < runs[i + 1].size(); ++k)
      diff = std::max(diff, (runs[i + 1].z[k] - detail::z_at(runs[i], runs[i + 1].times[k])).norm());
    rep.metrics.emplace_back("max |z_upwind - z_characteristics| " + detail::eps_tag(jobs[i].eps), diff);
  }
  return rep;
}

/// analyze plus a characteristics run per eps: fitted decay rate on the fit
/// window, sign agreement with the verdict, and sup distance to the ros.
inline Report cmd_sweep(const Scenario& sc_in, const CommandOptions& opts = {}) {
  const Scenario sc = apply_overrides(sc_in, opts);
  Report rep = cmd_analyze(sc, CommandOptions{.write_files = opts.write_files, .workers = opts.workers});
  rep.command = "sweep";
  const InitialCondition ic = sc.initial_condition();
  const Trajectory ros = simulate_ros(sc.system, ic.z0, sc.run.T, sc.run.dt);

  const auto runs = parallel_map<Trajectory>(
      rep.sweep.size(),
      [&](std::size_t i) {
        const double e = rep.sweep[i].eps;
        return detail::run_solver(sc, ic, e, SolverTag::characteristics, detail::snapshot_times_for(e, sc.run.T));
      },
      opts.workers);

  std::string table = "eps,verdict,abscissa,window_certified,nu,nu_stderr,ros_error\n";
  for (std::size_t i = 0; i < rep.sweep.size(); ++i) {
    auto& row = rep.sweep[i];
    row.ros_error = compare_to_ros(runs[i], ros);
    try {
      const DecayEstimate fit = decay_fit(runs[i], sc.fit_start(), sc.fit_end());
      row.nu = fit.nu;
      row.nu_stderr = fit.nu_stderr;
      row.sign_agrees = detail::sign_agreement(row.verdict, fit);
      if (row.sign_agrees && !*row.sign_agrees)
        rep.notes.push_back("eps " + detail::g6(row.eps) + ": fitted decay sign disagrees with the verdict");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateWindow) throw;
      rep.notes.push_back("eps " + detail::g6(row.eps) + ": " + e.what());
    }
    table += format_g17(row.eps) + "," + to_string(row.verdict) + "," + format_g17(row.abscissa) + "," +
             (row.window_certified ? "1" : "0") + "," + (row.nu ? format_g17(*row.nu) : "") + "," +
             (row.nu_stderr ? format_g17(*row.nu_stderr) : "") + "," + format_g17(*row.ros_error) + "\n";
    if (opts.write_files) {
      const auto path = opts.out / (detail::eps_tag(row.eps) + "_characteristics.csv");
      write_trajectory_csv(path, runs[i]);
      rep.files.push_back(path.string());
    }
  }
  if (opts.write_files) {
    const auto path = opts.out / "sweep.csv";
    write_file_atomic(path, table);
    rep.files.push_back(path.string());
  }
  return rep;
}

namespace detail {

inline Report reproduce_boundary_layer(const CommandOptions& opts) {
  Scenario sc = parse_scenario(kBenchmarkScenario);
  sc.name = "example1";
  const auto& sys = sc.system;
  Report rep;
  rep.command = "reproduce";
  rep.scenario = "example1";
  rep.provenance = provenance_of(sc);
  rep.provenance.T = 40.0;
  rep.provenance.dt = 0.01;

  SearchWindow w{-1.0, 0.5, 3.0 * kPi, sc.analysis.root_tol};
  VerdictOptions vo;
  rep.bls = stability_verdict(sys, Subsystem::bls, {}, kHypothesisMargin, w, vo);
  Rho2Options ro;
  ro.tol = sc.analysis.rho2_tol;
  ro.seed = sc.analysis.seed;
  rep.rho2 = rho2(sys.G1(), sys.speeds(), ro);
  rep.lyapunov = lyapunov_criterion(sys.G1(), sys.speeds(), *rep.rho2, ro.tol);
  rep.metrics.emplace_back("random Lyapunov witnesses found (100 draws)",
                           lyapunov_random_search(sys.G1(), sys.speeds(), 100, sc.analysis.seed));

  const InitialCondition ic = sc.initial_condition();
  const Trajectory bls = simulate_bls(sys, bls_initial(sys, ic), 40.0, 0.01);
  const DecayEstimate fit = decay_fit(bls, 10.0, 40.0);
  rep.metrics.emplace_back("boundary-layer decay rate (fit on [10, 40])", fit.nu);
  rep.metrics.emplace_back("ln(2) / 2", 0.5 * std::log(2.0));

  if (opts.write_files) {
    std::string roots = "re,im\n";
    for (auto z : rep.bls->roots) roots += format_g17(z.real()) + "," + format_g17(z.imag()) + "\n";
    const auto rp = opts.out / "bls_roots.csv";
    write_file_atomic(rp, roots);
    const auto tp = opts.out / "bls_trajectory.csv";
    write_trajectory_csv(tp, bls);
    rep.files = {rp.string(), tp.string()};
  }
  return rep;
}

inline Report reproduce_sweep(const CommandOptions& opts) {
  CommandOptions o = opts;
  o.eps = std::vector<double>{0.2, 0.1, 0.05, 0.01};
  const Scenario sc = apply_overrides(parse_scenario(kBenchmarkScenario), o);
  Report rep = cmd_sweep(sc, CommandOptions{.out = opts.out, .write_files = opts.write_files, .workers = opts.workers});
  rep.command = "reproduce";

  const InitialCondition ic = sc.initial_condition();
  const auto& sys = sc.system;
  const Trajectory ros = simulate_ros(sys, ic.z0, sc.run.T, sc.run.dt);
  const auto& eps = sc.run.eps;

  // Fine snapshots for the eps = 0.01 profile plots: [0, 8 eps] and [0, T].
  const double eps_small = eps.back();
  std::vector<double> snaps;
  for (int k = 0; k <= 8; ++k) snaps.push_back(k * eps_small);
  for (int k = 1; k <= 10; ++k) snaps.push_back(0.1 * k * sc.run.T);

  const auto runs = parallel_map<Trajectory>(
      eps.size(),
      [&](std::size_t i) {
        std::vector<double> s = snapshot_times_for(eps[i], sc.run.T);
        if (eps[i] == eps_small) s.insert(s.end(), snaps.begin(), snaps.end());
        return run_solver(sc, ic, eps[i], SolverTag::characteristics, s);
      },
      opts.workers);

  for (std::size_t i = 0; i < eps.size(); ++i)
    rep.metrics.emplace_back("sup |z - zbar| " + eps_tag(eps[i]), compare_to_ros(runs[i], ros));
  rep.metrics.emplace_back("spatial oscillation / max|y*| at t = 8 eps, " + eps_tag(eps_small),
                           spatial_oscillation_ratio(sys, runs.back(), 8.0 * eps_small));
  if (rep.eps_star)
    rep.notes.push_back("stability crossing estimate (margin alpha " + g6(sc.analysis.alpha) + "): eps ~ " +
                        g6(*rep.eps_star));

  if (opts.write_files) {
    // z for every eps and the reduced-order solution, on the ros time grid.
    std::string ode = "t,zbar";
    for (double e : eps) ode += ",z_" + eps_tag(e);
    ode += "\n";
    for (std::size_t k = 0; k < ros.size(); ++k) {
      const double t = ros.times[k];
      ode += format_g17(t) + "," + format_g17(ros.z[k](0));
      for (const auto& tr : runs) ode += "," + format_g17(z_at(tr, t)(0));
      ode += "\n";
    }
    const auto op = opts.out / "ode_z.csv";
    write_file_atomic(op, ode);
    rep.files.push_back(op.string());

    // Boundary traces y(0, t), y(1, t) and ystar(t) = (I - G1)^{-1} G2 zbar(t).
    const int m = sys.m();
    for (std::size_t i = 0; i < eps.size(); ++i) {
      std::string tr = "t";
      for (int c = 1; c <= m; ++c) tr += ",y0_" + std::to_string(c);
      for (int c = 1; c <= m; ++c) tr += ",y1_" + std::to_string(c);
      for (int c = 1; c <= m; ++c) tr += ",ystar_" + std::to_string(c);
      tr += "\n";
      const Trajectory& run = runs[i];
      for (std::size_t k = 0; k < run.size(); ++k) {
        const Vec ystar = equilibrium_profile(sys, z_at(ros, run.times[k]));
        tr += format_g17(run.times[k]);
        for (int c = 0; c < m; ++c) tr += "," + format_g17(run.y_boundary[k](c));
        for (int c = 0; c < m; ++c) tr += "," + format_g17(run.y_outflow[k](c));
        for (int c = 0; c < m; ++c) tr += "," + format_g17(ystar(c));
        tr += "\n";
      }
      const auto tp = opts.out / ("trace_" + eps_tag(eps[i]) + ".csv");
      write_file_atomic(tp, tr);
      rep.files.push_back(tp.string());
    }
    for (const auto& p : write_profile_snapshots(opts.out / ("profiles_" + eps_tag(eps_small)), runs.back(), snaps))
      rep.files.push_back(p.string());
    const auto rp = opts.out / "ros.csv";
    write_trajectory_csv(rp, ros);
    rep.files.push_back(rp.string());
  }
  return rep;
}

}  // namespace detail

inline Report cmd_reproduce(const std::string& target, const CommandOptions& opts = {}) {
  if (target == "example1") return detail::reproduce_boundary_layer(opts);
  if (target == "section5") return detail::reproduce_sweep(opts);
  throw Error(ErrorKind::ParseError, "unknown reproduce target '" + target + "' (example1 or section5)");
}

}  // namespace fastslow
