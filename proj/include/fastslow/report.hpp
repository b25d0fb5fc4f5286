#pragma once

// Analysis reports and their text / JSON renderings. Renderings contain no
// timing or host information, so identical inputs give identical bytes.

#include "fastslow/rho2.hpp"
#include "fastslow/stability.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fastslow {

inline constexpr const char* kVersion = "1.0.0";

struct SweepRow {
  double eps = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double abscissa = 0.0;
  SearchWindow window{};
  bool window_certified = false;
  double kappa = 0.0;
  double radius = 0.0;
  /// Fitted decay rate of the characteristics run, when simulated.
  std::optional<double> nu, nu_stderr;
  /// Whether the sign of nu agrees with the verdict; empty when the verdict
  /// is inconclusive or |nu| is within 3 standard errors of 0.
  std::optional<bool> sign_agrees;
  std::optional<double> ros_error;
};

struct Provenance {
  std::string version = kVersion;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double root_tol = 0.0, rho2_tol = 0.0, eps_tol = 0.0, compat_tol = 0.0, det_tol = 0.0, radius_cap = 0.0;
  double T = 0.0, dt = 0.0;
  int K = 0;
  std::optional<double> im_max;
};

struct Report {
  std::string command;
  std::string scenario;
  std::optional<StabilityReport> ros, bls;
  std::optional<Rho2Result> rho2;
  std::optional<LyapunovResult> lyapunov;
  std::optional<bool> hypotheses_hold;
  std::vector<SweepRow> sweep;
  std::optional<double> eps_star;
  /// Named scalar results (decay rates, errors) in insertion order.
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  std::vector<std::string> files;
  Provenance provenance;

  bool any_inconclusive() const {
    if (ros && ros->verdict == Verdict::inconclusive) return true;
    if (bls && bls->verdict == Verdict::inconclusive) return true;
    for (const auto& r : sweep)
      if (r.verdict == Verdict::inconclusive) return true;
    return false;
  }
};

namespace detail {

inline std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string complex_text(cplx s) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.9g %c %.9gi", s.real(), s.imag() < 0 ? '-' : '+', std::abs(s.imag()));
  return buf;
}

inline std::string window_text(const SearchWindow& w) {
  return "Re [" + g6(w.re_min) + ", " + g6(w.re_max) + "], |Im| <= " + g6(w.im_max);
}

/// No root in the window: say so instead of printing -inf.
inline std::string abscissa_text(double a, const SearchWindow& w) {
  return std::isfinite(a) ? g6(a) : "< " + g6(w.re_min) + " (no roots in window)";
}

inline void stability_text(std::string& s, const char* label, const StabilityReport& r) {
  s += std::string(label) + ": " + to_string(r.verdict) + "\n";
  s += "  spectral abscissa " + abscissa_text(r.spectral_abscissa, r.window) + ", margin alpha " + g6(r.alpha_margin) +
       "\n";
  if (r.subsystem != Subsystem::ros)
    s += "  window " + window_text(r.window) + (r.window_certified ? " (certified)" : " (not certified)") + "\n";
  s += "  roots (" + std::to_string(r.roots.size()) + "):\n";
  for (const auto& z : r.roots) s += "    " + complex_text(z) + "\n";
  for (const auto& n : r.notes) s += "  note: " + n + "\n";
}

inline nlohmann::json window_json(const SearchWindow& w) {
  return {{"re_min", w.re_min}, {"re_max", w.re_max}, {"im_max", w.im_max}, {"tol", w.tol}};
}

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json stability_json(const StabilityReport& r) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& z : r.roots) roots.push_back({z.real(), z.imag()});
  return {{"subsystem", to_string(r.subsystem)},
          {"eps", r.eps},
          {"verdict", to_string(r.verdict)},
          {"spectral_abscissa", number_or_null(r.spectral_abscissa)},
          {"alpha", r.alpha_margin},
          {"window", window_json(r.window)},
          {"window_certified", r.window_certified},
          {"kappa_estimate", r.kappa_estimate},
          {"radius", number_or_null(r.radius)},
          {"roots", roots},
          {"notes", r.notes}};
}

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline std::string render_text(const Report& r) {
  using detail::g6;
  std::string s = "fastslow " + r.provenance.version + " " + r.command;
  if (!r.scenario.empty()) s += " " + r.scenario;
  s += "\n\n";
  if (r.ros) detail::stability_text(s, "reduced-order system", *r.ros);
  if (r.bls) detail::stability_text(s, "boundary-layer system", *r.bls);
  if (r.rho2) {
    s += "rho2(G1) = " + g6(r.rho2->infimum) + " (criterion rho2 < 1: " + (r.rho2->criterion_holds ? "holds" : "fails") +
         ")\n";
    s += "  minimizing diagonal:";
    for (Eigen::Index i = 0; i < r.rho2->minimizer_diag.size(); ++i) s += " " + g6(r.rho2->minimizer_diag(i));
    s += "\n";
  }
  if (r.lyapunov) {
    s += std::string("diagonal Lyapunov criterion: ") + (r.lyapunov->holds ? "holds" : "fails");
    if (r.lyapunov->mu) s += " (mu " + g6(*r.lyapunov->mu) + ", min eigenvalue " + g6(*r.lyapunov->min_eigenvalue) + ")";
    s += "\n";
  }
  if (r.hypotheses_hold)
    s += std::string("reduced-order and boundary-layer stability: ") + (*r.hypotheses_hold ? "both hold" : "not both") +
         "\n";
  if (!r.sweep.empty()) {
    s += "\neps sweep (full system):\n";
    s += "  eps         verdict       abscissa     nu           ros_error    window\n";
    for (const auto& row : r.sweep) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "  %-11s %-13s %-12s %-12s %-12s ", g6(row.eps).c_str(), to_string(row.verdict),
                    (std::isfinite(row.abscissa) ? g6(row.abscissa) : "< " + g6(row.window.re_min)).c_str(), row.nu ? g6(*row.nu).c_str() : "-",
                    row.ros_error ? g6(*row.ros_error).c_str() : "-");
      s += buf;
      s += detail::window_text(row.window) + (row.window_certified ? "" : " (not certified)") + "\n";
    }
  }
  if (r.eps_star) s += "\nlargest certified-stable eps found: " + g6(*r.eps_star) + "\n";
  if (!r.metrics.empty()) {
    s += "\n";
    for (const auto& [k, v] : r.metrics) s += k + " = " + g6(v) + "\n";
  }
  if (!r.notes.empty()) {
    s += "\nnotes:\n";
    for (const auto& n : r.notes) s += "  " + n + "\n";
  }
  if (!r.files.empty()) {
    s += "\nfiles:\n";
    for (const auto& f : r.files) s += "  " + f + "\n";
  }
  const auto& p = r.provenance;
  s += "\nprovenance: alpha " + g6(p.alpha) + ", seed " + std::to_string(p.seed) + ", root_tol " + g6(p.root_tol) +
       ", rho2_tol " + g6(p.rho2_tol) + ", eps_tol " + g6(p.eps_tol) + ", compat_tol " + g6(p.compat_tol) +
       ", det_tol " + g6(p.det_tol) + ", radius_cap " + g6(p.radius_cap) + ", T " + g6(p.T) + ", dt " + g6(p.dt) +
       ", K " + std::to_string(p.K) + "\n";
  return s;
}

inline nlohmann::json report_json(const Report& r) {
  using nlohmann::json;
  json j = {{"version", r.provenance.version}, {"command", r.command}, {"scenario", r.scenario}};
  if (r.ros) j["ros"] = detail::stability_json(*r.ros);
  if (r.bls) j["bls"] = detail::stability_json(*r.bls);
  if (r.rho2) {
    json rj = {{"infimum", r.rho2->infimum},
               {"minimizer_diag", detail::vec_json(r.rho2->minimizer_diag)},
               {"criterion_holds", r.rho2->criterion_holds}};
    if (r.rho2->witness_mu) rj["witness_mu"] = *r.rho2->witness_mu;
    if (r.rho2->witness_Q_diag) rj["witness_Q_diag"] = detail::vec_json(*r.rho2->witness_Q_diag);
    j["rho2"] = rj;
  }
  if (r.lyapunov) {
    json lj = {{"holds", r.lyapunov->holds}};
    if (r.lyapunov->mu) lj["mu"] = *r.lyapunov->mu;
    if (r.lyapunov->Q_diag) lj["Q_diag"] = detail::vec_json(*r.lyapunov->Q_diag);
    if (r.lyapunov->min_eigenvalue) lj["min_eigenvalue"] = *r.lyapunov->min_eigenvalue;
    j["lyapunov"] = lj;
  }
  if (r.hypotheses_hold) j["hypotheses_hold"] = *r.hypotheses_hold;
  json rows = json::array();
  for (const auto& row : r.sweep) {
    json rj = {{"eps", row.eps},
               {"verdict", to_string(row.verdict)},
               {"abscissa", detail::number_or_null(row.abscissa)},
               {"window", detail::window_json(row.window)},
               {"window_certified", row.window_certified},
               {"kappa_estimate", row.kappa},
               {"radius", detail::number_or_null(row.radius)}};
    if (row.nu) rj["nu"] = *row.nu;
    if (row.nu_stderr) rj["nu_stderr"] = *row.nu_stderr;
    if (row.sign_agrees) rj["sign_agrees"] = *row.sign_agrees;
    if (row.ros_error) rj["ros_error"] = *row.ros_error;
    rows.push_back(rj);
  }
  j["sweep"] = rows;
  if (r.eps_star) j["eps_star"] = *r.eps_star;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = detail::number_or_null(v);
  j["metrics"] = metrics;
  j["notes"] = r.notes;
  j["files"] = r.files;
  const auto& p = r.provenance;
  json pj = {{"alpha", p.alpha},     {"seed", p.seed},         {"root_tol", p.root_tol},
             {"rho2_tol", p.rho2_tol}, {"eps_tol", p.eps_tol}, {"compat_tol", p.compat_tol},
             {"det_tol", p.det_tol}, {"radius_cap", p.radius_cap}, {"T", p.T},
             {"dt", p.dt},           {"K", p.K}};
  if (p.im_max) pj["im_max"] = *p.im_max;
  j["provenance"] = pj;
  return j;
}

}  // namespace fastslow
