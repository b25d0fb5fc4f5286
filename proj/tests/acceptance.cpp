// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "fastslow/fastslow.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace fastslow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs >= budget_s) {
    o.pass = false;
    o.detail += "; over time budget";
  }
  char head[64];
  std::snprintf(head, sizeof head, "%s %d ", o.pass ? "PASS" : "FAIL", id);
  std::printf("%s%s (%.2f s): %s\n", head, title, secs, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const double kHalfLn2 = 0.5 * std::log(2.0);

Outcome benchmark_roots() {
  const SystemParams sys = fixtures::benchmark();
  const auto found =
      find_roots([&](cplx s) { return char_bls(sys, s); }, SearchWindow{-1.0, 0.5, 3.0 * kPi, 1e-12});
  // The stated set: -ln2/2 +- i(pi/4 + 2k pi), k in {-1, 0}, with conjugates.
  std::vector<cplx> stated;
  for (int k : {-1, 0})
    for (double sgn : {1.0, -1.0}) stated.push_back({-kHalfLn2, sgn * (0.25 * kPi + 2.0 * k * kPi)});
  // Every zero of 1 - w + w^2/2 (w = e^{-s}) inside the window.
  const auto all = oracle::commensurate_bls_roots(sys.G1(), {1, 2}, 1.0, -1.0, 0.5, 3.0 * kPi);
  const double err_stated = oracle::match_roots(found, stated);
  const double err_all = oracle::match_roots(found, all);
  std::string extra;
  for (auto z : found) {
    bool listed = false;
    for (auto w : stated) listed = listed || std::abs(z - w) < 1e-6;
    if (!listed) extra += " " + fmt("%.6f%+.6fi", z.real(), z.imag());
  }
  Outcome o;
  o.pass = err_stated <= 1e-9;
  o.detail = std::to_string(found.size()) + " roots found, " + std::to_string(stated.size()) +
             " in the stated set; max error vs stated set " + fmt("%.3g", err_stated) +
             ", vs all zeros of the window " + fmt("%.3g", err_all) +
             (extra.empty() ? "" : "; roots outside the stated set:" + extra);
  return o;
}

Outcome rho2_value() {
  const SystemData d = fixtures::benchmark_data();
  const Rho2Result r = rho2(d.G1, d.lambda);
  const LyapunovResult l = lyapunov_criterion(d.G1, d.lambda, r);
  const int hits = lyapunov_random_search(d.G1, d.lambda, 100, 0x5eed2);
  const auto [t, scalar] = oracle::minimize_scalar(
      [&](double a) {
        Vec v(2);
        v << 1.0, std::exp(a);
        return oracle::scaled_two_norm(d.G1, v);
      },
      -10.0, 10.0);
  (void)t;
  Outcome o;
  o.pass = std::abs(r.infimum - 1.5) <= 1e-6 && !l.holds && hits == 0;
  o.detail = fmt("rho2 = %.12f (scalar oracle %.12f), lyapunov ", r.infimum, scalar) + (l.holds ? "true" : "false") +
             ", random positive-definite draws " + std::to_string(hits) + "/100";
  return o;
}

Outcome reduced_system() {
  const SystemParams sys = fixtures::benchmark();
  const Mat Ar = reduced_matrix(sys);
  const auto roots = find_roots([&](cplx s) { return char_ros(sys, s); }, SearchWindow{-10.0, 10.0, 10.0, 1e-13});
  Outcome o;
  o.pass = Ar.rows() == 1 && std::abs(Ar(0, 0) + 2.0) <= 1e-12 && roots.size() == 1 &&
           std::abs(roots[0] + 2.0) <= 1e-12;
  o.detail = fmt("A_ros = %.15g, %g root(s), first at %.15g", Ar(0, 0), static_cast<double>(roots.size()),
                 roots.empty() ? std::nan("") : roots[0].real());
  return o;
}

Outcome schur_identity() {
  const SystemParams sys = fixtures::benchmark();
  std::mt19937_64 rng(0x5c40);
  std::uniform_real_distribution<double> ure(-5.0, 5.0), uim(-50.0, 50.0), ueps(0.0, 1.0);
  int used = 0, skipped = 0;
  double worst = 0.0;
  while (used < 1000) {
    const cplx s{ure(rng), uim(rng)};
    double eps = ueps(rng);
    if (eps == 0.0) continue;
    const cplx bls = char_bls(sys, eps * s);
    if (!(std::abs(bls) > 1e-6)) {
      ++skipped;
      continue;
    }
    const cplx full = char_full(sys, s, eps);
    const cplx prod = m1(sys, s, eps).determinant() * bls;
    worst = std::max(worst, std::abs(full - prod) / (1.0 + std::abs(full)));
    ++used;
  }
  Outcome o;
  o.pass = worst <= 1e-10;
  o.detail = fmt("max |full - det M1 * bls| / (1 + |full|) = %.3g over 1000 draws (%g rejected)", worst,
                 static_cast<double>(skipped));
  return o;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(0x0a11);
  std::uniform_int_distribution<int> km(1, 3), kk(1, 3);
  std::uniform_real_distribution<double> uq(0.4, 1.5);
  int matched = 0, total_roots = 0;
  double worst = 0.0;
  std::string first_bad;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = km(rng);
    const double q = uq(rng);
    std::vector<int> k(m);
    SystemData d;
    d.A = Mat::Zero(1, 1);
    d.B = Mat::Zero(1, m);
    d.G2 = Mat::Zero(m, 1);
    d.G1 = fixtures::random_matrix(rng, m, m, 1.2);
    d.lambda = Vec(m);
    int ksum = 0;
    for (int i = 0; i < m; ++i) {
      k[i] = kk(rng);
      ksum += k[i];
      d.lambda(i) = 1.0 / (k[i] * q);
    }
    const SystemParams sys = validate(d);
    const SearchWindow w{-1.7, 1.3, 2.0 * kPi / q + 0.37, 1e-12};
    const auto expected = oracle::commensurate_bls_roots(d.G1, k, q, w.re_min, w.re_max, w.im_max);
    FindOptions fo;
    fo.count.max_step = phase_step_for(q * ksum);
    const auto found = find_roots([&](cplx s) { return char_bls(sys, s); }, w, fo);
    const double err = oracle::match_roots(found, expected);
    total_roots += static_cast<int>(expected.size());
    if (err <= 1e-9) {
      ++matched;
    } else if (first_bad.empty()) {
      first_bad = "; first mismatch at system " + std::to_string(trial) + " (" + std::to_string(found.size()) +
                  " found, " + std::to_string(expected.size()) + " expected)";
    }
    if (std::isfinite(err)) worst = std::max(worst, err);
  }
  Outcome o;
  o.pass = matched == 50;
  o.detail = std::to_string(matched) + "/50 systems matched root-for-root (" + std::to_string(total_roots) +
             " roots), max distance " + fmt("%.3g", worst) + first_bad;
  return o;
}

Outcome spectral_vs_temporal() {
  const SystemParams sys = fixtures::benchmark();
  const InitialCondition ic = fixtures::benchmark_ic();
  std::string detail;
  bool ok = true;
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    const StabilityReport r = stability_verdict(sys, Subsystem::full, eps, 0.5);
    const Trajectory tr = simulate_full_characteristics(sys, eps, ic, 5.0, 1e-3);
    const DecayEstimate fit = decay_fit(tr, 1.25, 5.0);
    const bool decisive = std::abs(fit.nu) > 3.0 * fit.nu_stderr && r.verdict != Verdict::inconclusive;
    const bool agrees = (fit.nu > 0.0) == (r.verdict == Verdict::stable);
    if (decisive && !agrees) ok = false;
    if (eps == 0.01 && !(r.verdict == Verdict::stable && fit.nu > 0.0)) ok = false;
    detail += fmt("eps %g: ", eps) + to_string(r.verdict) + fmt(" (abscissa %.4g), nu %.4g +- %.2g", r.spectral_abscissa,
                                                                 fit.nu, fit.nu_stderr) +
              (decisive ? (agrees ? " agrees" : " DISAGREES") : " not decisive") + "; ";
  }
  const auto es = epsilon_star_search(sys, 0.5, 0.2, 1e-3);
  detail += fmt("reported crossing eps ~ %.4g (margin 0.5)", es.eps_hat);
  return {ok, detail};
}

Outcome singular_perturbation() {
  const SystemParams sys = fixtures::benchmark();
  const InitialCondition ic = fixtures::benchmark_ic();
  const Trajectory ros = simulate_ros(sys, ic.z0, 5.0, 1e-3);
  std::vector<double> errs;
  double ratio = 0.0;
  for (double eps : {0.1, 0.05, 0.01}) {
    CharacteristicsOptions co;
    co.snapshot_times = {8.0 * eps};
    const Trajectory tr = simulate_full_characteristics(sys, eps, ic, 5.0, 1e-3, co);
    errs.push_back(compare_to_ros(tr, ros));
    if (eps == 0.01) {
      const ProfileSnapshot* p = tr.profile_at(8.0 * eps);
      double osc = 0.0;
      for (Eigen::Index i = 0; i < p->y.rows(); ++i)
        for (Eigen::Index j = 0; j < p->y.cols(); ++j)
          osc = std::max(osc, std::abs(p->y(i, j) - p->y(i, p->y.cols() - 1)));
      const Vec ystar = equilibrium_profile(sys, tr.z[p->step]);
      ratio = osc / ystar.cwiseAbs().maxCoeff();
    }
  }
  Outcome o;
  o.pass = errs[0] > errs[1] && errs[1] > errs[2] && ratio < 0.1;
  o.detail = fmt("sup|z - zbar|: %.4g (0.1), %.4g (0.05), %.4g (0.01); oscillation ratio at t = 8 eps: %.2f%%",
                 errs[0], errs[1], errs[2], 100.0 * ratio);
  return o;
}

Outcome cross_solver() {
  const SystemParams sys = fixtures::benchmark();
  const InitialCondition ic = fixtures::benchmark_ic();
  const double eps = 0.05, T = 1.0;
  const std::vector<int> Ks{100, 200, 400, 800};
  std::vector<double> errs;
  for (int K : Ks) {
    CharacteristicsOptions co;
    co.K = K;
    co.snapshot_times = {T};
    const Trajectory ch = simulate_full_characteristics(sys, eps, ic, T, 1e-3, co);
    const Trajectory up = simulate_full_upwind(sys, eps, ic, T, K);
    const ProfileSnapshot* a = ch.profile_at(T);
    const ProfileSnapshot& b = up.profiles.back();
    if (std::abs(a->t - T) > 1e-12 || std::abs(b.t - T) > 1e-12) return {false, "profile not stored at t = 1"};
    errs.push_back(profile_norms(Mat(b.y - a->y)).L2);
  }
  const double order = std::log2(errs.front() / errs.back()) / 3.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < Ks.size(); ++i) {
    const double x = std::log2(static_cast<double>(Ks[i])), y = std::log2(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(Ks.size());
  const double slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  Outcome o;
  o.pass = order >= 0.8;
  o.detail = fmt("L2 errors %.3g, %.3g, %.3g, ", errs[0], errs[1], errs[2]) +
             fmt("%.3g (K = 100..800); order log2(e100/e800)/3 = %.3f, least-squares slope %.3f", errs[3], order,
                 slope);
  return o;
}

Outcome bls_decay() {
  const SystemParams sys = fixtures::benchmark();
  const Trajectory tr = simulate_bls(sys, bls_initial(sys, fixtures::benchmark_ic()), 40.0, 1e-2);
  const DecayEstimate fit = decay_fit(tr, 10.0, 40.0);
  const double rel = std::abs(fit.nu - kHalfLn2) / kHalfLn2;
  return {rel <= 0.05, fmt("nu = %.6f vs ln2/2 = %.6f (relative error %.3g%%)", fit.nu, kHalfLn2, 100.0 * rel)};
}

}  // namespace

int main() {
  run(1, "boundary-layer roots of the benchmark", 5.0, benchmark_roots);
  run(2, "rho2 of the benchmark and Lyapunov falsification", 0.0, rho2_value);
  run(3, "reduced-order matrix and root", 0.0, reduced_system);
  run(4, "Schur determinant identity", 0.0, schur_identity);
  run(5, "root finder vs commensurate oracle", 60.0, oracle_equivalence);
  run(6, "spectral verdict vs fitted decay sign", 0.0, spectral_vs_temporal);
  run(7, "convergence to the reduced-order solution", 0.0, singular_perturbation);
  run(8, "upwind vs characteristics convergence order", 120.0, cross_solver);
  run(9, "boundary-layer decay rate", 0.0, bls_decay);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
