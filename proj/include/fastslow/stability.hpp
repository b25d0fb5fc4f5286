#pragma once

// Spectral stability verdicts for the reduced-order (ros), boundary-layer (bls)
// and full systems, plus the numerical surrogates used to size search windows
// for the full system: a lower bound kappa on |char_bls| over a half plane and
// a radius R enclosing every full-system root in Re s >= -alpha.

#include "fastslow/characteristic.hpp"
#include "fastslow/error.hpp"
#include "fastslow/exp_polynomial.hpp"
#include "fastslow/roots.hpp"
#include "fastslow/system.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fastslow {

enum class Subsystem { ros, bls, full };
enum class Verdict { stable, unstable, inconclusive };

inline const char* to_string(Subsystem s) {
  switch (s) {
    case Subsystem::ros: return "ros";
    case Subsystem::bls: return "bls";
    case Subsystem::full: return "full";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct StabilityReport {
  Subsystem subsystem = Subsystem::ros;
  double eps = 0.0;
  std::vector<cplx> roots;
  /// Max real part over the roots found; -inf when none were found.
  double spectral_abscissa = -std::numeric_limits<double>::infinity();
  double alpha_margin = 0.0;
  Verdict verdict = Verdict::inconclusive;
  SearchWindow window{};
  /// Whether the window provably contains every root with Re s >= -alpha.
  bool window_certified = false;
  double kappa_estimate = 0.0;
  double radius = 0.0;
  std::vector<std::string> notes;
};

struct VerdictOptions {
  FindOptions find{};
  /// Grid points per unit length for kappa_estimate.
  double kappa_density = 40.0;
  /// Full-system windows are not searched beyond this radius.
  double radius_cap = 1e5;
  /// Overrides the default |Im s| extent of bls windows.
  std::optional<double> bls_im_max;
};

/// Phase-tracking step adapted to the oscillation rate of exponentials with
/// total delay `total_delay` along vertical edges.
inline double phase_step_for(double total_delay) {
  return std::min(0.25, 0.5 / (1.0 + total_delay));
}

/// Default bls window: Re from -alpha - 1 to the abscissa right of which the
/// exponential part has modulus <= 1/2; |Im| covering at least one period when
/// delays are commensurate.
inline SearchWindow default_bls_window(const SystemParams& sys, double alpha,
                                       std::optional<double> im_max_override = {}) {
  const ExpPolynomial p = bls_as_exp_polynomial(sys);
  SearchWindow w;
  w.re_min = -alpha - 1.0;
  w.re_max = p.has_terms() ? std::max(w.re_min + 1.0, p.tail_abscissa(0.5) + 0.5) : 1.0;
  if (im_max_override) {
    w.im_max = *im_max_override;
  } else if (!p.has_terms()) {
    w.im_max = 2.0 * kPi;
  } else if (auto q = p.commensurate_delay_base()) {
    w.im_max = std::max(4.0 * kPi * p.max_delay() / *q, 1.0001 * kPi / *q);
  } else {
    w.im_max = 4.0 * kPi * p.max_delay() / p.terms().front().delay;
  }
  return w;
}

/// Lower estimate of |char_bls(s)| on Re s >= -alpha_tilde: the minimum over
/// a grid on [-alpha_tilde, zeta] x [-im_max, im_max] (refined locally by
/// pattern search), combined with the bound |char_bls| >= 1/2 on Re s >= zeta.
/// This is a numerical surrogate, not a certified bound.
inline double kappa_estimate(const SystemParams& sys, double alpha_tilde, const SearchWindow& window,
                             double grid_density = 40.0) {
  const ExpPolynomial p = bls_as_exp_polynomial(sys);
  if (!p.has_terms()) return std::abs(p.constant_term());
  const double zeta = p.tail_abscissa(0.5);
  double kappa = std::abs(p.constant_term()) - p.tail_bound(std::max(zeta, -alpha_tilde));
  if (zeta <= -alpha_tilde) return kappa;

  double im_max = window.im_max;
  if (auto q = p.commensurate_delay_base()) im_max = std::min(im_max, kPi / *q);

  const int nx = std::max(2, static_cast<int>(std::ceil((zeta + alpha_tilde) * grid_density)) + 1);
  const int ny = std::max(2, static_cast<int>(std::ceil(2.0 * im_max * grid_density)) + 1);
  struct Sample { double value; cplx s; };
  std::vector<Sample> best;
  auto keep = [&](double v, cplx s) {
    best.push_back({v, s});
    std::sort(best.begin(), best.end(), [](const Sample& a, const Sample& b) { return a.value < b.value; });
    if (best.size() > 4) best.pop_back();
  };
  for (int i = 0; i < nx; ++i) {
    const double x = -alpha_tilde + (zeta + alpha_tilde) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const double y = -im_max + 2.0 * im_max * j / (ny - 1);
      const cplx s{x, y};
      const double v = std::abs(p(s));
      if (best.size() < 4 || v < best.back().value) keep(v, s);
    }
  }
  // Pattern search from the best grid points, clamped to the region.
  for (auto start : best) {
    cplx s = start.s;
    double v = start.value;
    double h = 1.0 / grid_density;
    while (h > 1e-10) {
      bool moved = false;
      for (cplx dir : {cplx{1, 0}, cplx{-1, 0}, cplx{0, 1}, cplx{0, -1}}) {
        cplx c = s + h * dir;
        c = {std::clamp(c.real(), -alpha_tilde, zeta), std::clamp(c.imag(), -im_max, im_max)};
        const double vc = std::abs(p(c));
        if (vc < v) {
          v = vc;
          s = c;
          moved = true;
        }
      }
      if (!moved) h *= 0.5;
    }
    kappa = std::min(kappa, v);
  }
  return kappa;
}

/// Radius R such that every root of s -> det M1(s, eps), eps <= eps_bar, with
/// Re s >= -alpha satisfies |s| <= R, given |char_bls(eps s)| >= kappa there:
///
///   R = |A|_1 + |B|_1 e^{eps_bar alpha / lambda_min}
///         * (C_m / kappa) (1 + |G1|_1 e^{eps_bar alpha / lambda_min})^{m-1} * |G2|_1
///
/// with the adjugate constant taken as C_m = m^{m/2}.
inline double root_search_radius(const SystemParams& sys, double alpha, double eps_bar, double kappa) {
  if (!(kappa > 0.0))
    throw Error(ErrorKind::PreconditionViolation, "root_search_radius needs kappa > 0");
  const int m = sys.m();
  const double growth = std::exp(eps_bar * alpha / sys.lambda_min());
  const double c_m = std::pow(static_cast<double>(m), 0.5 * m);
  const double inv_bound = (c_m / kappa) * std::pow(1.0 + norm1(sys.G1()) * growth, m - 1);
  return norm1(sys.A()) + norm1(sys.B()) * growth * inv_bound * norm1(sys.G2());
}

namespace detail {

inline double abscissa_of(const std::vector<cplx>& roots) {
  double a = -std::numeric_limits<double>::infinity();
  for (auto r : roots) a = std::max(a, r.real());
  return a;
}

/// Runs find_roots, nudging the window outward when a zero sits on its boundary.
inline std::vector<cplx> roots_with_retry(const Analytic& f, SearchWindow& w, const FindOptions& opts) {
  constexpr std::array<double, 5> nudges{0.0, 1.37e-4, 3.11e-4, 7.3e-4, 1.9e-3};
  const SearchWindow base = w;
  for (std::size_t k = 0; k < nudges.size(); ++k) {
    w = base;
    const double d = nudges[k] * (1.0 + base.re_max - base.re_min);
    w.re_min -= d;
    w.re_max += d;
    w.im_max += d;
    try {
      return find_roots(f, w, opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BoundaryZero || k + 1 == nudges.size()) throw;
    }
  }
  return {};
}

inline void classify(StabilityReport& r) {
  r.spectral_abscissa = abscissa_of(r.roots);
  if (r.spectral_abscissa >= 0.0) {
    r.verdict = Verdict::unstable;
  } else if (r.spectral_abscissa > -r.alpha_margin) {
    r.verdict = Verdict::inconclusive;
    r.notes.push_back("a root lies in -alpha < Re s < 0: stable margin alpha not met");
  } else {
    r.verdict = r.window_certified ? Verdict::stable : Verdict::inconclusive;
    if (!r.window_certified) r.notes.push_back("window not certified to hold every root with Re s >= -alpha");
  }
}

inline StabilityReport verdict_ros(const SystemParams& sys, double alpha) {
  StabilityReport r;
  r.subsystem = Subsystem::ros;
  r.alpha_margin = alpha;
  Eigen::EigenSolver<Mat> es(reduced_matrix(sys), false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r.roots.push_back(es.eigenvalues()(i));
  std::sort(r.roots.begin(), r.roots.end(), [](cplx a, cplx b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  double re_lo = -alpha, re_hi = 0.0, im = 0.0;
  for (auto z : r.roots) {
    re_lo = std::min(re_lo, z.real());
    re_hi = std::max(re_hi, z.real());
    im = std::max(im, std::abs(z.imag()));
  }
  r.window = {re_lo - 1.0, re_hi + 1.0, im + 1.0, 1e-12};
  r.window_certified = true;
  r.kappa_estimate = 1.0;
  r.notes.push_back("roots are the eigenvalues of the reduced matrix");
  classify(r);
  return r;
}

inline StabilityReport verdict_bls(const SystemParams& sys, double alpha, std::optional<SearchWindow> window,
                                   const VerdictOptions& opts) {
  StabilityReport r;
  r.subsystem = Subsystem::bls;
  r.alpha_margin = alpha;
  const ExpPolynomial p = bls_as_exp_polynomial(sys);
  r.window = window ? *window : default_bls_window(sys, alpha, opts.bls_im_max);
  r.window.check();
  if (r.window.re_min > -alpha)
    throw Error(ErrorKind::PreconditionViolation, "bls window must cover Re s >= -alpha");
  if (!p.has_terms()) {
    r.window_certified = true;
    r.kappa_estimate = 1.0;
    r.notes.push_back("char_bls is identically 1");
    classify(r);
    return r;
  }

  FindOptions fo = opts.find;
  fo.count.max_step = std::min(fo.count.max_step, phase_step_for(p.max_delay()));
  const Analytic f = [&p](cplx s) { return p(s); };
  r.roots = roots_with_retry(f, r.window, fo);

  const cplx c = p.constant_term();
  const bool right_ok = p.tail_bound(r.window.re_max) < std::abs(c);
  bool strip_ok = false;
  if (auto q = p.commensurate_delay_base()) {
    strip_ok = 2.0 * r.window.im_max >= 2.0 * kPi / *q;
    if (strip_ok) r.notes.push_back("commensurate delays: window covers a full period in Im s");
  }
  const bool half_plane_free = p.tail_bound(-alpha) < std::abs(c);
  if (half_plane_free) r.notes.push_back("no roots with Re s >= -alpha: exponential part bounded below |c| there");
  r.window_certified = half_plane_free || (right_ok && strip_ok);
  classify(r);
  return r;
}

inline StabilityReport verdict_full(const SystemParams& sys, double eps, double alpha,
                                    std::optional<SearchWindow> window, const VerdictOptions& opts) {
  StabilityReport r;
  r.subsystem = Subsystem::full;
  r.eps = eps;
  r.alpha_margin = alpha;

  // Lower bound on |char_bls(eps s)| over Re s >= -alpha, i.e. on |char_bls(w)| over Re w >= -eps alpha.
  const SearchWindow bls_window = default_bls_window(sys, eps * alpha, opts.bls_im_max);
  const StabilityReport bls = verdict_bls(sys, eps * alpha, bls_window, opts);
  bool kappa_valid = bls.verdict == Verdict::stable;
  if (kappa_valid) {
    r.kappa_estimate = kappa_estimate(sys, eps * alpha, bls_window, opts.kappa_density);
    kappa_valid = r.kappa_estimate > 0.0;
  }
  if (!kappa_valid) r.notes.push_back("char_bls(eps s) has roots with Re s >= -alpha: radius bound unavailable");

  double R = 0.0;
  if (kappa_valid) {
    R = root_search_radius(sys, alpha, eps, r.kappa_estimate);
    r.radius = R;
    r.notes.push_back("kappa and R are numerical surrogates (grid minimum, adjugate constant m^{m/2})");
  }
  const double reach = kappa_valid ? std::min(R, opts.radius_cap) : std::min(opts.radius_cap, 100.0 + 10.0 * norm1(sys.A()));
  if (window) {
    r.window = *window;
  } else {
    // Extend left of -alpha past the reduced-order poles so the reported
    // abscissa is informative even when no root reaches -alpha.
    double left = -alpha;
    Eigen::EigenSolver<Mat> es(reduced_matrix(sys), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) left = std::min(left, es.eigenvalues()(i).real());
    r.window = {2.0 * left - 2.0, reach + 1.0, reach + 1.0, 1e-12};
  }
  r.window.check();
  if (r.window.re_min > -alpha)
    throw Error(ErrorKind::PreconditionViolation, "full window must cover Re s >= -alpha");

  double total_delay = 0.0;
  for (int i = 0; i < sys.m(); ++i) total_delay += eps / sys.speeds()(i);
  FindOptions fo = opts.find;
  fo.count.max_step = std::min(fo.count.max_step, phase_step_for(total_delay));
  const Analytic f = [&sys, eps](cplx s) { return char_full(sys, s, eps); };
  r.roots = roots_with_retry(f, r.window, fo);

  r.window_certified = kappa_valid && R <= opts.radius_cap && r.window.re_max >= R && r.window.im_max >= R;
  classify(r);
  return r;
}

}  // namespace detail

/// Verdict on one subsystem. `eps` is required for the full system. The
/// default window of each subsystem is used when `window` is empty.
inline StabilityReport stability_verdict(const SystemParams& sys, Subsystem subsystem,
                                         std::optional<double> eps, double alpha,
                                         std::optional<SearchWindow> window = {},
                                         const VerdictOptions& opts = {}) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::PreconditionViolation, "alpha must be positive");
  switch (subsystem) {
    case Subsystem::ros: return detail::verdict_ros(sys, alpha);
    case Subsystem::bls: return detail::verdict_bls(sys, alpha, window, opts);
    case Subsystem::full:
      if (!eps || !(*eps > 0.0))
        throw Error(ErrorKind::PreconditionViolation, "full-system verdict needs eps > 0");
      return detail::verdict_full(sys, *eps, alpha, window, opts);
  }
  throw Error(ErrorKind::PreconditionViolation, "unknown subsystem");
}

struct EpsilonStarResult {
  /// Largest probed eps such that every probed eps up to it is stable with margin alpha.
  double eps_hat = 0.0;
  /// Every verdict computed, sorted by eps.
  std::vector<StabilityReport> reports;
};

/// Logarithmic probing of (0, eps_max] with 20 points from tol, then bisection
/// between the last stable probe of the leading stable run and the next probe.
inline EpsilonStarResult epsilon_star_search(const SystemParams& sys, double alpha, double eps_max, double tol,
                                             const VerdictOptions& opts = {}) {
  if (!(eps_max > tol) || !(tol > 0.0))
    throw Error(ErrorKind::PreconditionViolation, "need 0 < tol < eps_max");
  const StabilityReport ros = stability_verdict(sys, Subsystem::ros, {}, alpha);
  if (ros.verdict != Verdict::stable)
    throw Error(ErrorKind::PreconditionViolation, "reduced-order system is not stable with margin alpha");
  const StabilityReport bls = stability_verdict(sys, Subsystem::bls, {}, 1e-6, {}, opts);
  if (bls.verdict != Verdict::stable)
    throw Error(ErrorKind::PreconditionViolation, "boundary-layer system is not certified stable");

  constexpr int kProbes = 20;
  EpsilonStarResult out;
  std::vector<double> probes(kProbes);
  for (int k = 0; k < kProbes; ++k)
    probes[k] = tol * std::pow(eps_max / tol, static_cast<double>(k) / (kProbes - 1));
  probes.back() = eps_max;

  int last_stable = -1;
  bool run_broken = false;
  for (int k = 0; k < kProbes; ++k) {
    out.reports.push_back(stability_verdict(sys, Subsystem::full, probes[k], alpha, {}, opts));
    if (!run_broken && out.reports.back().verdict == Verdict::stable) {
      last_stable = k;
    } else {
      run_broken = true;
    }
  }
  if (last_stable < 0) {
    throw Error(ErrorKind::NoStableEpsilonFound,
                "smallest probed eps is not certified stable; check alpha and windows");
  }
  if (last_stable == kProbes - 1) {
    out.eps_hat = eps_max;
  } else {
    double lo = probes[last_stable], hi = probes[last_stable + 1];
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      out.reports.push_back(stability_verdict(sys, Subsystem::full, mid, alpha, {}, opts));
      (out.reports.back().verdict == Verdict::stable ? lo : hi) = mid;
    }
    out.eps_hat = lo;
  }
  std::sort(out.reports.begin(), out.reports.end(),
            [](const StabilityReport& a, const StabilityReport& b) { return a.eps < b.eps; });
  return out;
}

}  // namespace fastslow
