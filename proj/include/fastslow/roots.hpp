#pragma once

// Zero location for analytic functions on rectangles of the complex plane.
//
// count_roots evaluates the winding number of f along the rectangle boundary
// by phase tracking: each boundary edge is sampled at spacing <= max_step and
// any sub-segment whose phase increment, or that of either half, reaches pi/2
// is halved until none does. find_roots recursively bisects rectangles on the counts and polishes
// isolated zeros with Newton's method on a central-difference derivative.

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <sstream>
#include <vector>

namespace fastslow {

using Analytic = std::function<cplx(cplx)>;

struct Rect {
  double re_min, re_max, im_min, im_max;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(cplx s, double slack = 0.0) const {
    return s.real() >= re_min - slack && s.real() <= re_max + slack &&
           s.imag() >= im_min - slack && s.imag() <= im_max + slack;
  }
};

/// Finite stand-in for a vertical strip: re_min <= Re s <= re_max, |Im s| <= im_max.
struct SearchWindow {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_max = 10.0;
  /// Newton polishing stops once the step falls below tol * (1 + |s|).
  double tol = 1e-12;

  Rect rect() const { return {re_min, re_max, -im_max, im_max}; }

  void check() const {
    if (!(re_min < re_max) || !(im_max > 0.0) || !(tol > 0.0))
      throw Error(ErrorKind::PreconditionViolation,
                  "search window needs re_min < re_max, im_max > 0, tol > 0");
  }
};

struct CountOptions {
  /// Initial sampling spacing along each edge.
  double max_step = 0.05;
  /// |f| at or below this on the boundary is treated as a boundary zero.
  double zero_tol = 1e-10;
  /// Halvings allowed per initial sub-segment before giving up.
  int max_halvings = 32;
};

namespace detail {

inline cplx eval_checked(const Analytic& f, cplx s, const CountOptions& opts) {
  const cplx v = f(s);
  if (!(std::abs(v) > opts.zero_tol) || !std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    std::ostringstream os;
    os << "|f| = " << std::abs(v) << " at boundary point " << s;
    throw Error(ErrorKind::BoundaryZero, os.str());
  }
  return v;
}

// A segment is accepted only when both halves and the whole move the phase by
// less than pi/2; a near pass by a zero of high order can otherwise alias a
// large winding into a small endpoint difference.
inline double segment_phase(const Analytic& f, cplx a, cplx fa, cplx b, cplx fb, int depth,
                            const CountOptions& opts) {
  const cplx mid = 0.5 * (a + b);
  const cplx fm = eval_checked(f, mid, opts);
  const double d1 = std::arg(fm / fa), d2 = std::arg(fb / fm);
  if (std::abs(d1) < 0.5 * kPi && std::abs(d2) < 0.5 * kPi && std::abs(d1 + d2) < 0.5 * kPi) return d1 + d2;
  if (depth >= opts.max_halvings) {
    std::ostringstream os;
    os << "phase tracking did not resolve between " << a << " and " << b;
    throw Error(ErrorKind::BoundaryZero, os.str());
  }
  return segment_phase(f, a, fa, mid, fm, depth + 1, opts) +
         segment_phase(f, mid, fm, b, fb, depth + 1, opts);
}

inline double edge_phase(const Analytic& f, cplx a, cplx b, const CountOptions& opts) {
  const double len = std::abs(b - a);
  const int pieces = std::max(4, static_cast<int>(std::ceil(len / opts.max_step)));
  double total = 0.0;
  cplx p = a;
  cplx fp = eval_checked(f, p, opts);
  for (int k = 1; k <= pieces; ++k) {
    const cplx q = (k == pieces) ? b : a + (b - a) * (static_cast<double>(k) / pieces);
    const cplx fq = eval_checked(f, q, opts);
    total += segment_phase(f, p, fp, q, fq, 0, opts);
    p = q;
    fp = fq;
  }
  return total;
}

}  // namespace detail

/// Number of zeros of f inside rect, with multiplicity.
inline int count_roots(const Analytic& f, const Rect& rect, const CountOptions& opts = {}) {
  if (!(rect.re_min < rect.re_max) || !(rect.im_min < rect.im_max))
    throw Error(ErrorKind::PreconditionViolation, "degenerate rectangle");
  const cplx c0{rect.re_min, rect.im_min}, c1{rect.re_max, rect.im_min};
  const cplx c2{rect.re_max, rect.im_max}, c3{rect.re_min, rect.im_max};
  const double total = detail::edge_phase(f, c0, c1, opts) + detail::edge_phase(f, c1, c2, opts) +
                       detail::edge_phase(f, c2, c3, opts) + detail::edge_phase(f, c3, c0, opts);
  const double winding = total / (2.0 * kPi);
  const double rounded = std::round(winding);
  if (std::abs(winding - rounded) > 0.05 || rounded < 0.0) {
    std::ostringstream os;
    os << "non-integer winding " << winding;
    throw Error(ErrorKind::BoundaryZero, os.str());
  }
  return static_cast<int>(rounded);
}

struct FindOptions {
  CountOptions count{};
  int max_depth = 80;
  /// Rectangles holding several zeros are treated as one multiple zero once
  /// their larger side is below cluster_size * (1 + |center|).
  double cluster_size = 1e-6;
  int max_newton = 80;
};

namespace detail {

/// Central-difference derivative with step 1e-7 (1 + |s|).
inline cplx numeric_derivative(const Analytic& f, cplx s) {
  const double h = 1e-7 * (1.0 + std::abs(s));
  return (f(s + h) - f(s - h)) / (2.0 * h);
}

struct NewtonResult {
  cplx root;
  bool converged;
};

inline NewtonResult newton(const Analytic& f, cplx s, int multiplicity, double tol, int max_iter) {
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const cplx v = f(s);
    if (v == cplx{0.0, 0.0}) return {s, true};
    const cplx d = numeric_derivative(f, s);
    if (d == cplx{0.0, 0.0} || !std::isfinite(std::abs(d))) break;
    const cplx step = static_cast<double>(multiplicity) * v / d;
    if (!std::isfinite(std::abs(step))) break;
    s -= step;
    last_step = std::abs(step);
    if (last_step <= tol * (1.0 + std::abs(s))) return {s, true};
  }
  return {s, last_step <= 1e3 * tol * (1.0 + std::abs(s))};
}

/// A cluster of `count` zeros reported as one zero of that multiplicity.
inline void emit_cluster(const Analytic& f, const Rect& rect, int count, double tol, const FindOptions& opts,
                         std::vector<cplx>& out) {
  const cplx c = rect.center();
  const double size = std::max(rect.width(), rect.height());
  const auto r = newton(f, c, count, std::max(tol, 1e-10), opts.max_newton);
  const cplx root = (r.converged && rect.contains(r.root, size)) ? r.root : c;
  for (int k = 0; k < count; ++k) out.push_back(root);
}

inline constexpr std::array<double, 7> kSplitFractions{0.5, 0.5137, 0.4771, 0.5419, 0.4523, 0.5861, 0.4129};

inline void search(const Analytic& f, const Rect& rect, int count, int depth, double tol,
                   const FindOptions& opts, std::vector<cplx>& out) {
  if (count == 0) return;
  const cplx c = rect.center();
  const double size = std::max(rect.width(), rect.height());

  if (count == 1) {
    const auto r = newton(f, c, 1, tol, opts.max_newton);
    if (r.converged && rect.contains(r.root, 1e-12 * (1.0 + std::abs(r.root)))) {
      out.push_back(r.root);
      return;
    }
  } else if (size < opts.cluster_size * (1.0 + std::abs(c))) {
    emit_cluster(f, rect, count, tol, opts, out);
    return;
  }

  if (depth >= opts.max_depth) {
    std::ostringstream os;
    os << "subdivision depth exceeded near " << c << " with " << count << " zeros";
    throw Error(ErrorKind::NonConvergence, os.str());
  }

  const bool split_re = rect.width() >= rect.height();
  bool only_boundary_zeros = true;
  for (double frac : kSplitFractions) {
    Rect lo = rect, hi = rect;
    if (split_re) {
      const double x = rect.re_min + frac * rect.width();
      lo.re_max = x;
      hi.re_min = x;
    } else {
      const double y = rect.im_min + frac * rect.height();
      lo.im_max = y;
      hi.im_min = y;
    }
    int n_lo = 0, n_hi = 0;
    try {
      n_lo = count_roots(f, lo, opts.count);
      n_hi = count_roots(f, hi, opts.count);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BoundaryZero) continue;
      throw;
    }
    only_boundary_zeros = false;
    if (n_lo + n_hi != count) continue;
    search(f, lo, n_lo, depth + 1, tol, opts, out);
    search(f, hi, n_hi, depth + 1, tol, opts, out);
    return;
  }
  // Every split line passes within zero_tol of f = 0: a multiple zero that
  // the counter can no longer separate.
  if (count > 1 && only_boundary_zeros) {
    emit_cluster(f, rect, count, tol, opts, out);
    return;
  }
  std::ostringstream os;
  os << "no admissible split of rectangle centered at " << c;
  throw Error(ErrorKind::NonConvergence, os.str());
}

}  // namespace detail

/// All zeros of f in rect (with multiplicity), sorted by imaginary then real part.
inline std::vector<cplx> find_roots(const Analytic& f, const Rect& rect, double tol = 1e-12,
                                    const FindOptions& opts = {}) {
  const int total = count_roots(f, rect, opts.count);
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(total));
  detail::search(f, rect, total, 0, tol, opts, out);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return out;
}

inline std::vector<cplx> find_roots(const Analytic& f, const SearchWindow& window,
                                    const FindOptions& opts = {}) {
  window.check();
  return find_roots(f, window.rect(), window.tol, opts);
}

}  // namespace fastslow
