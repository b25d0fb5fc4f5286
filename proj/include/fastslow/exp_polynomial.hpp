#pragma once

#include "fastslow/numeric.hpp"
#include "fastslow/system.hpp"

#include <algorithm>
#include <vector>

namespace fastslow {

struct ExpTerm {
  double coeff;
  double delay;
  bool operator==(const ExpTerm&) const = default;
};

/// f(s) = c + sum_j a_j exp(-s d_j), kept with strictly increasing delays,
/// zero coefficients removed and zero delays folded into c.
class ExpPolynomial {
 public:
  explicit ExpPolynomial(cplx constant = 1.0, std::vector<ExpTerm> terms = {},
                         double merge_rel_tol = 1e-12, double zero_tol = 1e-13)
      : constant_(constant) {
    std::sort(terms.begin(), terms.end(),
              [](const ExpTerm& a, const ExpTerm& b) { return a.delay < b.delay; });
    double scale = std::abs(constant);
    for (const auto& t : terms) scale = std::max(scale, std::abs(t.coeff));
    for (const auto& t : terms) {
      if (t.delay <= 0.0) {
        constant_ += t.coeff;
        continue;
      }
      if (!terms_.empty() &&
          std::abs(t.delay - terms_.back().delay) <= merge_rel_tol * t.delay) {
        terms_.back().coeff += t.coeff;
      } else {
        terms_.push_back(t);
      }
    }
    std::erase_if(terms_, [&](const ExpTerm& t) {
      return std::abs(t.coeff) <= zero_tol * std::max(1.0, scale);
    });
  }

  cplx constant_term() const { return constant_; }
  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool has_terms() const { return !terms_.empty(); }
  double max_delay() const { return terms_.empty() ? 0.0 : terms_.back().delay; }

  cplx operator()(cplx s) const {
    cplx acc = constant_;
    for (const auto& t : terms_) acc += t.coeff * std::exp(-s * t.delay);
    return acc;
  }

  /// sum_j |a_j| exp(-x d_j), the modulus bound of the exponential part on Re s = x.
  double tail_bound(double x) const {
    double acc = 0.0;
    for (const auto& t : terms_) acc += std::abs(t.coeff) * std::exp(-x * t.delay);
    return acc;
  }

  /// Smallest x with tail_bound(x) <= bound (bound > 0). On Re s >= x, the
  /// modulus of f is at least |c| - bound.
  double tail_abscissa(double bound) const {
    if (terms_.empty()) return -1e300;
    double lo = -1.0, hi = 1.0;
    while (tail_bound(lo) <= bound) lo *= 2.0;
    while (tail_bound(hi) > bound) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail_bound(mid) > bound ? lo : hi) = mid;
    }
    return hi;
  }

  /// Common base q when every delay is an integer multiple of q.
  std::optional<double> commensurate_delay_base() const {
    std::vector<double> d;
    for (const auto& t : terms_) d.push_back(t.delay);
    return commensurate_base(d);
  }

  bool operator==(const ExpPolynomial&) const = default;

 private:
  cplx constant_;
  std::vector<ExpTerm> terms_;
};

/// Expands det(I - exp(-s L^{-1}) G1) as 1 + sum over nonempty row subsets S of
/// (-1)^|S| det(G1[S,S]) exp(-s sum_{i in S} 1/lambda_i).
inline ExpPolynomial bls_as_exp_polynomial(const SystemParams& sys) {
  const int m = sys.m();
  std::vector<ExpTerm> terms;
  const std::uint32_t subsets = 1u << m;
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    std::vector<int> idx;
    double delay = 0.0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        idx.push_back(i);
        delay += 1.0 / sys.speeds()(i);
      }
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Mat minor(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c) minor(r, c) = sys.G1()(idx[r], idx[c]);
    const double principal = k == 1 ? minor(0, 0) : minor.determinant();
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    terms.push_back({sign * principal, delay});
  }
  return ExpPolynomial(1.0, std::move(terms));
}

}  // namespace fastslow
