#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace fastslow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Induced 1-norm (maximum absolute column sum).
template <typename Derived>
double norm1(const Eigen::MatrixBase<Derived>& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().colwise().sum().maxCoeff();
}

/// Induced 2-norm as the square root of the largest eigenvalue of the Gram
/// matrix.
inline double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  const Mat gram = M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Determinant with the empty-matrix convention det() = 1.
inline cplx det(const CMat& M) {
  if (M.rows() == 0) return {1.0, 0.0};
  if (M.rows() == 1) return M(0, 0);
  if (M.rows() == 2) return M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  return M.partialPivLu().determinant();
}

inline bool all_finite(const Mat& M) { return M.size() == 0 || M.allFinite(); }

/// Best rational approximation p/q of x with q <= max_den, by continued
/// fractions. Returns nullopt if none is within rel_tol * |x|.
inline std::optional<std::pair<std::int64_t, std::int64_t>> rational_approx(
    double x, std::int64_t max_den, double rel_tol) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(r);
    if (a_d > 1e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    if (std::abs(x - static_cast<double>(p2) / static_cast<double>(q2)) <=
        rel_tol * std::abs(x)) {
      return std::make_pair(p2, q2);
    }
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = r - a_d;
    if (frac < 1e-300) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

/// Largest q > 0 such that every value is an integer multiple of q, when the
/// ratios to the smallest value are rationals with denominators <= max_den.
/// Values must be positive.
inline std::optional<double> commensurate_base(std::span<const double> values,
                                               std::int64_t max_den = 64,
                                               double rel_tol = 1e-10) {
  if (values.empty()) return std::nullopt;
  double vmin = values[0];
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    vmin = std::min(vmin, v);
  }
  std::int64_t lcm = 1;
  for (double v : values) {
    auto pq = rational_approx(v / vmin, max_den, rel_tol);
    if (!pq) return std::nullopt;
    lcm = std::lcm(lcm, pq->second);
    if (lcm > max_den * max_den) return std::nullopt;
  }
  return vmin / static_cast<double>(lcm);
}

}  // namespace fastslow
