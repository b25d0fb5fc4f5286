#pragma once

// Data of the coupled system
//
//   z'(t)          = A z(t) + B y(1, t)
//   eps y_t + L y_x = 0                     on (0, 1)
//   y(0, t)        = G1 y(1, t) + G2 z(t)
//
// with L = diag(lambda_1, ..., lambda_m), lambda_i > 0, and I - G1 invertible.

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

namespace fastslow {

/// Unvalidated candidate system data, as read from a scenario or built in code.
struct SystemData {
  Mat A;       // n x n
  Mat B;       // n x m
  Mat G1;      // m x m
  Mat G2;      // m x n
  Vec lambda;  // m transport speeds

  bool operator==(const SystemData& o) const {
    auto same = [](const auto& a, const auto& b) {
      return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return same(A, o.A) && same(B, o.B) && same(G1, o.G1) && same(G2, o.G2) &&
           same(lambda, o.lambda);
  }
};

struct ValidationOptions {
  /// I - G1 is declared singular when |det(I - G1)| < det_rel_tol * (1 + |G1|_1).
  double det_rel_tol = 1e-12;
};

class SystemParams;
SystemParams validate(const SystemData& raw, const ValidationOptions& opts = {});

/// Validated, immutable system. Only obtainable through `validate`.
class SystemParams {
 public:
  int n() const { return static_cast<int>(d_.A.rows()); }
  int m() const { return static_cast<int>(d_.G1.rows()); }
  const Mat& A() const { return d_.A; }
  const Mat& B() const { return d_.B; }
  const Mat& G1() const { return d_.G1; }
  const Mat& G2() const { return d_.G2; }
  const Vec& speeds() const { return d_.lambda; }
  const SystemData& data() const { return d_; }

  double lambda_min() const { return d_.lambda.minCoeff(); }
  double lambda_max() const { return d_.lambda.maxCoeff(); }

  /// (I - G1)^{-1} G2, the slaving map z -> constant fast equilibrium.
  const Mat& slaving_map() const { return slaving_; }

  bool operator==(const SystemParams& o) const { return d_ == o.d_; }

 private:
  friend SystemParams validate(const SystemData&, const ValidationOptions&);
  SystemParams(SystemData d, Mat slaving)
      : d_(std::move(d)), slaving_(std::move(slaving)) {}

  SystemData d_;
  Mat slaving_;
};

namespace detail {
inline std::string dims(const Mat& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}
}  // namespace detail

inline SystemParams validate(const SystemData& raw, const ValidationOptions& opts) {
  const auto n = raw.A.rows();
  const auto m = raw.lambda.size();
  if (n < 1 || raw.A.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "A must be square with n >= 1, got " + detail::dims(raw.A));
  if (m < 1) throw Error(ErrorKind::DimensionMismatch, "need at least one transport speed");
  if (raw.B.rows() != n || raw.B.cols() != m)
    throw Error(ErrorKind::DimensionMismatch, "B must be n x m, got " + detail::dims(raw.B));
  if (raw.G1.rows() != m || raw.G1.cols() != m)
    throw Error(ErrorKind::DimensionMismatch, "G1 must be m x m, got " + detail::dims(raw.G1));
  if (raw.G2.rows() != m || raw.G2.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "G2 must be m x n, got " + detail::dims(raw.G2));

  if (!all_finite(raw.A) || !all_finite(raw.B) || !all_finite(raw.G1) ||
      !all_finite(raw.G2) || !raw.lambda.allFinite())
    throw Error(ErrorKind::NonFiniteEntry, "system data contains NaN or infinity");

  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(raw.lambda(i) > 0.0)) {
      std::ostringstream os;
      os << "lambda_" << (i + 1) << " = " << raw.lambda(i) << " is not positive";
      throw Error(ErrorKind::NonPositiveSpeed, os.str());
    }
  }

  const Mat I_minus_G1 = Mat::Identity(m, m) - raw.G1;
  const auto lu = I_minus_G1.partialPivLu();
  const double d = lu.determinant();
  const double threshold = opts.det_rel_tol * (1.0 + norm1(raw.G1));
  if (!(std::abs(d) >= threshold)) {
    std::ostringstream os;
    os << "|det(I - G1)| = " << std::abs(d) << " below " << threshold;
    throw Error(ErrorKind::SingularIminusG1, os.str());
  }
  Mat slaving = lu.solve(raw.G2);
  return SystemParams(raw, std::move(slaving));
}

/// Revalidating an already valid system is the identity.
inline SystemParams validate(const SystemParams& sys, const ValidationOptions& opts = {}) {
  return validate(sys.data(), opts);
}

/// A + B (I - G1)^{-1} G2.
inline Mat reduced_matrix(const SystemParams& sys) {
  return sys.A() + sys.B() * sys.slaving_map();
}

/// Constant-in-x fast equilibrium (I - G1)^{-1} G2 z.
inline Vec equilibrium_profile(const SystemParams& sys, const Vec& z) {
  if (z.size() != sys.n())
    throw Error(ErrorKind::DimensionMismatch, "z has wrong dimension");
  return sys.slaving_map() * z;
}

/// An initial profile [0, 1] -> R^m, either closed form or uniformly sampled
/// with piecewise-linear interpolation.
class Profile {
 public:
  using Evaluator = std::function<Vec(double)>;

  static Profile closed_form(int m, Evaluator f) {
    Profile p;
    p.m_ = m;
    p.eval_ = std::make_shared<const Evaluator>(std::move(f));
    return p;
  }

  /// samples is m x (N+1), column j taken at x = j / N. N >= 1.
  static Profile sampled(Mat samples) {
    if (samples.cols() < 2)
      throw Error(ErrorKind::DimensionMismatch, "sampled profile needs at least two grid points");
    Profile p;
    p.m_ = static_cast<int>(samples.rows());
    p.samples_ = std::make_shared<const Mat>(std::move(samples));
    return p;
  }

  static Profile constant(Vec v) {
    const int m = static_cast<int>(v.size());
    return closed_form(m, [v = std::move(v)](double) { return v; });
  }

  int dim() const { return m_; }
  bool is_sampled() const { return samples_ != nullptr; }
  const Mat* samples() const { return samples_.get(); }

  Vec operator()(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    if (eval_) return (*eval_)(x);
    const Mat& s = *samples_;
    const auto N = s.cols() - 1;
    const double pos = x * static_cast<double>(N);
    auto j = static_cast<Eigen::Index>(std::floor(pos));
    j = std::clamp<Eigen::Index>(j, 0, N - 1);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * s.col(j) + w * s.col(j + 1);
  }

  double component(int i, double x) const {
    if (eval_) return (*this)(x)(i);
    x = std::clamp(x, 0.0, 1.0);
    const Mat& s = *samples_;
    const auto N = s.cols() - 1;
    const double pos = x * static_cast<double>(N);
    auto j = static_cast<Eigen::Index>(std::floor(pos));
    j = std::clamp<Eigen::Index>(j, 0, N - 1);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * s(i, j) + w * s(i, j + 1);
  }

  /// Profile shifted by a constant vector: x -> p(x) + c.
  Profile shifted(const Vec& c) const {
    Profile base = *this;
    return closed_form(m_, [base, c](double x) { return Vec(base(x) + c); });
  }

 private:
  int m_ = 0;
  std::shared_ptr<const Evaluator> eval_;
  std::shared_ptr<const Mat> samples_;
};

struct InitialCondition {
  Vec z0;
  Profile y0;
  /// Whether y0(0) = G1 y0(1) + G2 z0 holds within compat_tol.
  bool compatible = false;
  double compat_tol = 1e-9;
};

inline double compatibility_defect(const SystemParams& sys, const Vec& z0, const Profile& y0) {
  const Vec r = y0(0.0) - sys.G1() * y0(1.0) - sys.G2() * z0;
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

inline InitialCondition make_initial_condition(const SystemParams& sys, Vec z0, Profile y0,
                                               double compat_tol = 1e-9) {
  if (z0.size() != sys.n())
    throw Error(ErrorKind::DimensionMismatch, "z0 has wrong dimension");
  if (y0.dim() != sys.m())
    throw Error(ErrorKind::DimensionMismatch, "y0 has wrong dimension");
  InitialCondition ic{std::move(z0), std::move(y0), false, compat_tol};
  const double scale = 1.0 + ic.y0(0.0).cwiseAbs().maxCoeff();
  ic.compatible = compatibility_defect(sys, ic.z0, ic.y0) <= compat_tol * scale;
  return ic;
}

/// Boundary-layer initial profile x -> y0(x) - (I - G1)^{-1} G2 z0.
inline Profile bls_initial(const SystemParams& sys, const InitialCondition& ic) {
  return ic.y0.shifted(-equilibrium_profile(sys, ic.z0));
}

}  // namespace fastslow
