#pragma once

// Time-domain solvers.
//
// The characteristics solver integrates the neutral delay form of the system
// in (z, u) with u(t) = y(0, t):
//
//   z'(t) = A z(t) + B w(t),   w_i(t) = y_i(1, t) = u_i(t - eps / lambda_i)
//   u(t)  = G1 w(t) + G2 z(t)
//
// u is stored on a half-step grid so that every RK4 stage reads the history
// at a grid point whenever the step divides all delays. Profiles are rebuilt
// from y_i(x, t) = u_i(t - eps x / lambda_i), falling back to the initial
// profile before the characteristic through (x, t) reaches x = 0.

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"
#include "fastslow/system.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

namespace fastslow {

enum class SolverTag { characteristics, upwind, ros_exact, bls_exact };

inline const char* to_string(SolverTag t) {
  switch (t) {
    case SolverTag::characteristics: return "characteristics";
    case SolverTag::upwind: return "upwind";
    case SolverTag::ros_exact: return "ros-exact";
    case SolverTag::bls_exact: return "bls-exact";
  }
  return "?";
}

enum class NormKind { L1, L2, Linf };

struct GridInfo {
  int K = 0;
  double dt = 0.0;
  double eps = 0.0;
};

struct ProfileSnapshot {
  std::size_t step = 0;
  double t = 0.0;
  Mat y;  // m x (K+1), column j at x = j / K
};

struct ProfileNorms {
  double L1 = 0.0, L2 = 0.0, Linf = 0.0;
};

/// L^1, L^2 (trapezoid in x, p-norm across channels) and sup norms of a
/// profile sampled on a uniform grid of [0, 1].
inline ProfileNorms profile_norms(const Mat& Y) {
  ProfileNorms out;
  if (Y.size() == 0) return out;
  const auto K = Y.cols() - 1;
  const double dx = K > 0 ? 1.0 / static_cast<double>(K) : 1.0;
  double s1 = 0.0, s2 = 0.0;
  for (Eigen::Index j = 0; j <= K; ++j) {
    const double w = (K == 0) ? 1.0 : ((j == 0 || j == K) ? 0.5 * dx : dx);
    s1 += w * Y.col(j).cwiseAbs().sum();
    s2 += w * Y.col(j).squaredNorm();
  }
  out.L1 = s1;
  out.L2 = std::sqrt(s2);
  out.Linf = Y.cwiseAbs().maxCoeff();
  return out;
}

struct Trajectory {
  SolverTag solver = SolverTag::characteristics;
  GridInfo grid{};
  std::vector<double> times;
  std::vector<Vec> z;
  /// y(0, t) and y(1, t) at every step (empty for ros-exact).
  std::vector<Vec> y_boundary, y_outflow;
  std::vector<double> norm_z, norm_y_L1, norm_y_L2, norm_y_Linf;
  std::vector<ProfileSnapshot> profiles;

  std::size_t size() const { return times.size(); }

  double y_norm(std::size_t k, NormKind kind) const {
    switch (kind) {
      case NormKind::L1: return norm_y_L1[k];
      case NormKind::L2: return norm_y_L2[k];
      case NormKind::Linf: return norm_y_Linf[k];
    }
    return 0.0;
  }

  /// Profile stored at the step closest to t, if any.
  const ProfileSnapshot* profile_at(double t) const {
    const ProfileSnapshot* best = nullptr;
    for (const auto& p : profiles)
      if (!best || std::abs(p.t - t) < std::abs(best->t - t)) best = &p;
    return best;
  }

  Vec x_grid() const { return Vec::LinSpaced(grid.K + 1, 0.0, 1.0); }
};

namespace detail {

/// Chooses which steps keep a full profile: every max(1, floor(N / max_profiles))
/// steps, the last step, and the steps nearest requested times.
class SnapshotPlan {
 public:
  SnapshotPlan(std::size_t steps, std::size_t max_profiles, const std::vector<double>& times, double dt)
      : stride_(std::max<std::size_t>(1, max_profiles ? steps / max_profiles : steps + 1)), last_(steps) {
    for (double t : times) {
      if (t < 0.0 || dt <= 0.0) continue;
      const auto k = static_cast<std::size_t>(std::llround(t / dt));
      if (k <= steps) forced_.push_back(k);
    }
  }
  bool keep(std::size_t k) const {
    return k % stride_ == 0 || k == last_ || std::find(forced_.begin(), forced_.end(), k) != forced_.end();
  }

 private:
  std::size_t stride_;
  std::size_t last_;
  std::vector<std::size_t> forced_;
};

inline void record(Trajectory& tr, std::size_t k, double t, const Vec& z, const Vec& y0, const Mat& Y,
                   const SnapshotPlan& plan) {
  tr.times.push_back(t);
  tr.z.push_back(z);
  tr.y_boundary.push_back(y0);
  tr.y_outflow.push_back(Y.col(Y.cols() - 1));
  tr.norm_z.push_back(z.size() ? z.norm() : 0.0);
  const ProfileNorms pn = profile_norms(Y);
  tr.norm_y_L1.push_back(pn.L1);
  tr.norm_y_L2.push_back(pn.L2);
  tr.norm_y_Linf.push_back(pn.Linf);
  if (plan.keep(k)) tr.profiles.push_back({k, t, Y});
}

struct TransportModel {
  Mat A, B, G1, G2;
  Vec lambda;
};

}  // namespace detail

struct CharacteristicsOptions {
  /// Profile grid size used for norms and snapshots.
  int K = 200;
  /// Explicit Euler for z instead of RK4.
  bool euler_z = false;
  /// Cubic history interpolation when the delays are not commensurate.
  bool allow_interpolation = true;
  std::size_t max_profiles = 2000;
  std::vector<double> snapshot_times;
};

/// Step actually used by the characteristics solver for the requested one:
/// the largest q / r <= dt_requested, r integer, with q the common base of the
/// delays eps / lambda_i. Empty when the delays are not commensurate.
inline std::optional<double> aligned_step(const Vec& lambda, double eps, double dt_requested) {
  std::vector<double> delays(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) delays[i] = eps / lambda(i);
  const auto base = commensurate_base(delays);
  if (!base) return std::nullopt;
  const double r = std::max(1.0, std::ceil(*base / dt_requested - 1e-9));
  return *base / r;
}

namespace detail {

inline Trajectory run_characteristics(const TransportModel& M, double eps, const Vec& z0, const Profile& y0,
                                      double T, double dt_requested, const CharacteristicsOptions& opts,
                                      SolverTag tag) {
  if (!(eps > 0.0) || !(T >= 0.0) || !(dt_requested > 0.0))
    throw Error(ErrorKind::PreconditionViolation, "need eps > 0, T >= 0, dt > 0");
  if (opts.K < 1) throw Error(ErrorKind::PreconditionViolation, "profile grid needs K >= 1");
  const auto m = M.lambda.size();
  Vec delay(m);
  for (Eigen::Index i = 0; i < m; ++i) delay(i) = eps / M.lambda(i);

  const auto aligned = aligned_step(M.lambda, eps, dt_requested);
  double dt;
  if (aligned) {
    dt = *aligned;
  } else if (opts.allow_interpolation) {
    dt = std::min(dt_requested, 0.25 * delay.minCoeff());
  } else {
    throw Error(ErrorKind::IncompatibleStep, "delays eps / lambda_i are not commensurate and interpolation is off");
  }
  const double h = 0.5 * dt;
  const auto N = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  std::vector<long> lag(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) lag[i] = std::lround(delay(i) / h);

  Mat U(m, 2 * N + 1);
  U.setZero();

  // u_i(sigma) for 0 <= sigma, reading only columns <= known.
  auto u_at = [&](Eigen::Index i, double sigma, long known) -> double {
    const double pos = std::max(0.0, sigma / h);
    const double j = std::round(pos);
    if (std::abs(pos - j) <= 1e-9 * std::max(1.0, pos)) return U(i, std::min(static_cast<long>(j), known));
    if (known < 1) return U(i, 0);
    if (known < 3) {
      const long j0 = std::clamp(static_cast<long>(std::floor(pos)), 0L, known - 1);
      const double a = pos - j0;
      return (1.0 - a) * U(i, j0) + a * U(i, j0 + 1);
    }
    long j0 = static_cast<long>(std::floor(pos)) - 1;
    j0 = std::clamp(j0, 0L, known - 3);
    const double t = pos - static_cast<double>(j0);
    // Cubic Lagrange through nodes 0, 1, 2, 3 at offset t.
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    const double l1 = t * (t - 2) * (t - 3) / 2.0;
    const double l2 = -t * (t - 1) * (t - 3) / 2.0;
    const double l3 = t * (t - 1) * (t - 2) / 6.0;
    return l0 * U(i, j0) + l1 * U(i, j0 + 1) + l2 * U(i, j0 + 2) + l3 * U(i, j0 + 3);
  };

  // y(1, t) at half-index idx, reading history columns <= known.
  auto inflow = [&](long idx, long known) {
    Vec w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (aligned) {
        if (idx >= lag[i]) {
          w(i) = U(i, idx - lag[i]);
        } else {
          w(i) = y0.component(static_cast<int>(i), 1.0 - static_cast<double>(idx) * h * M.lambda(i) / eps);
        }
      } else {
        const double sigma = static_cast<double>(idx) * h - delay(i);
        if (sigma >= 0.0) {
          w(i) = u_at(i, sigma, known);
        } else {
          w(i) = y0.component(static_cast<int>(i), -sigma * M.lambda(i) / eps);
        }
      }
    }
    return w;
  };

  const int K = opts.K;
  auto profile = [&](long known, double t) {
    Mat Y(m, K + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (int j = 0; j <= K; ++j) {
        const double x = static_cast<double>(j) / K;
        const double travel = eps * x / M.lambda(i);
        const double sigma = t - travel;
        if (sigma >= -1e-12 * (1.0 + t)) {
          Y(i, j) = u_at(i, sigma, known);
        } else {
          Y(i, j) = y0.component(static_cast<int>(i), x - M.lambda(i) * t / eps);
        }
      }
    }
    return Y;
  };

  Trajectory tr;
  tr.solver = tag;
  tr.grid = {K, dt, eps};
  const SnapshotPlan plan(N, opts.max_profiles, opts.snapshot_times, dt);

  Vec z = z0;
  auto rhs = [&](const Vec& zz, const Vec& w) -> Vec { return M.A * zz + M.B * w; };

  Vec w0 = inflow(0, 0);
  U.col(0) = M.G1 * w0 + M.G2 * z;
  record(tr, 0, 0.0, z, U.col(0), profile(0, 0.0), plan);

  for (std::size_t k = 0; k < N; ++k) {
    const long i0 = static_cast<long>(2 * k);
    const Vec w1 = inflow(i0 + 1, i0);
    const Vec w2 = inflow(i0 + 2, i0);
    Vec z1, zmid;
    if (opts.euler_z) {
      z1 = z + dt * rhs(z, w0);
      zmid = 0.5 * (z + z1);
    } else {
      const Vec k1 = rhs(z, w0);
      const Vec k2 = rhs(z + h * k1, w1);
      const Vec k3 = rhs(z + h * k2, w1);
      const Vec k4 = rhs(z + dt * k3, w2);
      z1 = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const Vec f1 = rhs(z1, w2);
      zmid = 0.5 * (z + z1) + (dt / 8.0) * (k1 - f1);
    }
    U.col(i0 + 1) = M.G1 * w1 + M.G2 * zmid;
    U.col(i0 + 2) = M.G1 * w2 + M.G2 * z1;
    z = z1;
    w0 = w2;
    const double t = static_cast<double>(k + 1) * dt;
    record(tr, k + 1, t, z, U.col(i0 + 2), profile(i0 + 2, t), plan);
  }
  return tr;
}

}  // namespace detail

/// Full system by characteristics (neutral delay form).
inline Trajectory simulate_full_characteristics(const SystemParams& sys, double eps, const InitialCondition& ic,
                                                double T, double dt, const CharacteristicsOptions& opts = {}) {
  const detail::TransportModel M{sys.A(), sys.B(), sys.G1(), sys.G2(), sys.speeds()};
  return detail::run_characteristics(M, eps, ic.z0, ic.y0, T, dt, opts, SolverTag::characteristics);
}

/// Boundary-layer system in the fast time: the eps = 1, z-free case of the
/// characteristics solver with boundary recursion ybar(0) = G1 ybar(1).
inline Trajectory simulate_bls(const SystemParams& sys, const Profile& ybar0, double T, double dt,
                               const CharacteristicsOptions& opts = {}) {
  const auto m = sys.m();
  const detail::TransportModel M{Mat(0, 0), Mat(0, m), sys.G1(), Mat(m, 0), sys.speeds()};
  return detail::run_characteristics(M, 1.0, Vec(0), ybar0, T, dt, opts, SolverTag::bls_exact);
}

/// Reduced-order solution exp(t A_ros) z0 at t = 0, dt, 2 dt, ... <= T.
inline Trajectory simulate_ros(const SystemParams& sys, const Vec& z0, double T, double dt) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw Error(ErrorKind::PreconditionViolation, "need T >= 0, dt > 0");
  if (z0.size() != sys.n()) throw Error(ErrorKind::DimensionMismatch, "z0 has wrong dimension");
  const Mat Ar = reduced_matrix(sys);
  const auto N = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  Trajectory tr;
  tr.solver = SolverTag::ros_exact;
  tr.grid = {0, dt, 0.0};
  for (std::size_t k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Mat E = (t * Ar).exp();
    Vec z = E * z0;
    tr.times.push_back(t);
    tr.norm_z.push_back(z.norm());
    tr.z.push_back(std::move(z));
    tr.norm_y_L1.push_back(0.0);
    tr.norm_y_L2.push_back(0.0);
    tr.norm_y_Linf.push_back(0.0);
  }
  return tr;
}

struct UpwindOptions {
  /// Courant number max_i lambda_i dt / (eps dx) used when dt is not forced.
  double courant = 0.9;
  std::optional<double> dt;
  std::size_t max_profiles = 2000;
  std::vector<double> snapshot_times;
};

/// First-order upwind in x, explicit Euler in t for both y and z. The inflow
/// boundary y(0, t_{k+1}) = G1 y(1, t_k) + G2 z(t_{k+1}) is imposed after the
/// interior update, with the pre-update outflow value.
inline Trajectory simulate_full_upwind(const SystemParams& sys, double eps, const InitialCondition& ic, double T,
                                       int K, const UpwindOptions& opts = {}) {
  if (!(eps > 0.0) || !(T >= 0.0) || K < 1)
    throw Error(ErrorKind::PreconditionViolation, "need eps > 0, T >= 0, K >= 1");
  const double dx = 1.0 / K;
  const double lmax = sys.lambda_max();
  double dt;
  std::size_t N;
  if (opts.dt) {
    dt = *opts.dt;
    const double c = lmax * dt / (eps * dx);
    if (!(dt > 0.0) || c > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "Courant number " << c << " exceeds 1";
      throw Error(ErrorKind::CflViolation, os.str());
    }
    N = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  } else {
    if (!(opts.courant > 0.0) || opts.courant > 1.0)
      throw Error(ErrorKind::CflViolation, "Courant number must lie in (0, 1]");
    const double dt_cfl = opts.courant * eps * dx / lmax;
    N = static_cast<std::size_t>(std::ceil(T / dt_cfl - 1e-9));
    dt = N > 0 ? T / static_cast<double>(N) : dt_cfl;
  }

  const int m = sys.m();
  Mat Y(m, K + 1);
  for (int j = 0; j <= K; ++j) Y.col(j) = ic.y0(static_cast<double>(j) / K);
  Vec z = ic.z0;
  Vec c(m);
  for (int i = 0; i < m; ++i) c(i) = sys.speeds()(i) * dt / (eps * dx);

  Trajectory tr;
  tr.solver = SolverTag::upwind;
  tr.grid = {K, dt, eps};
  const detail::SnapshotPlan plan(N, opts.max_profiles, opts.snapshot_times, dt);
  detail::record(tr, 0, 0.0, z, Y.col(0), Y, plan);

  for (std::size_t k = 0; k < N; ++k) {
    const Vec outflow = Y.col(K);
    const Vec z1 = z + dt * (sys.A() * z + sys.B() * outflow);
    for (int i = 0; i < m; ++i) {
      for (int j = K; j >= 1; --j) Y(i, j) -= c(i) * (Y(i, j) - Y(i, j - 1));
    }
    Y.col(0) = sys.G1() * outflow + sys.G2() * z1;
    z = z1;
    detail::record(tr, k + 1, static_cast<double>(k + 1) * dt, z, Y.col(0), Y, plan);
  }
  return tr;
}

struct DecayEstimate {
  /// Fitted exponential rate; positive means decay.
  double nu = 0.0;
  double C = 1.0;
  double t_start = 0.0, t_end = 0.0;
  /// Root-mean-square residual of the log-linear fit.
  double residual = 0.0;
  /// Standard error of the fitted slope.
  double nu_stderr = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of ln(|z(t)| + |y(., t)|_p) = ln C' - nu t over samples
/// with t in [t_start, t_end]; C = C' / (|z0| + |y0|_p).
inline DecayEstimate decay_fit(const Trajectory& tr, double t_start, double t_end, NormKind norm = NormKind::L2) {
  if (!(t_start < t_end))
    throw Error(ErrorKind::DegenerateWindow, "fit window needs t_start < t_end");
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double t = tr.times[k];
    if (t < t_start - 1e-12 || t > t_end + 1e-12) continue;
    const double v = tr.norm_z[k] + tr.y_norm(k, norm);
    if (!(v > 1e-300)) throw Error(ErrorKind::DegenerateWindow, "norm vanishes in the fit window (dead-beat)");
    ts.push_back(t);
    ls.push_back(std::log(v));
  }
  if (ts.size() < 10) throw Error(ErrorKind::DegenerateWindow, "fewer than 10 samples in the fit window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    ml += ls[k];
  }
  mt /= n;
  ml /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxx += (ts[k] - mt) * (ts[k] - mt);
    sxy += (ts[k] - mt) * (ls[k] - ml);
  }
  const double slope = sxy / sxx;
  const double intercept = ml - slope * mt;
  double ssr = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = ls[k] - (intercept + slope * ts[k]);
    ssr += r * r;
  }
  DecayEstimate est;
  est.nu = slope == 0.0 ? 0.0 : -slope;
  const double initial = tr.norm_z.front() + tr.y_norm(0, norm);
  est.C = std::exp(intercept) / (initial > 0.0 ? initial : 1.0);
  est.t_start = ts.front();
  est.t_end = ts.back();
  est.residual = std::sqrt(ssr / n);
  est.nu_stderr = std::sqrt(ssr / std::max(1.0, n - 2.0) / sxx);
  est.samples = ts.size();
  return est;
}

/// sup_t |z(t) - zbar(t)|_2 over the common time window, with zbar linearly
/// interpolated at the times of `full`.
inline double compare_to_ros(const Trajectory& full, const Trajectory& ros) {
  if (full.size() == 0 || ros.size() == 0) return 0.0;
  const double t_hi = std::min(full.times.back(), ros.times.back());
  double err = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    const double t = full.times[k];
    if (t > t_hi + 1e-12) break;
    while (j + 1 < ros.size() && ros.times[j + 1] < t) ++j;
    Vec zbar;
    if (j + 1 < ros.size() && ros.times[j] <= t) {
      const double span = ros.times[j + 1] - ros.times[j];
      const double a = span > 0.0 ? (t - ros.times[j]) / span : 0.0;
      zbar = (1.0 - a) * ros.z[j] + a * ros.z[j + 1];
    } else {
      zbar = ros.z[j];
    }
    err = std::max(err, (full.z[k] - zbar).norm());
  }
  return err;
}

}  // namespace fastslow
