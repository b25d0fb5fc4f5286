#pragma once

// rho2(G1) = inf over positive diagonal D of |D G1 D^{-1}|_2, and the diagonal
// Lyapunov criterion it is equivalent to: some mu > 0 and positive diagonal Q
// make e^{-mu} Q L - G1^T Q L G1 positive definite iff rho2(G1) < 1. A
// minimizer D yields the witness Q L = D^2, e^{-mu} = (rho2 + tol)^2.

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <optional>
#include <random>
#include <sstream>

namespace fastslow {

struct Rho2Result {
  double infimum = 0.0;
  /// Diagonal of the best D found, normalized to d_1 = 1.
  Vec minimizer_diag;
  bool criterion_holds = false;
  std::optional<double> witness_mu;
  /// Q with Q L = D^2 for the speeds passed to rho2 (identity speeds if none).
  std::optional<Vec> witness_Q_diag;
};

struct Rho2Options {
  double tol = 1e-8;
  int random_starts = 8;
  std::uint64_t seed = 0x5eed2;
  /// Search box for log d_i.
  double log_bound = 40.0;
  int max_sweeps = 400;
  /// Fix d_1 = 1 and search m - 1 coordinates (otherwise all m).
  bool normalize = true;
};

/// |diag(e^x) G diag(e^-x)|_2.
inline double scaled_norm(const Mat& G, const Vec& log_d) {
  Mat S = G;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j) S(i, j) *= std::exp(log_d(i) - log_d(j));
  return spectral_norm(S);
}

namespace detail {

/// Golden-section minimization of a unimodal function on [a, b].
template <typename F>
double golden_section(F&& f, double a, double b, double xtol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc <= fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

inline std::pair<double, Vec> coordinate_descent(const Mat& G, Vec x, const Rho2Options& opts) {
  const auto m = x.size();
  const Eigen::Index first = opts.normalize ? 1 : 0;
  double best = scaled_norm(G, x);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double before = best;
    for (Eigen::Index i = first; i < m; ++i) {
      auto along = [&](double t) {
        Vec y = x;
        y(i) = t;
        return scaled_norm(G, y);
      };
      const double t = golden_section(along, -opts.log_bound, opts.log_bound, 1e-11);
      const double v = along(t);
      if (v < best) {
        best = v;
        x(i) = t;
      }
    }
    if (before - best <= 1e-3 * opts.tol) break;
  }
  return {best, x};
}

}  // namespace detail

/// Infimum of |D G1 D^{-1}|_2 by coordinate descent with golden-section line
/// searches over log d_i, from the identity and `random_starts` random starts.
inline Rho2Result rho2(const Mat& G1, const Vec& speeds, const Rho2Options& opts = {}) {
  const auto m = G1.rows();
  if (m < 1 || G1.cols() != m)
    throw Error(ErrorKind::DimensionMismatch, "rho2 needs a square matrix");
  if (speeds.size() != m)
    throw Error(ErrorKind::DimensionMismatch, "speeds must have length m");

  Rho2Result res;
  Vec best_x = Vec::Zero(m);
  double best = scaled_norm(G1, best_x);
  if (m > 1 && best > 0.0) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int start = 0; start <= opts.random_starts; ++start) {
      Vec x0 = Vec::Zero(m);
      if (start > 0)
        for (Eigen::Index i = opts.normalize ? 1 : 0; i < m; ++i) x0(i) = u(rng);
      auto [v, x] = detail::coordinate_descent(G1, x0, opts);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  }
  best_x.array() -= best_x(0);
  res.infimum = best;
  res.minimizer_diag = best_x.array().exp();
  res.criterion_holds = best + opts.tol < 1.0;
  if (res.criterion_holds) {
    res.witness_mu = -2.0 * std::log(best + opts.tol);
    res.witness_Q_diag = Vec(res.minimizer_diag.array().square() / speeds.array());
  }
  return res;
}

inline Rho2Result rho2(const Mat& G1, const Rho2Options& opts = {}) {
  return rho2(G1, Vec::Ones(G1.rows()), opts);
}

/// e^{-mu} Q L - G1^T Q L G1.
inline Mat lyapunov_matrix(const Mat& G1, const Vec& speeds, double mu, const Vec& Q_diag) {
  const Vec ql = Q_diag.cwiseProduct(speeds);
  return std::exp(-mu) * Mat(ql.asDiagonal()) - G1.transpose() * ql.asDiagonal() * G1;
}

inline double min_symmetric_eigenvalue(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct LyapunovResult {
  bool holds = false;
  std::optional<double> mu;
  std::optional<Vec> Q_diag;
  /// Smallest eigenvalue of the witness matrix when a witness exists.
  std::optional<double> min_eigenvalue;
};

/// Decides the diagonal Lyapunov criterion through rho2 and, when it holds,
/// builds and checks the witness (mu, Q) for the given speeds.
inline LyapunovResult lyapunov_criterion(const Mat& G1, const Vec& speeds, const Rho2Result& r, double tol = 1e-8) {
  LyapunovResult out;
  out.holds = r.criterion_holds;
  if (!out.holds) return out;
  if (speeds.size() != G1.rows())
    throw Error(ErrorKind::DimensionMismatch, "speeds must have length m");
  const double mu = -2.0 * std::log(r.infimum + tol);
  const Vec Q = r.minimizer_diag.array().square() / speeds.array();
  const double lmin = min_symmetric_eigenvalue(lyapunov_matrix(G1, speeds, mu, Q));
  if (!(lmin > 0.0)) {
    std::ostringstream os;
    os << "witness matrix has eigenvalue " << lmin << " (rho2 = " << r.infimum << ")";
    throw Error(ErrorKind::WitnessVerificationFailed, os.str());
  }
  out.mu = mu;
  out.Q_diag = Q;
  out.min_eigenvalue = lmin;
  return out;
}

/// Random search for a Lyapunov witness: draws mu ~ U(0, mu_max] and
/// log Q_i ~ U[-4, 4], and counts the draws whose matrix is positive definite.
inline int lyapunov_random_search(const Mat& G1, const Vec& speeds, int samples, std::uint64_t seed,
                                  double mu_max = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> umu(0.0, mu_max), ulog(-4.0, 4.0);
  int found = 0;
  for (int k = 0; k < samples; ++k) {
    double mu = umu(rng);
    if (mu <= 0.0) mu = mu_max;
    Vec Q(G1.rows());
    for (Eigen::Index i = 0; i < Q.size(); ++i) Q(i) = std::exp(ulog(rng));
    if (min_symmetric_eigenvalue(lyapunov_matrix(G1, speeds, mu, Q)) > 0.0) ++found;
  }
  return found;
}

}  // namespace fastslow
