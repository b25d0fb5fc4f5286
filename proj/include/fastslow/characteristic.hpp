#pragma once

// Characteristic functions of the reduced-order, boundary-layer and full
// systems, and the Schur complement M1 relating them:
//
//   char_full(s, eps) = det M1(s, eps) * char_bls(eps s).

#include "fastslow/error.hpp"
#include "fastslow/numeric.hpp"
#include "fastslow/system.hpp"

#include <sstream>

namespace fastslow {

/// diag(exp(-s / lambda_i)).
inline CVec transport_factors(const SystemParams& sys, cplx s) {
  CVec e(sys.m());
  for (int i = 0; i < sys.m(); ++i) e(i) = std::exp(-s / sys.speeds()(i));
  return e;
}

inline cplx char_ros(const SystemParams& sys, cplx s) {
  CMat M = -reduced_matrix(sys).cast<cplx>();
  M.diagonal().array() += s;
  return det(M);
}

/// det(I - exp(-s L^{-1}) G1).
inline cplx char_bls(const SystemParams& sys, cplx s) {
  const CVec e = transport_factors(sys, s);
  CMat M = -(e.asDiagonal() * sys.G1().cast<cplx>());
  M.diagonal().array() += 1.0;
  return det(M);
}

/// The (n+m) x (n+m) matrix [[sI - A, B E], [G2, I - G1 E]] with
/// E = exp(-eps s L^{-1}).
inline CMat full_matrix(const SystemParams& sys, cplx s, double eps) {
  const int n = sys.n(), m = sys.m();
  const CVec e = transport_factors(sys, eps * s);
  CMat M(n + m, n + m);
  M.topLeftCorner(n, n) = -sys.A().cast<cplx>();
  M.topLeftCorner(n, n).diagonal().array() += s;
  M.topRightCorner(n, m) = sys.B().cast<cplx>() * e.asDiagonal();
  M.bottomLeftCorner(m, n) = sys.G2().cast<cplx>();
  M.bottomRightCorner(m, m) = -(sys.G1().cast<cplx>() * e.asDiagonal());
  M.bottomRightCorner(m, m).diagonal().array() += 1.0;
  return M;
}

inline cplx char_full(const SystemParams& sys, cplx s, double eps) {
  return det(full_matrix(sys, s, eps));
}

/// sI - A - B E (I - G1 E)^{-1} G2. At eps = 0 this is sI minus the reduced
/// matrix. Throws BlsSingular when |char_bls(eps s)| < bls_tol.
inline CMat m1(const SystemParams& sys, cplx s, double eps, double bls_tol = 1e-9) {
  const CVec e = transport_factors(sys, eps * s);
  CMat K = -(sys.G1().cast<cplx>() * e.asDiagonal());
  K.diagonal().array() += 1.0;
  const cplx dbls = det(K);
  if (!(std::abs(dbls) >= bls_tol)) {
    std::ostringstream os;
    os << "|char_bls(eps s)| = " << std::abs(dbls) << " at s = " << s << ", eps = " << eps;
    throw Error(ErrorKind::BlsSingular, os.str());
  }
  const CMat slaved = K.partialPivLu().solve(sys.G2().cast<cplx>());
  CMat M = -sys.A().cast<cplx>() - sys.B().cast<cplx>() * e.asDiagonal() * slaved;
  M.diagonal().array() += s;
  return M;
}

}  // namespace fastslow
