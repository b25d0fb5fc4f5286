#pragma once

#include "fastslow/system.hpp"

#include <random>

namespace fixtures {

using namespace fastslow;

inline SystemData benchmark_data() {
  SystemData d;
  d.A = Mat::Constant(1, 1, 2.0);
  d.B = Mat(1, 2);
  d.B << 1.0, 2.0;
  d.G1 = Mat(2, 2);
  d.G1 << 1.0, -2.0, 0.25, -0.5;
  d.G2 = Mat(2, 1);
  d.G2 << -1.0, 0.0;
  d.lambda = Vec(2);
  d.lambda << 1.0, 0.5;
  return d;
}

inline SystemParams benchmark() { return validate(benchmark_data()); }

inline Profile benchmark_y0() {
  return Profile::closed_form(2, [](double x) {
    Vec v(2);
    v << -std::cos(2.5 * kPi * x), 0.0;
    return v;
  });
}

inline InitialCondition benchmark_ic() {
  return make_initial_condition(benchmark(), Vec::Ones(1), benchmark_y0());
}

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = u(rng);
  return M;
}

/// Random valid system with n slow and m fast states.
inline SystemParams random_system(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> speed(0.3, 2.0);
  for (;;) {
    SystemData d;
    d.A = random_matrix(rng, n, n, 2.0);
    d.B = random_matrix(rng, n, m);
    d.G1 = random_matrix(rng, m, m, 0.9);
    d.G2 = random_matrix(rng, m, n);
    d.lambda = Vec(m);
    for (int i = 0; i < m; ++i) d.lambda(i) = speed(rng);
    try {
      return validate(d);
    } catch (const Error&) {
    }
  }
}

}  // namespace fixtures
