#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "sunshadow/error.hpp"

namespace sunshadow::propagate {

namespace gauss3 {
inline const double s15 = std::sqrt(15.0);
inline const double c[3] = {0.5 - s15 / 10, 0.5, 0.5 + s15 / 10};
inline const double a[3][3] = {
    {5.0 / 36, 2.0 / 9 - s15 / 15, 5.0 / 36 - s15 / 30},
    {5.0 / 36 + s15 / 24, 2.0 / 9, 5.0 / 36 - s15 / 24},
    {5.0 / 36 + s15 / 30, 2.0 / 9 + s15 / 15, 5.0 / 36},
};
inline constexpr double b[3] = {5.0 / 18, 4.0 / 9, 5.0 / 18};
}  // namespace gauss3

// Increment y1 - y of one step.  Stage iterates are compared against the
// size of the increment, not of y, so that compensated accumulation of the
// increments keeps its extra digits.
template <int N, typename Rhs>
Eigen::Matrix<double, N, 1> gauss_increment(Rhs&& rhs, const Eigen::Matrix<double, N, 1>& y, double dtau,
                                            std::array<Eigen::Matrix<double, N, 1>, 3>* stages) {
  using Vec = Eigen::Matrix<double, N, 1>;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_iter = 60;

  const Vec k0 = rhs(y);
  std::array<Vec, 3> K{k0, k0, k0};
  std::array<Vec, 3> Y;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < 3; ++i)
      Y[i] = y + dtau * (gauss3::a[i][0] * K[0] + gauss3::a[i][1] * K[1] + gauss3::a[i][2] * K[2]);
    double delta = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec kn = rhs(Y[i]);
      for (int j = 0; j < N; ++j) {
        const double scale = std::abs(dtau * kn[j]) + eps * std::abs(y[j]);
        if (scale > 0) delta = std::max(delta, std::abs(dtau * (kn[j] - K[i][j])) / scale);
      }
      K[i] = kn;
    }
    if (delta <= eps || (delta < 1e-10 && delta >= prev)) {
      converged = true;
      break;
    }
    prev = delta;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "Gauss stage iteration did not converge");
  if (stages) {
    for (int i = 0; i < 3; ++i)
      (*stages)[i] = y + dtau * (gauss3::a[i][0] * K[0] + gauss3::a[i][1] * K[1] + gauss3::a[i][2] * K[2]);
  }
  return dtau * (gauss3::b[0] * K[0] + gauss3::b[1] * K[1] + gauss3::b[2] * K[2]);
}

template <int N, typename Rhs>
Eigen::Matrix<double, N, 1> gauss_step(Rhs&& rhs, const Eigen::Matrix<double, N, 1>& y, double dtau,
                                       std::array<Eigen::Matrix<double, N, 1>, 3>* stages) {
  return y + gauss_increment<N>(std::forward<Rhs>(rhs), y, dtau, stages);
}

}  // namespace sunshadow::propagate
