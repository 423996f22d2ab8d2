#pragma once

// Coordinates, the canonical parabolic transform, fictitious time and the
// first integrals of the Kepler and Stark regimes.
//
// Units are fixed throughout the library: km, s, km^3/s^2.  Parabolic
// coordinates carry km^(1/2), their momenta km^(3/2)/s, fictitious time s/km.

#include <Eigen/Dense>

#include <cmath>

#include "sunshadow/error.hpp"

namespace sunshadow {

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec4T = Eigen::Matrix<Scalar, 4, 1>;

using Vec2 = Vec2T<double>;
using Vec4 = Vec4T<double>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

// Indices into the phase vector U = (p_u, p_v, u, v).
inline constexpr int kPu = 0;
inline constexpr int kPv = 1;
inline constexpr int kU = 2;
inline constexpr int kV = 3;

struct PhysParams {
  double mu = 398600.4418;      // km^3/s^2
  double f = 9.12e-9;           // km/s^2
  double R = 6378.1363;         // km, shadow half-width and collision radius
  double r_escape = 1.28008e8;  // km
  double tau_budget = 600.0;    // s/km per map application
  int switch_budget = 400;      // regime switches per map application
  double tol_abs = 1e-15;
  double tol_rel = 1e-15;
  // Fixed fictitious-time step of the Gauss integrator; 0 selects T_v/400
  // of the active ell_s context (see propagate::default_step).
  double step = 0.0;

  // Throws ConfigInvalid naming the first violated invariant.
  void validate() const;
};

enum class Branch { Plus, Minus };

template <typename Scalar = double>
struct CartesianState {
  Scalar x{}, y{}, px{}, py{}, t{};
};

template <typename Scalar = double>
struct ParabolicState {
  Scalar u{}, v{}, pu{}, pv{}, tau{}, t{};

  Vec4T<Scalar> phase() const { return {pu, pv, u, v}; }

  static ParabolicState from_phase(const Vec4T<Scalar>& U, Scalar tau = 0, Scalar t = 0) {
    return {U[kU], U[kV], U[kPu], U[kPv], tau, t};
  }
};

struct IntegralSet {
  double h_k = 0;   // Kepler energy
  double c_k = 0;   // angular momentum
  Vec2 A_k = Vec2::Zero();  // Laplace-Lenz vector
  double ell_k = 0;  // -A_k.x
  double h_s = 0;   // Stark energy
  double ell_s = 0;  // generalised Laplace-Lenz integral
};

template <typename Scalar>
ParabolicState<Scalar> to_parabolic(const CartesianState<Scalar>& s, Branch branch,
                                    Scalar tau = 0) {
  using std::abs;
  using std::hypot;
  using std::sqrt;
  const Scalar r = hypot(s.x, s.y);
  if (r == Scalar(0)) throw Error(ErrorCode::DegenerateOrigin, "to_parabolic at x = y = 0");

  // x + r loses all digits for x < 0, |y| << |x|; use (x + r)(r - x) = y^2.
  Scalar u = s.x >= 0 ? sqrt(s.x + r) : abs(s.y) / sqrt(r - s.x);
  Scalar v;
  if (u == Scalar(0)) {
    if (s.y != Scalar(0)) throw Error(ErrorCode::BranchUndefined, "u = 0 with y != 0");
    v = sqrt(2 * r);
  } else {
    v = s.y / u;
  }
  if (branch == Branch::Minus) {
    u = -u;
    v = -v;
  }
  ParabolicState<Scalar> out;
  out.u = u;
  out.v = v;
  out.pu = u * s.px + v * s.py;
  out.pv = -v * s.px + u * s.py;
  out.tau = tau;
  out.t = s.t;
  return out;
}

template <typename Scalar>
CartesianState<Scalar> to_cartesian(const ParabolicState<Scalar>& s) {
  const Scalar rho = s.u * s.u + s.v * s.v;
  if (rho == Scalar(0)) throw Error(ErrorCode::DegenerateOrigin, "to_cartesian at u = v = 0");
  CartesianState<Scalar> out;
  out.x = (s.u * s.u - s.v * s.v) / 2;
  out.y = s.u * s.v;
  out.px = (s.u * s.pu - s.v * s.pv) / rho;
  out.py = (s.v * s.pu + s.u * s.pv) / rho;
  out.t = s.t;
  return out;
}

// dt/dtau = u^2 + v^2 = 2r.
template <typename Scalar>
Scalar time_rate(const ParabolicState<Scalar>& s) {
  return s.u * s.u + s.v * s.v;
}

// Hamiltonians and integrals directly on the phase vector U = (p_u, p_v, u, v).
namespace phase {

template <typename Scalar>
Scalar kepler_energy(const Vec4T<Scalar>& U, double mu) {
  const Scalar rho = U[kU] * U[kU] + U[kV] * U[kV];
  return ((U[kPu] * U[kPu] + U[kPv] * U[kPv]) / 2 - 2 * Scalar(mu)) / rho;
}

template <typename Scalar>
Scalar stark_energy(const Vec4T<Scalar>& U, double mu, double f) {
  return kepler_energy(U, mu) - Scalar(f) * (U[kU] * U[kU] - U[kV] * U[kV]) / 2;
}

template <typename Scalar>
Scalar kepler_ell(const Vec4T<Scalar>& U, double mu) {
  const Scalar u2 = U[kU] * U[kU], v2 = U[kV] * U[kV];
  const Scalar rho = u2 + v2;
  return (U[kPu] * U[kPu] * v2 - U[kPv] * U[kPv] * u2) / (2 * rho) + Scalar(mu) * (u2 - v2) / rho;
}

template <typename Scalar>
Scalar stark_ell(const Vec4T<Scalar>& U, double mu, double f) {
  return kepler_ell(U, mu) - Scalar(f) / 2 * U[kU] * U[kU] * U[kV] * U[kV];
}

template <typename Scalar>
Scalar angular_momentum(const Vec4T<Scalar>& U) {
  return (U[kPv] * U[kU] - U[kPu] * U[kV]) / 2;
}

// Gradient of the Kepler (f = 0) or Stark energy with respect to U.
inline Vec4 energy_gradient(const Vec4& U, double mu, double f) {
  const double rho = U[kU] * U[kU] + U[kV] * U[kV];
  const double hk = kepler_energy(U, mu);
  Vec4 g;
  g[kPu] = U[kPu] / rho;
  g[kPv] = U[kPv] / rho;
  g[kU] = -2 * U[kU] * hk / rho - f * U[kU];
  g[kV] = -2 * U[kV] * hk / rho + f * U[kV];
  return g;
}

}  // namespace phase

IntegralSet integrals(const ParabolicState<double>& s, const PhysParams& p);

// Cartesian-side evaluation of the same integrals; used to cross-check the
// parabolic formulas.
IntegralSet cartesian_integrals(const CartesianState<double>& s, const PhysParams& p);

}  // namespace sunshadow
