#pragma once

// Sun-shadow brake orbits symmetric about the x axis: a Kepler arc from
// (x0, 0) to the shadow exit on y = R, then a Stark arc that stops at a
// zero-velocity point when the u and v travel times agree.

#include <vector>

#include "sunshadow/core.hpp"

namespace sunshadow::brake {

struct EllWindow {
  double minus = 0, plus = 0;
};

// Interval of ell_s for which the exit construction is real for all
// x0 >= xi*/2.
EllWindow ell_window(const PhysParams& p);

struct ExitGeometry {
  double x_T = 0;
  double xiE = 0;  // u^2 at the exit point
  double x_E = 0;
  double hs = 0;   // Stark energy after the exit
};

// Throws ComplexXT when x0^2 < a_k R^2.
ExitGeometry exit_geometry(double ell_s, double x0, const PhysParams& p);

// Kepler ell and the ratio a_k = (mu + ell_k) / (mu - ell_k).
double kepler_ell_from_stark(double ell_s, const PhysParams& p);
double a_k(double ell_s, const PhysParams& p);

// Inverse of the decreasing map x0 -> hs on [xi*/2, inf).  Throws
// OutOfRegion when hs is not below hs(xi*/2).
double x0_from_hs(double ell_s, double hs, const PhysParams& p);

// Fictitious travel times from the exit to the u and v turning points.
// Throw OutOfRegion unless hs < h_s* and xi_E > xi_1.
double tau_u(double ell_s, double hs, const PhysParams& p);
double tau_v(double ell_s, double hs, const PhysParams& p);

// Lower end of the bracket on which tau_u - tau_v changes sign.
double hs_bar(double ell_s, const PhysParams& p);

// Bounds x0^- < x0* < x0^+ on the axis crossing of the brake orbit.
struct X0Bounds {
  double lower = 0, upper = 0;
  double C = 0, C1 = 0, C2 = 0;
};
X0Bounds x0_bounds(double ell_s, const PhysParams& p);

struct BrakeSolution {
  double ell_s = 0;
  double x0_star = 0;
  double hs_hat = 0;
  double hk = 0;
  double xiE = 0;
  double puE = 0;  // |p_u| at the exit
  double x_brake = 0, y_brake = 0;
  double residual_tau = 0;
  double tau_kepler = 0;  // axis to exit
  double tau_stark = 0;   // exit to brake point
  double hs_bar = 0, hs_star = 0;
  // Every hs root of tau_u = tau_v found on the scan grid, ascending.
  std::vector<double> roots;
};

inline constexpr double kGuardFraction = 1e-6;  // of h_s* - hs_bar
inline constexpr int kScanPoints = 64;

// Throws NoBracket if tau_u - tau_v does not change sign on
// [hs_bar, h_s* - guard].  The brake point comes from propagating the orbit.
BrakeSolution solve_brake(double ell_s, const PhysParams& p);

// Kepler state (p_u, p_v, u, v) on the positive x axis for a given x0.
ParabolicState<double> axis_state(double ell_s, double x0, const PhysParams& p);

}  // namespace sunshadow::brake
