#pragma once

// Closed-form structure of the pure Stark problem in parabolic coordinates:
// the quartics U(u), V(v), the (ell_s, h_s / sqrt f) region taxonomy,
// zero-velocity points, fictitious-time periods and the brake-orbit family.

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "sunshadow/core.hpp"

namespace sunshadow::stark {

// Roots of U and V in xi = u^2 and eta = v^2.  Complex pairs are kept.
struct QuarticStructure {
  double ell_s = 0, h_s = 0;
  std::complex<double> xi1, xi2, eta1, eta2;
  bool xi_real = true, eta_real = true;
  // Radicands h^2/f^2 - 2(mu+ell)/f and h^2/f^2 + 2(mu-ell)/f.
  double xi_radicand = 0, eta_radicand = 0;
  // Non-negative square roots of the real non-negative root values.
  std::optional<double> u1, u2, v1, v2;

  // U(u) = f u^4 + 2 h u^2 + 2(mu + ell) and V(v) = -f v^4 + 2 h v^2 + 2(mu - ell).
  double U(double u, const PhysParams& p) const;
  double V(double v, const PhysParams& p) const;
};

QuarticStructure quartic_structure(double ell_s, double h_s, const PhysParams& p);

enum class Region {
  I,
  II,
  III,
  IV,
  B_I_II,
  B_I_IV,
  B_II_IV,
  B_II_III,
  B_II_edge,
  B_IV_edge,
  B_III_edge,
  P_I_II_IV,
  P_II_III,
  P_II_IV,
  Forbidden,
};

std::string_view to_string(Region r);

struct RegionClass {
  Region label = Region::Forbidden;
  bool bounded_u_branch_exists = false;
};

// Relative tolerance in (ell_s / mu, h_s / sqrt(f mu)) units under which a
// point counts as lying on a region boundary.
inline constexpr double kBoundaryTol = 1e-9;

RegionClass classify(double ell_s, double h_s, const PhysParams& p, double tol = kBoundaryTol);

enum class RootKind { Positive, Zero, Negative, Complex };

struct RootPattern {
  RootKind xi1, xi2, eta1, eta2;
  bool xi_double = false, eta_double = false;
  bool operator==(const RootPattern&) const = default;
};

// Reality/sign pattern read off the computed roots, snapping round-off
// sized quantities to zero.
RootPattern root_pattern(const QuarticStructure& q, const PhysParams& p, double tol = kBoundaryTol);

// Pattern the taxonomy prescribes for a label; empty for Forbidden.
std::optional<RootPattern> expected_pattern(Region r);

struct Point2 {
  double x = 0, y = 0;
};

// Two points in region I, four in region IV, none elsewhere.
std::vector<Point2> zero_velocity_points(double ell_s, double h_s, const PhysParams& p);

// Periods in fictitious time via the arithmetic-geometric mean.
double period_v(double ell_s, double h_s, const PhysParams& p);
double period_u(double ell_s, double h_s, const PhysParams& p);  // region IV, bounded branch

struct Periods {
  double T_u = 0, T_v = 0;
};
Periods periods(double ell_s, double h_s, const PhysParams& p);

struct BrakeFamily {
  double u_star = 0;
  double xi_star = 0;
  double hs_star = 0;
  double eta1_star = 0;
  double v1_star = 0;
  Mat2 reduced_jacobian = Mat2::Zero();  // at (u, p_u) = (u*, 0)
};

BrakeFamily brake_family(double ell_s, const PhysParams& p);

// Jacobian of the Hamiltonian vector field of the reduced u-Hamiltonian
// p_u^2 / (2u^2) - (2(mu + ell) + f u^4) / (2u^2), rows (u', p_u'), columns (u, p_u).
Mat2 reduced_u_jacobian(double ell_s, double u, double pu, const PhysParams& p);

// Energy with T_v / T_u = num / den inside (h_lo, h_hi), h_hi <= h_s*.
// Throws InvalidRatio for num / den >= 1 and NotFound without a sign change.
double commensurable_energy(double ell_s, int num, int den, const PhysParams& p,
                            std::optional<double> h_lo = std::nullopt,
                            std::optional<double> h_hi = std::nullopt);

}  // namespace sunshadow::stark
