#pragma once

// Arithmetic-geometric mean and Carlson's symmetric integral R_F, the two
// special functions behind every period and travel-time formula.

namespace sunshadow::elliptic {

// M(a, b) for a, b >= 0, iterated to machine convergence.
double agm(double a, double b);

// Carlson's R_F(x, y, z) by duplication; at most one argument may be zero.
double carlson_rf(double x, double y, double z);

// Incomplete integral of the first kind in parameter form,
// F(phi | m) = int_0^phi (1 - m sin^2 t)^(-1/2) dt, for 0 <= phi <= pi/2, m < 1.
double ellint_f(double phi, double m);

// Complete integral K(m) = pi / (2 M(1, sqrt(1 - m))).
double ellint_k(double m);

}  // namespace sunshadow::elliptic
