#include "sunshadow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sunshadow::elliptic {

double agm(double a, double b) {
  if (a < 0 || b < 0) return std::numeric_limits<double>::quiet_NaN();
  if (a == 0 || b == 0) return 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < 64; ++i) {
    const double an = (a + b) / 2;
    const double bn = std::sqrt(a * b);
    a = an;
    b = bn;
    if (std::abs(a - b) <= 2 * eps * a) break;
  }
  return (a + b) / 2;
}

double carlson_rf(double x, double y, double z) {
  // Carlson (1995), Numer. Algorithms 10: duplication until the arguments
  // agree to (3 r)^(1/6), then the fifth-order series.
  constexpr double r = 1e-17;
  const double x0 = x, y0 = y;
  const double a0 = (x + y + z) / 3;
  double a = a0;
  const double q = std::pow(3 * r, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double pow4 = 1.0;
  for (int i = 0; i < 100 && pow4 * q >= std::abs(a); ++i) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lambda = sx * sy + sx * sz + sy * sz;
    x = (x + lambda) / 4;
    y = (y + lambda) / 4;
    z = (z + lambda) / 4;
    a = (a + lambda) / 4;
    pow4 /= 4;
  }
  const double X = (a0 - x0) * pow4 / a;
  const double Y = (a0 - y0) * pow4 / a;
  const double Z = -(X + Y);
  const double e2 = X * Y - Z * Z;
  const double e3 = X * Y * Z;
  return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / std::sqrt(a);
}

double ellint_f(double phi, double m) {
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  return s * carlson_rf(c * c, 1 - m * s * s, 1.0);
}

double ellint_k(double m) {
  return std::numbers::pi / (2 * agm(1.0, std::sqrt(1 - m)));
}

}  // namespace sunshadow::elliptic
