#pragma once

// Stark u and v periods by adaptive quadrature, with the turning points
// from the separated quadratics solved in long double.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "sunshadow/core.hpp"

namespace oracle {

struct TurningPoints {
  double xi1, xi2, eta1, eta2;
};

// xi^2 + 2 (h/f) xi + 2 (mu + ell)/f = 0 and eta^2 - 2 (h/f) eta - 2 (mu - ell)/f = 0,
// for h < 0 with real xi roots.
inline TurningPoints turning_points(double ell, double hs, const sunshadow::PhysParams& p) {
  using ld = long double;
  const ld hf = static_cast<ld>(hs) / p.f;
  const ld cu = 2 * (static_cast<ld>(p.mu) + ell) / p.f, cv = 2 * (static_cast<ld>(p.mu) - ell) / p.f;
  const ld xi1 = -hf + std::sqrt(hf * hf - cu);
  const ld eta2 = hf - std::sqrt(hf * hf + cv);
  return {static_cast<double>(xi1), static_cast<double>(cu / xi1), static_cast<double>(-cv / eta2),
          static_cast<double>(eta2)};
}

inline double quarter_integral(const auto& fn) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, 0.0, std::numbers::pi / 2, 15, 1e-15);
}

// v = v1 sin t.
inline double period_v(double ell, double hs, const sunshadow::PhysParams& p) {
  const auto r = turning_points(ell, hs, p);
  return 4 * quarter_integral([&](double t) { return 1 / std::sqrt(p.f * (r.eta1 * std::sin(t) * std::sin(t) - r.eta2)); });
}

// Bounded branch |u| <= u2, u = u2 sin t.
inline double period_u(double ell, double hs, const sunshadow::PhysParams& p) {
  const auto r = turning_points(ell, hs, p);
  return 4 * quarter_integral([&](double t) { return 1 / std::sqrt(p.f * (r.xi1 - r.xi2 * std::sin(t) * std::sin(t))); });
}

}  // namespace oracle
