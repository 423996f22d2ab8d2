#include "sunshadow/core.hpp"

#include <cmath>
#include <string>

namespace sunshadow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateOrigin: return "DegenerateOrigin";
    case ErrorCode::BranchUndefined: return "BranchUndefined";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnboundedU: return "UnboundedU";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularSection: return "SingularSection";
    case ErrorCode::NoExitRoot: return "NoExitRoot";
    case ErrorCode::ComplexXT: return "ComplexXT";
    case ErrorCode::OutOfRegion: return "OutOfRegion";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::ForbiddenPoint: return "ForbiddenPoint";
    case ErrorCode::LostOrbit: return "LostOrbit";
    case ErrorCode::SampleLost: return "SampleLost";
    case ErrorCode::LinearRegimeViolated: return "LinearRegimeViolated";
    case ErrorCode::AllCandidatesLost: return "AllCandidatesLost";
    case ErrorCode::BranchExtinct: return "BranchExtinct";
  }
  return "Unknown";
}

void PhysParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (!(mu > 0) || !std::isfinite(mu)) fail("mu must be positive");
  if (!(f > 0) || !std::isfinite(f)) fail("f must be positive");
  if (!(R > 0) || !std::isfinite(R)) fail("R must be positive");
  if (!(r_escape > R)) fail("r_escape must exceed R");
  if (!(f * R * R / 2 < mu)) fail("f R^2 / 2 must be smaller than mu");
  if (!(tau_budget > 0)) fail("tau_budget must be positive");
  if (switch_budget < 1) fail("switch_budget must be at least 1");
  if (!(tol_abs > 0) || !(tol_rel > 0)) fail("tolerances must be positive");
  if (step < 0) fail("step must be non-negative (0 = automatic)");
}

IntegralSet integrals(const ParabolicState<double>& s, const PhysParams& p) {
  const Vec4 U = s.phase();
  const double rho = s.u * s.u + s.v * s.v;
  if (rho == 0) throw Error(ErrorCode::DegenerateOrigin, "integrals at u = v = 0");

  IntegralSet I;
  I.h_k = phase::kepler_energy(U, p.mu);
  I.h_s = phase::stark_energy(U, p.mu, p.f);
  I.c_k = phase::angular_momentum(U);
  I.ell_k = phase::kepler_ell(U, p.mu);
  I.ell_s = phase::stark_ell(U, p.mu, p.f);
  const double px = (s.u * s.pu - s.v * s.pv) / rho;
  I.A_k = Vec2(-I.ell_k, -px * I.c_k - 2 * p.mu * s.u * s.v / rho);
  return I;
}

IntegralSet cartesian_integrals(const CartesianState<double>& s, const PhysParams& p) {
  const double r = std::hypot(s.x, s.y);
  if (r == 0) throw Error(ErrorCode::DegenerateOrigin, "integrals at x = y = 0");
  const double kinetic = (s.px * s.px + s.py * s.py) / 2;
  const double cross = s.px * s.y - s.py * s.x;

  IntegralSet I;
  I.h_k = kinetic - p.mu / r;
  I.h_s = I.h_k - p.f * s.x;
  I.c_k = s.py * s.x - s.px * s.y;
  I.A_k = Vec2(-s.py * cross - p.mu * s.x / r, s.px * cross - p.mu * s.y / r);
  I.ell_k = -I.A_k.x();
  I.ell_s = s.py * cross + p.mu * s.x / r - p.f / 2 * s.y * s.y;
  return I;
}

}  // namespace sunshadow
