#include "sunshadow/brake.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sunshadow/elliptic.hpp"
#include "sunshadow/propagate.hpp"
#include "sunshadow/stark.hpp"

namespace sunshadow::brake {

EllWindow ell_window(const PhysParams& p) {
  const double fR2 = p.f * p.R * p.R;
  const double centre = -1.25 * fR2;
  const double half = std::sqrt(p.mu * p.mu + 9.0 / 16.0 * fR2 * fR2 - 2.5 * fR2 * p.mu);
  return {centre - half, centre + half};
}

double kepler_ell_from_stark(double ell_s, const PhysParams& p) { return ell_s + p.f * p.R * p.R / 2; }

double a_k(double ell_s, const PhysParams& p) {
  const double lk = kepler_ell_from_stark(ell_s, p);
  return (p.mu + lk) / (p.mu - lk);
}

ExitGeometry exit_geometry(double ell_s, double x0, const PhysParams& p) {
  const double ak = a_k(ell_s, p);
  const double rad = x0 * x0 - ak * p.R * p.R;
  if (!(rad >= 0)) throw Error(ErrorCode::ComplexXT, "x0^2 < a_k R^2");
  ExitGeometry g;
  g.x_T = std::sqrt(rad);
  g.xiE = x0 + g.x_T;
  g.x_E = g.xiE / 2 - p.R * p.R / (2 * g.xiE);
  const double lk = kepler_ell_from_stark(ell_s, p);
  g.hs = -(p.mu + lk) / (2 * x0) - p.f * g.xiE / 2 + p.f * p.R * p.R / (2 * g.xiE);
  return g;
}

double x0_from_hs(double ell_s, double hs, const PhysParams& p) {
  const auto fam = stark::brake_family(ell_s, p);
  double lo = fam.xi_star / 2;
  if (!(exit_geometry(ell_s, lo, p).hs > hs))
    throw Error(ErrorCode::OutOfRegion, "hs is not reachable from x0 >= xi*/2");
  double hi = 2 * lo;
  while (exit_geometry(ell_s, hi, p).hs > hs) {
    lo = hi;
    hi *= 2;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    (exit_geometry(ell_s, mid, p).hs > hs ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

namespace {

// h_s* beyond double precision: the offsets handled here can be a few
// hundred ulps of h_s*.
long double hs_star_extended(double ell_s, const PhysParams& p) {
  return -std::sqrt(2 * static_cast<long double>(p.f) * (static_cast<long double>(p.mu) + ell_s));
}

struct Setup {
  double xi1 = 0, xi2 = 0, dxi = 0;
  stark::QuarticStructure q;
  double xiE = 0;
};

// Stark structure at hs = h_s* - delta.  The xi roots come from delta
// itself, so they keep full relative precision as hs approaches h_s*.
Setup setup_offset(double ell_s, double delta, const PhysParams& p) {
  if (!(delta > 0)) throw Error(ErrorCode::OutOfRegion, "hs must lie below h_s*");
  const auto fam = stark::brake_family(ell_s, p);
  const double hs = static_cast<double>(hs_star_extended(ell_s, p) - delta);
  Setup s;
  s.q = stark::quartic_structure(ell_s, hs, p);
  const double d = delta / p.f;
  const double root = std::sqrt(d * (2 * fam.xi_star + d));
  s.xi1 = fam.xi_star + d + root;
  s.xi2 = fam.xi_star * fam.xi_star / s.xi1;
  s.dxi = 2 * root;
  s.xiE = exit_geometry(ell_s, x0_from_hs(ell_s, hs, p), p).xiE;
  if (!(s.xiE > s.xi1)) throw Error(ErrorCode::OutOfRegion, "exit does not lie beyond xi_1");
  return s;
}

double tau_u_offset(double ell_s, double delta, const PhysParams& p) {
  const auto s = setup_offset(ell_s, delta, p);
  const double r = std::sqrt((s.xiE - s.xi1) / (s.xiE - s.xi2));
  // F(asin r | xi2/xi1) with the R_F arguments formed without cancellation.
  const double rf = elliptic::carlson_rf(s.dxi / (s.xiE - s.xi2), s.xiE * s.dxi / (s.xi1 * (s.xiE - s.xi2)), 1.0);
  return r * rf / std::sqrt(p.f * s.xi1);
}

double tau_v_offset(double ell_s, double delta, const PhysParams& p) {
  const auto s = setup_offset(ell_s, delta, p);
  const double eta1 = s.q.eta1.real(), eta2 = s.q.eta2.real();
  const double deta = 2 * std::sqrt(s.q.eta_radicand);
  const double cos2 = p.R * p.R / (s.xiE * eta1);
  const double sin_phi = std::sqrt(1 - cos2);
  const double rf = elliptic::carlson_rf(cos2, (p.R * p.R / s.xiE - eta2) / deta, 1.0);
  return sin_phi * rf / std::sqrt(p.f * deta);
}

}  // namespace

double tau_u(double ell_s, double hs, const PhysParams& p) {
  return tau_u_offset(ell_s, static_cast<double>(hs_star_extended(ell_s, p) - hs), p);
}

double tau_v(double ell_s, double hs, const PhysParams& p) {
  return tau_v_offset(ell_s, static_cast<double>(hs_star_extended(ell_s, p) - hs), p);
}

X0Bounds x0_bounds(double ell_s, const PhysParams& p) {
  const auto fam = stark::brake_family(ell_s, p);
  const double ak = a_k(ell_s, p);
  const double xs = fam.xi_star;
  X0Bounds b;
  b.C = std::sqrt(1 - 4 * ak * p.R * p.R / (xs * xs));
  b.C1 = p.R / 2 * std::sqrt(ak);
  b.C2 = p.R * std::sqrt((1 - b.C + 2 * ak) / (1 + b.C));
  b.lower = xs / 2 + b.C1;
  b.upper = (xs + b.C2) / 2;
  return b;
}

double hs_bar(double ell_s, const PhysParams& p) {
  const auto fam = stark::brake_family(ell_s, p);
  const double xs = fam.xi_star;
  const double w = std::sqrt(2 * (p.mu - ell_s) / p.f);
  const double K1 = std::sqrt(2.0) * std::sqrt(1 + w / xs);
  const double eta1s = -xs + 2 * std::sqrt(p.mu / p.f);
  const double K2 = std::asin(std::sqrt(1 - p.R * p.R / (xs * eta1s)));
  const double C2 = x0_bounds(ell_s, p).C2;
  const double k = K1 / K2;
  return -p.f * std::sqrt(xs * xs + C2 * C2 / 4 * k * k * (2 + k) * (2 + k));
}

ParabolicState<double> axis_state(double ell_s, double x0, const PhysParams& p) {
  const double lk = kepler_ell_from_stark(ell_s, p);
  ParabolicState<double> s;
  s.u = std::sqrt(2 * x0);
  s.v = 0;
  s.pu = 0;
  s.pv = std::sqrt(2 * (p.mu - lk));
  return s;
}

BrakeSolution solve_brake(double ell_s, const PhysParams& p) {
  const auto fam = stark::brake_family(ell_s, p);
  BrakeSolution sol;
  sol.ell_s = ell_s;
  sol.hs_star = fam.hs_star;
  sol.hs_bar = hs_bar(ell_s, p);
  // Searched in delta = h_s* - hs: one ulp of hs moves g by more than the
  // residual tolerance.
  auto g = [&](double delta) { return tau_u_offset(ell_s, delta, p) - tau_v_offset(ell_s, delta, p); };

  // Grid geometric in the distance to h_s*, where tau_u diverges.
  const double d_max = fam.hs_star - sol.hs_bar;
  if (!(d_max > 0)) throw Error(ErrorCode::NoBracket, "empty energy interval");
  const double guard = kGuardFraction * d_max;
  std::vector<double> grid(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i)
    grid[i] = d_max * std::pow(guard / d_max, static_cast<double>(i) / (kScanPoints - 1));

  std::vector<double> deltas;
  std::vector<double> gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) gv[i] = g(grid[i]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if ((gv[i] < 0) == (gv[i + 1] < 0)) continue;
    double lo = grid[i + 1], hi = grid[i], g_lo = gv[i + 1];
    for (;;) {
      const double mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) break;
      const double gm = g(mid);
      if ((gm < 0) == (g_lo < 0)) {
        lo = mid;
        g_lo = gm;
      } else {
        hi = mid;
      }
    }
    // One secant polish on the final bracket.
    double root = (lo + hi) / 2;
    const double ga = g(lo), gb = g(hi);
    if (gb != ga) {
      const double cand = lo - ga * (hi - lo) / (gb - ga);
      if (cand >= lo && cand <= hi && std::abs(g(cand)) < std::abs(g(root))) root = cand;
    }
    deltas.push_back(root);
  }
  if (deltas.empty()) throw Error(ErrorCode::NoBracket, "tau_u - tau_v keeps its sign on [hs_bar, h_s* - guard]");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const long double star = hs_star_extended(ell_s, p);
  for (const double d : deltas) sol.roots.push_back(static_cast<double>(star - d));

  const double delta = deltas.front();
  sol.hs_hat = sol.roots.front();
  sol.x0_star = x0_from_hs(ell_s, sol.hs_hat, p);
  const auto geo = exit_geometry(ell_s, sol.x0_star, p);
  sol.xiE = geo.xiE;
  sol.hk = -(p.mu + kepler_ell_from_stark(ell_s, p)) / (2 * sol.x0_star);
  sol.puE = std::sqrt(2 * sol.hs_hat * sol.xiE + 2 * (p.mu + ell_s) + p.f * sol.xiE * sol.xiE);
  const double tu = tau_u_offset(ell_s, delta, p);
  sol.residual_tau = std::abs(tu - tau_v_offset(ell_s, delta, p));
  sol.tau_stark = tu;

  // Brake point from the orbit itself: Kepler to the exit, then tau_u of Stark.
  const auto start = axis_state(ell_s, sol.x0_star, p);
  const auto kep = propagate::propagate_to_event(start, propagate::RegimeKind::Kepler, p);
  if (kep.status != propagate::FlowStatus::ReachedSection)
    throw Error(ErrorCode::NoBracket, "Kepler arc from the axis does not reach the shadow exit");
  sol.tau_kepler = kep.final.tau - start.tau;
  propagate::FlowOptions opt;
  opt.tau_budget = tu;
  const auto st = propagate::sunshadow_flow(kep.final, propagate::RegimeKind::Stark, p, opt);
  const auto c = to_cartesian(st.final);
  sol.x_brake = c.x;
  sol.y_brake = c.y;
  return sol;
}

}  // namespace sunshadow::brake
