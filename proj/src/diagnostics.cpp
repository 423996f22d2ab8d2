#include "sunshadow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sunshadow::diagnostics {

using propagate::Crossing;
using propagate::Surface;

std::vector<Trajectory> sample_trajectories(double ell_s, const PhysParams& p, std::uint64_t seed,
                                            std::size_t min_events, std::size_t max_tries,
                                            const SampleWindow& w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> du(w.umin, w.umax), dp(w.pumin, w.pumax);
  std::vector<Trajectory> out;
  std::size_t events = 0;
  for (std::size_t k = 0; k < max_tries && events < min_events; ++k) {
    const ssmap::SectionPoint q{du(rng), dp(rng), ell_s};
    if (ssmap::forbidden_class(q, p) != ssmap::Domain::Admissible) continue;
    try {
      auto o = ssmap::apply(q, p);
      events += o.events.size();
      out.push_back({q, std::move(o)});
    } catch (const Error&) {
    }
  }
  return out;
}

LeapReport leaps_check(double ell_s, const PhysParams& p, std::uint64_t seed, std::size_t min_crossings) {
  LeapReport rep;
  const double dell_unit = p.f * p.R * p.R / 2;
  for (const auto& tr : sample_trajectories(ell_s, p, seed, min_crossings)) {
    for (const auto& ev : tr.outcome.events) {
      const Vec4 U = ev.state.phase();
      const bool entering = ev.direction == Crossing::EnteringShadow;
      const double sign = entering ? 1 : -1;
      const double kep = phase::kepler_ell(U, p.mu), stk = phase::stark_ell(U, p.mu, p.f);
      Leap l;
      l.direction = ev.direction;
      l.u = ev.state.u;
      l.dell = entering ? kep - stk : stk - kep;
      l.dell_expected = sign * dell_unit;
      l.dh = ev.delta_h;
      const double u2 = l.u * l.u;
      l.dh_expected = sign * p.f * (u2 - p.R * p.R / u2) / 2;
      rep.max_dell_rel = std::max(rep.max_dell_rel, std::abs(l.dell - l.dell_expected) / std::abs(l.dell_expected));
      rep.max_dh_rel = std::max(rep.max_dh_rel, std::abs(l.dh - l.dh_expected) / std::abs(l.dh_expected));
      rep.leaps.push_back(l);
      if (!entering) {
        ++rep.stark_legs;
        rep.max_ell_restore_rel =
            std::max(rep.max_ell_restore_rel, std::abs(ev.ell_after - ell_s) / std::abs(ell_s));
      }
    }
  }
  return rep;
}

TransitReport transit_check(double ell_s, const PhysParams& p, std::uint64_t seed, std::size_t count) {
  TransitReport rep;
  std::mt19937_64 rng(seed);
  const double guard = std::sqrt(p.R);
  std::uint64_t batch = 0;
  while (rep.transits.size() < count && batch < 64) {
    for (const auto& tr : sample_trajectories(ell_s, p, rng(), 4 * count)) {
      const auto& evs = tr.outcome.events;
      for (std::size_t i = 0; i + 1 < evs.size() && rep.transits.size() < count; ++i) {
        const auto& in = evs[i];
        const auto& out = evs[i + 1];
        if (in.surface != Surface::Lower || in.direction != Crossing::EnteringShadow || !(in.state.u > guard)) continue;
        if (out.surface != Surface::Upper || out.direction != Crossing::LeavingShadow) continue;
        Transit t;
        t.entry = in.state;
        t.numeric = out.state;
        try {
          const auto res = propagate::kepler_transit_analytic(in.state, p);
          t.analytic = res.exit;
          t.poly_residual = res.poly_residual;
        } catch (const Error&) {
          ++rep.no_root;
          continue;
        }
        const Vec4 a = t.analytic.phase(), n = t.numeric.phase();
        t.rel_error = (a - n).lpNorm<Eigen::Infinity>() / n.lpNorm<Eigen::Infinity>();
        rep.max_rel_error = std::max(rep.max_rel_error, t.rel_error);
        rep.max_poly_residual = std::max(rep.max_poly_residual, t.poly_residual);
        rep.transits.push_back(t);
      }
      if (rep.transits.size() >= count) break;
    }
    ++batch;
  }
  return rep;
}

}  // namespace sunshadow::diagnostics
