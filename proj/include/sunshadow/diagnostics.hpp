#pragma once

// Crossing statistics gathered from map applications started at
// pseudo-random section points: integral leaps at every shadow crossing
// and the analytic shadow transit against the integrated one.

#include <cstdint>
#include <vector>

#include "sunshadow/propagate.hpp"
#include "sunshadow/ssmap.hpp"

namespace sunshadow::diagnostics {

// Section window the samples are drawn from.
struct SampleWindow {
  double umin = 2000, umax = 4500;
  double pumin = -500, pumax = 500;
};

struct Trajectory {
  ssmap::SectionPoint origin;
  ssmap::MapOutcome outcome;
};

// Maps admissible pseudo-random points until `min_events` crossings are
// collected or `max_tries` points were drawn.
std::vector<Trajectory> sample_trajectories(double ell_s, const PhysParams& p, std::uint64_t seed,
                                            std::size_t min_events, std::size_t max_tries = 10000,
                                            const SampleWindow& w = {});

struct Leap {
  propagate::Crossing direction = propagate::Crossing::EnteringShadow;
  double u = 0;
  // New-regime integral minus old-regime integral at the crossing state.
  double dell = 0, dell_expected = 0;
  // New frozen energy minus the energy frozen on the previous leg.
  double dh = 0, dh_expected = 0;
};

struct LeapReport {
  std::vector<Leap> leaps;
  double max_dell_rel = 0;
  double max_dh_rel = 0;
  // ell_s at the start of each Stark leg against the section value.
  double max_ell_restore_rel = 0;
  std::size_t stark_legs = 0;
};

LeapReport leaps_check(double ell_s, const PhysParams& p, std::uint64_t seed, std::size_t min_crossings);

struct Transit {
  ParabolicState<double> entry, numeric, analytic;
  double rel_error = 0;  // max-norm of the phase difference over max-norm of the numeric exit
  double poly_residual = 0;
};

struct TransitReport {
  std::vector<Transit> transits;
  std::size_t no_root = 0;  // entries for which the analytic solver found no exit
  double max_rel_error = 0;
  double max_poly_residual = 0;
};

// Kepler legs entering through uv = -R with u > sqrt(R) and leaving
// through uv = +R.
TransitReport transit_check(double ell_s, const PhysParams& p, std::uint64_t seed, std::size_t count);

}  // namespace sunshadow::diagnostics
