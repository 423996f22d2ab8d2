#pragma once

// Branches of the stable and unstable manifolds of a saddle fixed point of a
// planar map, grown as a sequence of primary segments that may break into
// several components where the map is undefined.

#include <functional>
#include <optional>
#include <vector>

#include "sunshadow/core.hpp"
#include "sunshadow/ssmap.hpp"

namespace sunshadow::manifolds {

// One application of a planar map.  `jacobian` is filled only by maps built
// with Jacobians.  Implementations must be safe to call concurrently.
struct MapStep {
  bool returned = false;
  Vec2 image = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
};
using PlanarMap = std::function<MapStep(const Vec2&)>;

// The section map at fixed ell_s (or its inverse) in (u, p_u).
PlanarMap section_map(double ell_s, const PhysParams& p, bool inverse, bool with_jacobian);

struct Mfli {
  double value = 0;  // max over 0 <= n <= iterations of log |J_n w0|
  int iterations = 0;
  bool truncated = false;  // orbit lost before the horizon
};

// Tangent transport of w0 along the orbit of q.  The value includes n = 0,
// so it is never negative.
Mfli mfli(const PlanarMap& map, const Vec2& q, const Vec2& w0, int horizon);

struct SamplePoint {
  Vec2 x = Vec2::Zero();
  bool lost = false;  // the image of x does not exist
};
using Component = std::vector<SamplePoint>;

struct Primary {
  int generation = 0;
  std::vector<Component> components;

  std::size_t size() const;
};

// log2(lambda) rounded up, plus two.
int default_primary_points(double lambda);

// Second-order remainder allowed at the first point, relative to its
// linear image displacement lambda |v0 - fp|.
inline constexpr double kLinearRegimeTol = 1e-3;

// Points fp + offset psi, then spacings doubling by index, closed by the
// image of the first point.  `lambda` is the expansion factor of `map`
// along psi.  Throws LinearRegimeViolated.
Primary init_primary(const PlanarMap& map, const Vec2& fp, const Vec2& psi, double lambda, double offset, int n);

struct CorrectionOptions {
  int samples = 21;  // odd: the centre sample is the point itself
  int horizon = 8;
  double halfwidth_factor = 0.5;  // times the local spacing
  // Candidates whose MFLI is within this of the best count as tied; the
  // point is kept if tied, else the middle of the tied set is taken.
  double tie_tolerance = 0.5;
  int jobs = 1;
};

// Moves each point to the best MFLI candidate on its transverse segment.
// `mfli_map` is the map whose iterates separate the sought manifold from
// its neighbours (the inverse map for an unstable branch).  Throws
// AllCandidatesLost naming the point.
Component correct_component(const PlanarMap& mfli_map, const Component& c, const CorrectionOptions& opt);
Primary correct_primary(const PlanarMap& mfli_map, const Primary& v, const CorrectionOptions& opt);

enum class Which { Unstable, Stable };

struct BranchOptions {
  int generations = 6;
  int direction = 1;                // sign of the eigenvector
  double offset_fraction = 1e-6;    // initial |v0 - fp| / |fp|, reduced tenfold until linear
  double min_offset_fraction = 1e-14;
  int points = 0;                   // 0: default_primary_points
  int corrected_generations = 1;    // generations refined by MFLI before mapping
  CorrectionOptions correction;
  double spacing_fraction = 1e-3;   // chord bound relative to the branch bounding-box diagonal
  int max_refine_depth = 10;
  std::size_t max_points = 20000;   // per generation
  int jobs = 1;
};

struct Branch {
  std::vector<Primary> primaries;
  Vec2 fixed_point = Vec2::Zero();
  Vec2 eigvec = Vec2::Zero();
  double lambda = 0;  // expansion factor of the map that grows the branch
  double offset = 0;
  Which which = Which::Unstable;
  int direction = 1;
};

// `advance` grows the branch (the map for an unstable branch, its inverse
// for a stable one); `mfli_map` is the other one, with Jacobians.  Throws
// BranchExtinct when a generation loses every point.
Branch grow_branch(const PlanarMap& advance, const PlanarMap& mfli_map, const Vec2& fp, const Vec2& psi,
                   double lambda, Which which, const BranchOptions& opt);

// Direction +1 is the half-branch leaving the fixed point toward smaller |u|.
Branch grow_section_branch(const ssmap::FixedPoint& fp, Which which, double ell_s, const PhysParams& p,
                           const BranchOptions& opt);

// Distance from x to the polyline through the points of all components.
double polyline_distance(const Primary& v, const Vec2& x);

}  // namespace sunshadow::manifolds
