#pragma once

// The Sun-shadow return map on the upper shadow boundary y = R, x >= 0,
// written in (u, p_u) at a fixed value of the Stark integral ell_s.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "sunshadow/core.hpp"
#include "sunshadow/propagate.hpp"

namespace sunshadow::ssmap {

struct SectionPoint {
  double u = 0;
  double pu = 0;
  double ell_s = 0;

  Vec2 vec() const { return {u, pu}; }
  static SectionPoint from(const Vec2& x, double ell_s) { return {x[0], x[1], ell_s}; }
};

enum class Domain {
  Admissible,
  GuardViolated,    // |u| < sqrt(R): the point is not on the shadow boundary
  PvNonPositive,    // p_v^2 <= 0
  OutwardViolated,  // u p_u < 0 quadrant condition, p_y <= 0
};

std::string_view to_string(Domain d);

// Closed-form membership test; no propagation.
Domain forbidden_class(const SectionPoint& q, const PhysParams& p);

// p_v^2 of the lift, from ell_s with v = R / u.
double lifted_pv_squared(const SectionPoint& q, const PhysParams& p);

// Phase state on uv = R with ell_s(U) = ell_s and u p_v > 0.  Throws
// ForbiddenPoint naming the violated condition.
ParabolicState<double> lift(const SectionPoint& q, const PhysParams& p);

// d U / d (u, p_u) of the lift.
Eigen::Matrix<double, 4, 2> lift_jacobian(const SectionPoint& q, const PhysParams& p);

enum class MapKind { Returned, Forbidden, Collision, Escape, Budget, Singular };

std::string_view to_string(MapKind k);

struct MapOutcome {
  MapKind kind = MapKind::Forbidden;
  SectionPoint point;  // valid when Returned
  int winding = 0;     // valid when Returned
  double elapsed_t = 0;
  double elapsed_tau = 0;
  std::vector<propagate::CrossingEvent> events;
  ParabolicState<double> start, final;
  std::optional<Domain> forbidden;  // set when Forbidden
};

struct MapOptions {
  double step = 0;  // overrides the automatic step when positive
  std::function<void(const propagate::StepRecord&)> on_step;
};

// Integer turning of the position vector around the origin: twice the
// turning of (u, v), closed by the chord along y = R back to the start.
int winding_number(double uv_turning, double x_start, double x_end, const PhysParams& p);

// Is the event a return to the section: leaving the shadow through uv = +R
// with u p_v > 0 and p_y > 0.
bool is_section_return(const propagate::CrossingEvent& ev, const PhysParams& p);

MapOutcome apply(const SectionPoint& q, const PhysParams& p, const MapOptions& opt = {});

// Backward flow from q to its preimage.  The winding reported is the one
// of the forward trajectory from the preimage to q.
MapOutcome apply_inverse(const SectionPoint& q, const PhysParams& p, const MapOptions& opt = {});

enum class JacobianMethod { Variational, FiniteDifference };

// Throws LostOrbit if q does not return and SingularSection at a tangential
// crossing.
Mat2 jacobian(const SectionPoint& q, const PhysParams& p, JacobianMethod method = JacobianMethod::Variational,
              const MapOptions& opt = {});

// Image and Jacobian from one variational run.
struct MapWithJacobian {
  MapOutcome outcome;
  Mat2 jacobian = Mat2::Zero();
};
MapWithJacobian apply_with_jacobian(const SectionPoint& q, const PhysParams& p, const MapOptions& opt = {},
                                    bool inverse = false);

// Closed-form eigen-decomposition of a real 2x2 matrix.
struct Eigen2 {
  bool real = false;
  double lambda1 = 0, lambda2 = 0;  // |lambda1| <= |lambda2| when real
  Vec2 v1 = Vec2::Zero(), v2 = Vec2::Zero();
};
Eigen2 eigen2(const Mat2& A);

struct FixedPoint {
  SectionPoint point;
  double residual = 0;  // |S(q) - q|
  int iterations = 0;
  Mat2 jacobian = Mat2::Zero();
  Eigen2 eigen;
  int winding = 0;
};

inline constexpr double kFixedPointTol = 1e-10;
inline constexpr int kFixedPointMaxIter = 50;

// Newton on S(q) - q.  Throws NoConvergence or LostOrbit.
FixedPoint find_fixed_point(const SectionPoint& seed, const PhysParams& p, const MapOptions& opt = {});

struct AreaSpec {
  double u_c = 1250;
  double r_c = 250;
  double c = 1;
  int m = 200000;
  int jobs = 1;
};

struct AreaResult {
  double A0 = 0;           // analytic area of the initial curve
  double A0_numeric = 0;   // same pipeline applied to the unmapped samples
  double A1 = 0;           // area enclosed by the image curve
  double A1_half = 0;      // A1 from every other sample
  double quadrature_error = 0;
  double orientation = 1;  // sign of the image curve orientation
};

// Initial curve c p_u^2 + (u - u_c)^2 = r_c^2 sampled uniformly in angle.
std::vector<SectionPoint> area_curve(const AreaSpec& spec, double ell_s);

// Spline + Green area of a closed sampled curve (first point not repeated).
double curve_area(const std::vector<double>& u, const std::vector<double>& pu);

// Throws SampleLost naming the first sample that does not return.
AreaResult area_experiment(const AreaSpec& spec, double ell_s, const PhysParams& p);

struct ScanSpec {
  double umin = 0, umax = 0, pumin = 0, pumax = 0;
  int nx = 0, ny = 0;
  int jobs = 1;
};

enum class NodeClass { D, F, C, INF, BUDGET, SING };
std::string_view to_string(NodeClass c);

struct ScanNode {
  double u = 0, pu = 0;
  NodeClass cls = NodeClass::F;
  std::optional<int> winding;
};

NodeClass classify_outcome(const MapOutcome& o);

// Node k = j nx + i has u = umin + i du and p_u = pumin + j dpu.
std::vector<ScanNode> scan_domain(const ScanSpec& spec, double ell_s, const PhysParams& p);

}  // namespace sunshadow::ssmap
