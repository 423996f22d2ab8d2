#include "sunshadow/ssmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "sunshadow/detail/parallel.hpp"
#include "sunshadow/spline.hpp"

namespace sunshadow::ssmap {

using propagate::CrossingEvent;
using propagate::FlowStatus;
using propagate::RegimeKind;

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::Admissible: return "Admissible";
    case Domain::GuardViolated: return "GuardViolated";
    case Domain::PvNonPositive: return "PvNonPositive";
    case Domain::OutwardViolated: return "OutwardViolated";
  }
  return "?";
}

std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::Returned: return "Returned";
    case MapKind::Forbidden: return "Forbidden";
    case MapKind::Collision: return "Collision";
    case MapKind::Escape: return "Escape";
    case MapKind::Budget: return "Budget";
    case MapKind::Singular: return "Singular";
  }
  return "?";
}

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::D: return "D";
    case NodeClass::F: return "F";
    case NodeClass::C: return "C";
    case NodeClass::INF: return "INF";
    case NodeClass::BUDGET: return "BUDGET";
    case NodeClass::SING: return "SING";
  }
  return "?";
}

namespace {

// 2 ell_s + f R^2: the combination the section constraint depends on.
double section_k(double ell_s, const PhysParams& p) { return 2 * ell_s + p.f * p.R * p.R; }

double section_x(double u, const PhysParams& p) {
  const double v = p.R / u;
  return (u * u - v * v) / 2;
}

}  // namespace

double lifted_pv_squared(const SectionPoint& q, const PhysParams& p) {
  const double k = section_k(q.ell_s, p);
  const double R2 = p.R * p.R, u4 = std::pow(q.u, 4);
  return (2 * p.mu - k) + R2 * (q.pu * q.pu - 2 * p.mu - k) / u4;
}

Domain forbidden_class(const SectionPoint& q, const PhysParams& p) {
  if (!(std::abs(q.u) >= std::sqrt(p.R))) return Domain::GuardViolated;
  if (!(lifted_pv_squared(q, p) > 0)) return Domain::PvNonPositive;
  if (q.u * q.pu < 0) {
    const double k = section_k(q.ell_s, p);
    const double lower = 2 * p.mu - k;
    if (!(lower > 0)) return Domain::OutwardViolated;
    if (std::pow(q.u, 4) <= (2 * p.mu + k) * p.R * p.R / lower) return Domain::OutwardViolated;
  }
  return Domain::Admissible;
}

ParabolicState<double> lift(const SectionPoint& q, const PhysParams& p) {
  const Domain d = forbidden_class(q, p);
  if (d != Domain::Admissible)
    throw Error(ErrorCode::ForbiddenPoint, "section point violates " + std::string(to_string(d)));
  ParabolicState<double> s;
  s.u = q.u;
  s.v = p.R / q.u;
  s.pu = q.pu;
  s.pv = std::copysign(std::sqrt(lifted_pv_squared(q, p)), q.u);
  return s;
}

Eigen::Matrix<double, 4, 2> lift_jacobian(const SectionPoint& q, const PhysParams& p) {
  const auto s = lift(q, p);
  const double k = section_k(q.ell_s, p);
  const double R2 = p.R * p.R;
  const double u4 = std::pow(q.u, 4);
  Eigen::Matrix<double, 4, 2> L = Eigen::Matrix<double, 4, 2>::Zero();
  L(kPv, 0) = -2 * R2 * (q.pu * q.pu - 2 * p.mu - k) / (u4 * q.u * s.pv);
  L(kU, 0) = 1;
  L(kV, 0) = -p.R / (q.u * q.u);
  L(kPu, 1) = 1;
  L(kPv, 1) = q.pu * R2 / (u4 * s.pv);
  return L;
}

int winding_number(double uv_turning, double x_start, double x_end, const PhysParams& p) {
  const double total = 2 * uv_turning + std::atan2(p.R, x_start) - std::atan2(p.R, x_end);
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

bool is_section_return(const CrossingEvent& ev, const PhysParams& /*p*/) {
  if (ev.surface != propagate::Surface::Upper) return false;
  const auto& s = ev.state;
  const double py_num = s.v * s.pu + s.u * s.pv;  // p_y times u^2 + v^2
  return s.u * s.pv > 0 && py_num > 0;
}

namespace {

propagate::FlowOptions flow_options(const MapOptions& opt, bool inverse, const PhysParams& p) {
  propagate::FlowOptions fo;
  fo.direction = inverse ? -1.0 : 1.0;
  fo.step = opt.step;
  fo.on_step = opt.on_step;
  const auto wanted = inverse ? propagate::Crossing::EnteringShadow : propagate::Crossing::LeavingShadow;
  fo.stop_at = [wanted, &p](const CrossingEvent& ev) { return ev.direction == wanted && is_section_return(ev, p); };
  return fo;
}

MapKind kind_of(FlowStatus s) {
  switch (s) {
    case FlowStatus::ReachedSection: return MapKind::Returned;
    case FlowStatus::Collision: return MapKind::Collision;
    case FlowStatus::Escape: return MapKind::Escape;
    case FlowStatus::BudgetExceeded: return MapKind::Budget;
  }
  return MapKind::Budget;
}

MapOutcome outcome_from(const SectionPoint& q, const ParabolicState<double>& start, const propagate::FlowResult& fr,
                        bool inverse, const PhysParams& p) {
  MapOutcome out;
  out.kind = kind_of(fr.status);
  out.start = start;
  out.final = fr.final;
  out.events = fr.events;
  out.elapsed_t = std::abs(fr.final.t - start.t);
  out.elapsed_tau = std::abs(fr.final.tau - start.tau);
  if (out.kind == MapKind::Returned) {
    const auto& s = fr.events.back().state;
    out.point = {s.u, s.pu, q.ell_s};
    const double x_here = section_x(q.u, p), x_there = section_x(s.u, p);
    out.winding = inverse ? winding_number(-fr.uv_turning, x_there, x_here, p)
                          : winding_number(fr.uv_turning, x_here, x_there, p);
  }
  return out;
}

MapOutcome run_map(const SectionPoint& q, const PhysParams& p, const MapOptions& opt, bool inverse) {
  MapOutcome out;
  if (const Domain d = forbidden_class(q, p); d != Domain::Admissible) {
    out.kind = MapKind::Forbidden;
    out.forbidden = d;
    return out;
  }
  const auto start = lift(q, p);
  const auto fr = propagate::sunshadow_flow(start, inverse ? RegimeKind::Kepler : RegimeKind::Stark, p,
                                            flow_options(opt, inverse, p));
  return outcome_from(q, start, fr, inverse, p);
}

}  // namespace

MapOutcome apply(const SectionPoint& q, const PhysParams& p, const MapOptions& opt) {
  return run_map(q, p, opt, false);
}

MapOutcome apply_inverse(const SectionPoint& q, const PhysParams& p, const MapOptions& opt) {
  return run_map(q, p, opt, true);
}

MapWithJacobian apply_with_jacobian(const SectionPoint& q, const PhysParams& p, const MapOptions& opt, bool inverse) {
  MapWithJacobian out;
  if (const Domain d = forbidden_class(q, p); d != Domain::Admissible) {
    out.outcome.kind = MapKind::Forbidden;
    out.outcome.forbidden = d;
    return out;
  }
  const auto start = lift(q, p);
  propagate::VariationalResult vr;
  try {
    vr = propagate::variational_flow(start, inverse ? RegimeKind::Kepler : RegimeKind::Stark, p,
                                     flow_options(opt, inverse, p));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSection) throw;
    out.outcome.kind = MapKind::Singular;
    out.outcome.start = start;
    return out;
  }
  out.outcome = outcome_from(q, start, vr.flow, inverse, p);
  if (out.outcome.kind != MapKind::Returned) return out;
  Eigen::Matrix<double, 2, 4> select = Eigen::Matrix<double, 2, 4>::Zero();
  select(0, kU) = 1;
  select(1, kPu) = 1;
  out.jacobian = select * vr.total * lift_jacobian(q, p);
  return out;
}

namespace {

Vec2 returned_image(const SectionPoint& q, const PhysParams& p, const MapOptions& opt) {
  const auto o = apply(q, p, opt);
  if (o.kind != MapKind::Returned)
    throw Error(ErrorCode::LostOrbit, "finite-difference probe did not return (" + std::string(to_string(o.kind)) + ")");
  return o.point.vec();
}

// Central difference with one Richardson extrapolation per column.
Mat2 finite_difference_jacobian(const SectionPoint& q, const PhysParams& p, const MapOptions& opt) {
  const Vec2 x = q.vec();
  const Vec2 base_step{3e-6 * std::max(std::abs(q.u), std::sqrt(p.R)), 3e-6 * std::max(std::abs(q.pu), 1.0)};
  Mat2 J;
  for (int c = 0; c < 2; ++c) {
    auto central = [&](double h) {
      Vec2 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      return Vec2((returned_image(SectionPoint::from(xp, q.ell_s), p, opt) -
                   returned_image(SectionPoint::from(xm, q.ell_s), p, opt)) /
                  (2 * h));
    };
    const double h = base_step[c];
    const Vec2 coarse = central(h);
    const Vec2 fine = central(h / 2);
    J.col(c) = (4 * fine - coarse) / 3;
  }
  return J;
}

}  // namespace

Mat2 jacobian(const SectionPoint& q, const PhysParams& p, JacobianMethod method, const MapOptions& opt) {
  if (method == JacobianMethod::FiniteDifference) return finite_difference_jacobian(q, p, opt);
  const auto r = apply_with_jacobian(q, p, opt);
  if (r.outcome.kind == MapKind::Singular)
    throw Error(ErrorCode::SingularSection, "tangential crossing along the map trajectory");
  if (r.outcome.kind != MapKind::Returned)
    throw Error(ErrorCode::LostOrbit, "point does not return (" + std::string(to_string(r.outcome.kind)) + ")");
  return r.jacobian;
}

Eigen2 eigen2(const Mat2& A) {
  const double a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
  const double half_diff = (a - d) / 2;
  const double disc = half_diff * half_diff + b * c;
  Eigen2 e;
  if (disc < 0) return e;
  e.real = true;
  const double mean = (a + d) / 2;
  const double root = std::sqrt(disc);
  const double big = mean + std::copysign(root, mean == 0 ? 1.0 : mean);
  const double det = a * d - b * c;
  const double small = big != 0 ? det / big : mean - root;
  e.lambda1 = small;
  e.lambda2 = big;
  auto vec = [&](double lambda) {
    const Vec2 r1{b, lambda - a}, r2{lambda - d, c};
    Vec2 v = r1.norm() >= r2.norm() ? r1 : r2;
    if (v.norm() == 0) v = std::abs(a - lambda) <= std::abs(d - lambda) ? Vec2{1, 0} : Vec2{0, 1};
    return Vec2(v.normalized());
  };
  e.v1 = vec(e.lambda1);
  e.v2 = vec(e.lambda2);
  return e;
}

FixedPoint find_fixed_point(const SectionPoint& seed, const PhysParams& p, const MapOptions& opt) {
  // Residuals come from the plain flow; once below tolerance a few more
  // Newton steps are tried and the smallest residual is kept.
  constexpr int kPolishSteps = 3;
  SectionPoint q = seed;
  std::optional<FixedPoint> best;
  int polish = 0;
  for (int it = 0; it < kFixedPointMaxIter; ++it) {
    const auto r = apply_with_jacobian(q, p, opt);
    const auto plain = apply(q, p, opt);
    if (r.outcome.kind != MapKind::Returned || plain.kind != MapKind::Returned)
      throw Error(ErrorCode::LostOrbit, "Newton iterate " + std::to_string(it) + " did not return (" +
                                            std::string(to_string(plain.kind)) + ")");
    const Vec2 F = plain.point.vec() - q.vec();
    if (F.norm() <= kFixedPointTol && (!best || F.norm() < best->residual)) {
      FixedPoint fp;
      fp.point = q;
      fp.residual = F.norm();
      fp.iterations = it;
      fp.jacobian = r.jacobian;
      fp.eigen = eigen2(r.jacobian);
      fp.winding = plain.winding;
      best = fp;
    }
    if (best && polish++ >= kPolishSteps) break;
    const Vec2 delta = (r.jacobian - Mat2::Identity()).partialPivLu().solve(-F);
    q = SectionPoint::from(q.vec() + delta, q.ell_s);
  }
  if (!best)
    throw Error(ErrorCode::NoConvergence, "fixed-point Newton exceeded " + std::to_string(kFixedPointMaxIter) + " iterations");
  return *best;
}

std::vector<SectionPoint> area_curve(const AreaSpec& spec, double ell_s) {
  std::vector<SectionPoint> pts(static_cast<std::size_t>(spec.m));
  for (int j = 0; j < spec.m; ++j) {
    const double theta = 2 * std::numbers::pi * j / spec.m;
    pts[j] = {spec.u_c + spec.r_c * std::cos(theta), spec.r_c * std::sin(theta) / std::sqrt(spec.c), ell_s};
  }
  return pts;
}

double curve_area(const std::vector<double>& u, const std::vector<double>& pu) {
  // Centre the samples: the area is translation invariant and Green's
  // integrand loses fewer digits near the origin.
  const double n = static_cast<double>(u.size());
  const double uc = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double pc = std::accumulate(pu.begin(), pu.end(), 0.0) / n;
  std::vector<double> x(u.size() + 1), y(u.size() + 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    x[i] = u[i] - uc;
    y[i] = pu[i] - pc;
  }
  x.back() = x.front();
  y.back() = y.front();
  const auto theta = spline::chord_parameter(x, y);
  const spline::CubicSpline sx(theta, x, true), sy(theta, y, true);
  return spline::enclosed_area(sx, sy);
}

AreaResult area_experiment(const AreaSpec& spec, double ell_s, const PhysParams& p) {
  const auto curve = area_curve(spec, ell_s);
  const std::size_t m = curve.size();
  std::vector<MapOutcome> images(m);
  detail::parallel_for(m, spec.jobs, [&](std::size_t i) { images[i] = apply(curve[i], p); });
  for (std::size_t i = 0; i < m; ++i)
    if (images[i].kind != MapKind::Returned)
      throw Error(ErrorCode::SampleLost, "sample " + std::to_string(i) + " ended as " + std::string(to_string(images[i].kind)));

  std::vector<double> u0(m), p0(m), u1(m), p1(m), u_half, p_half;
  for (std::size_t i = 0; i < m; ++i) {
    u0[i] = curve[i].u;
    p0[i] = curve[i].pu;
    u1[i] = images[i].point.u;
    p1[i] = images[i].point.pu;
    if (i % 2 == 0) {
      u_half.push_back(u1[i]);
      p_half.push_back(p1[i]);
    }
  }
  AreaResult r;
  r.A0 = std::numbers::pi * spec.r_c * spec.r_c / std::sqrt(spec.c);
  r.A0_numeric = std::abs(curve_area(u0, p0));
  const double signed_a1 = curve_area(u1, p1);
  r.orientation = signed_a1 < 0 ? -1.0 : 1.0;
  r.A1 = std::abs(signed_a1);
  r.A1_half = std::abs(curve_area(u_half, p_half));
  r.quadrature_error = std::abs(r.A1 - r.A1_half);
  return r;
}

NodeClass classify_outcome(const MapOutcome& o) {
  switch (o.kind) {
    case MapKind::Returned: return NodeClass::D;
    case MapKind::Forbidden: return NodeClass::F;
    case MapKind::Collision: return NodeClass::C;
    case MapKind::Escape: return NodeClass::INF;
    case MapKind::Budget: return NodeClass::BUDGET;
    case MapKind::Singular: return NodeClass::SING;
  }
  return NodeClass::SING;
}

std::vector<ScanNode> scan_domain(const ScanSpec& spec, double ell_s, const PhysParams& p) {
  const int nx = std::max(spec.nx, 1), ny = std::max(spec.ny, 1);
  const double du = nx > 1 ? (spec.umax - spec.umin) / (nx - 1) : 0;
  const double dp = ny > 1 ? (spec.pumax - spec.pumin) / (ny - 1) : 0;
  std::vector<ScanNode> nodes(static_cast<std::size_t>(nx) * ny);
  detail::parallel_for(nodes.size(), spec.jobs, [&](std::size_t k) {
    const int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
    ScanNode& node = nodes[k];
    node.u = spec.umin + i * du;
    node.pu = spec.pumin + j * dp;
    const SectionPoint q{node.u, node.pu, ell_s};
    if (forbidden_class(q, p) != Domain::Admissible) {
      node.cls = NodeClass::F;
      return;
    }
    try {
      const auto o = apply(q, p);
      node.cls = classify_outcome(o);
      if (o.kind == MapKind::Returned) node.winding = o.winding;
    } catch (const Error&) {
      node.cls = NodeClass::SING;
    }
  });
  return nodes;
}

}  // namespace sunshadow::ssmap
