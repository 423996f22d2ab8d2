#include "sunshadow/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sunshadow/detail/parallel.hpp"
#include "sunshadow/spline.hpp"

namespace sunshadow::manifolds {

std::size_t Primary::size() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.size();
  return n;
}

PlanarMap section_map(double ell_s, const PhysParams& p, bool inverse, bool with_jacobian) {
  return [ell_s, p, inverse, with_jacobian](const Vec2& x) {
    MapStep step;
    const auto q = ssmap::SectionPoint::from(x, ell_s);
    try {
      if (with_jacobian) {
        const auto r = ssmap::apply_with_jacobian(q, p, {}, inverse);
        step.returned = r.outcome.kind == ssmap::MapKind::Returned;
        step.image = r.outcome.point.vec();
        step.jacobian = r.jacobian;
      } else {
        const auto o = inverse ? ssmap::apply_inverse(q, p) : ssmap::apply(q, p);
        step.returned = o.kind == ssmap::MapKind::Returned;
        step.image = o.point.vec();
      }
    } catch (const Error&) {
      step.returned = false;
    }
    return step;
  };
}

Mfli mfli(const PlanarMap& map, const Vec2& q, const Vec2& w0, int horizon) {
  Mfli r;
  Vec2 x = q;
  Vec2 w = w0.normalized();
  for (int n = 1; n <= horizon; ++n) {
    const MapStep s = map(x);
    if (!s.returned) {
      r.truncated = true;
      break;
    }
    w = s.jacobian * w;
    r.value = std::max(r.value, std::log(w.norm()));
    r.iterations = n;
    x = s.image;
  }
  return r;
}

int default_primary_points(double lambda) {
  return static_cast<int>(std::ceil(std::log2(std::abs(lambda)))) + 2;
}

Primary init_primary(const PlanarMap& map, const Vec2& fp, const Vec2& psi, double lambda, double offset, int n) {
  if (n < 3) throw Error(ErrorCode::ConfigInvalid, "a primary needs at least three points");
  const Vec2 dir = psi.normalized();
  const Vec2 first = fp + offset * dir;
  const MapStep s = map(first);
  if (!s.returned) throw Error(ErrorCode::LinearRegimeViolated, "first primary point does not return");
  // Measured from the image of fp, so the fixed-point residual does not
  // count as nonlinearity, and relative to the linear displacement.
  const MapStep at_fp = map(fp);
  if (!at_fp.returned) throw Error(ErrorCode::LinearRegimeViolated, "fixed point does not return");
  const double linear = std::abs(lambda) * offset;
  const double remainder = (s.image - at_fp.image - lambda * (first - fp)).norm();
  if (remainder > kLinearRegimeTol * linear)
    throw Error(ErrorCode::LinearRegimeViolated,
                "second-order remainder " + std::to_string(remainder / linear) + " of the linear image");

  // Spacings a 2^i, scaled so that the law continued one more index lands
  // on lambda * offset.
  const double a = (lambda - 1) * offset / (std::ldexp(1.0, n) - 2);
  Component c;
  c.push_back({first, false});
  Vec2 x = first;
  for (int i = 1; i <= n - 2; ++i) {
    x += a * std::ldexp(1.0, i) * dir;
    c.push_back({x, false});
  }
  c.push_back({s.image, false});
  Primary v;
  v.components.push_back(std::move(c));
  return v;
}

namespace {

Vec2 local_tangent(const Component& c, std::size_t k) {
  const std::size_t lo = k > 0 ? k - 1 : k;
  const std::size_t hi = k + 1 < c.size() ? k + 1 : k;
  const Vec2 t = c[hi].x - c[lo].x;
  return t.norm() > 0 ? Vec2(t.normalized()) : Vec2(1, 0);
}

double local_spacing(const Component& c, std::size_t k) {
  double sum = 0;
  int n = 0;
  if (k > 0) {
    sum += (c[k].x - c[k - 1].x).norm();
    ++n;
  }
  if (k + 1 < c.size()) {
    sum += (c[k + 1].x - c[k].x).norm();
    ++n;
  }
  return n ? sum / n : 0;
}

}  // namespace

Component correct_component(const PlanarMap& mfli_map, const Component& c, const CorrectionOptions& opt) {
  if (c.size() < 2) return c;
  const int m = std::max(opt.samples | 1, 1);
  const int centre = m / 2;
  std::vector<Vec2> normal(c.size());
  std::vector<double> halfwidth(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Vec2 t = local_tangent(c, k);
    normal[k] = {-t[1], t[0]};
    halfwidth[k] = opt.halfwidth_factor * local_spacing(c, k);
  }
  auto candidate = [&](std::size_t k, int j) {
    const double s = m > 1 ? halfwidth[k] * (2.0 * j / (m - 1) - 1) : 0.0;
    return Vec2(c[k].x + s * normal[k]);
  };

  std::vector<Mfli> values(c.size() * m);
  detail::parallel_for(values.size(), opt.jobs, [&](std::size_t idx) {
    const std::size_t k = idx / m;
    const int j = static_cast<int>(idx % m);
    values[idx] = mfli(mfli_map, candidate(k, j), normal[k], opt.horizon);
  });

  Component out = c;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Mfli* row = &values[k * m];
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      if (row[j].iterations > 0) best = std::max(best, row[j].value);
    if (!std::isfinite(best))
      throw Error(ErrorCode::AllCandidatesLost, "every transverse candidate of point " + std::to_string(k) + " is lost");
    const auto tied = [&](int j) { return row[j].iterations > 0 && row[j].value >= best - opt.tie_tolerance; };
    if (tied(centre)) continue;
    int first = -1, last = -1;
    for (int j = 0; j < m; ++j) {
      if (!tied(j)) continue;
      if (first < 0) first = j;
      last = j;
    }
    int pick = (first + last) / 2;
    if (!tied(pick)) {
      // Tied set not contiguous: nearest tied sample to its middle.
      int nearest = first;
      for (int j = first; j <= last; ++j)
        if (tied(j) && std::abs(j - pick) < std::abs(nearest - pick)) nearest = j;
      pick = nearest;
    }
    out[k].x = candidate(k, pick);
  }
  return out;
}

Primary correct_primary(const PlanarMap& mfli_map, const Primary& v, const CorrectionOptions& opt) {
  Primary out = v;
  for (auto& c : out.components) c = correct_component(mfli_map, c, opt);
  return out;
}

namespace {

// Curve through the points of a component, parametrised by chord length:
// a natural cubic spline, or the segment itself for two points.
class ComponentCurve {
 public:
  explicit ComponentCurve(const Component& c) {
    std::vector<double> u, pu;
    for (const auto& s : c) {
      if (!u.empty() && s.x[0] == u.back() && s.x[1] == pu.back()) continue;
      u.push_back(s.x[0]);
      pu.push_back(s.x[1]);
    }
    theta_ = spline::chord_parameter(u, pu);
    u_ = u;
    pu_ = pu;
    if (theta_.size() >= 3) {
      su_.emplace(theta_, u, false);
      sp_.emplace(theta_, pu, false);
    }
  }

  const std::vector<double>& knots() const { return theta_; }

  Vec2 operator()(double t) const {
    if (su_) return {(*su_)(t), (*sp_)(t)};
    if (theta_.size() < 2) return {u_.front(), pu_.front()};
    const double w = (t - theta_[0]) / (theta_[1] - theta_[0]);
    return {u_[0] + w * (u_[1] - u_[0]), pu_[0] + w * (pu_[1] - pu_[0])};
  }

 private:
  std::vector<double> theta_, u_, pu_;
  std::optional<spline::CubicSpline> su_, sp_;
};

struct Node {
  double theta = 0;
  Vec2 x = Vec2::Zero();
  MapStep step;
};

void extend_box(Vec2& lo, Vec2& hi, const Vec2& x) {
  lo = lo.cwiseMin(x);
  hi = hi.cwiseMax(x);
}

// Maps every point of `v`, inserting spline points of `v` until consecutive
// images are closer than the chord bound or the refinement budget runs out.
// Returns the refined generation and its image.
std::pair<Primary, Primary> advance_generation(const PlanarMap& map, const Primary& v, Vec2 box_lo, Vec2 box_hi,
                                               const BranchOptions& opt) {
  std::vector<ComponentCurve> curves;
  std::vector<std::vector<Node>> nodes;
  for (const auto& c : v.components) {
    curves.emplace_back(c);
    std::vector<Node> ns;
    for (const double t : curves.back().knots()) ns.push_back({t, curves.back()(t), {}});
    nodes.push_back(std::move(ns));
  }

  auto map_all = [&](std::vector<Node*>& todo) {
    detail::parallel_for(todo.size(), opt.jobs, [&](std::size_t i) { todo[i]->step = map(todo[i]->x); });
  };
  {
    std::vector<Node*> todo;
    for (auto& ns : nodes)
      for (auto& n : ns) todo.push_back(&n);
    map_all(todo);
  }
  for (const auto& ns : nodes)
    for (const auto& n : ns)
      if (n.step.returned) extend_box(box_lo, box_hi, n.step.image);
  const double bound = opt.spacing_fraction * (box_hi - box_lo).norm();

  std::size_t total = 0;
  for (const auto& ns : nodes) total += ns.size();
  for (int depth = 0; depth < opt.max_refine_depth; ++depth) {
    std::vector<std::pair<std::size_t, std::size_t>> split;  // (component, left node)
    for (std::size_t ci = 0; ci < nodes.size(); ++ci) {
      const auto& ns = nodes[ci];
      for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
        const bool a = ns[k].step.returned, b = ns[k + 1].step.returned;
        const bool gap = a && b && (ns[k + 1].step.image - ns[k].step.image).norm() > bound;
        if (gap || a != b) split.emplace_back(ci, k);
      }
    }
    if (split.empty() || total + split.size() > opt.max_points) break;

    std::vector<Node> fresh(split.size());
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto [ci, k] = split[i];
      fresh[i].theta = (nodes[ci][k].theta + nodes[ci][k + 1].theta) / 2;
      fresh[i].x = curves[ci](fresh[i].theta);
    }
    std::vector<Node*> todo;
    for (auto& n : fresh) todo.push_back(&n);
    map_all(todo);

    std::size_t i = 0;
    for (std::size_t ci = 0; ci < nodes.size(); ++ci) {
      std::vector<Node> merged;
      for (std::size_t k = 0; k < nodes[ci].size(); ++k) {
        merged.push_back(nodes[ci][k]);
        if (i < split.size() && split[i].first == ci && split[i].second == k) merged.push_back(fresh[i++]);
      }
      nodes[ci] = std::move(merged);
    }
    total += fresh.size();
  }

  Primary refined, image;
  refined.generation = v.generation;
  image.generation = v.generation + 1;
  for (const auto& ns : nodes) {
    Component rc;
    Component run;
    for (const auto& n : ns) {
      rc.push_back({n.x, !n.step.returned});
      if (n.step.returned) {
        run.push_back({n.step.image, false});
      } else if (!run.empty()) {
        image.components.push_back(std::move(run));
        run.clear();
      }
    }
    if (!run.empty()) image.components.push_back(std::move(run));
    refined.components.push_back(std::move(rc));
  }
  return {std::move(refined), std::move(image)};
}

}  // namespace

Branch grow_branch(const PlanarMap& advance, const PlanarMap& mfli_map, const Vec2& fp, const Vec2& psi,
                   double lambda, Which which, const BranchOptions& opt) {
  Branch b;
  b.fixed_point = fp;
  b.eigvec = psi.normalized() * (opt.direction < 0 ? -1.0 : 1.0);
  b.lambda = lambda;
  b.which = which;
  b.direction = opt.direction < 0 ? -1 : 1;
  const int n = opt.points > 0 ? opt.points : default_primary_points(lambda);

  const double scale = std::max(fp.norm(), 1.0);
  std::optional<Primary> v0;
  for (double frac = opt.offset_fraction; !v0; frac /= 10) {
    try {
      b.offset = frac * scale;
      v0 = init_primary(advance, fp, b.eigvec, lambda, b.offset, n);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LinearRegimeViolated || frac / 10 < opt.min_offset_fraction) throw;
    }
  }
  b.primaries.push_back(std::move(*v0));

  Vec2 lo = fp, hi = fp;
  for (int g = 0; g < opt.generations; ++g) {
    Primary& current = b.primaries.back();
    if (g < opt.corrected_generations) current = correct_primary(mfli_map, current, opt.correction);
    for (const auto& c : current.components)
      for (const auto& s : c) extend_box(lo, hi, s.x);
    auto [refined, next] = advance_generation(advance, current, lo, hi, opt);
    current = std::move(refined);
    if (next.components.empty())
      throw Error(ErrorCode::BranchExtinct, "generation " + std::to_string(g + 1) + " lost every point");
    b.primaries.push_back(std::move(next));
  }
  return b;
}

Branch grow_section_branch(const ssmap::FixedPoint& fp, Which which, double ell_s, const PhysParams& p,
                           const BranchOptions& opt) {
  if (!fp.eigen.real || !(fp.eigen.lambda1 > 0 && fp.eigen.lambda1 < 1 && fp.eigen.lambda2 > 1))
    throw Error(ErrorCode::ConfigInvalid, "fixed point is not a saddle with positive eigenvalues");
  const bool unstable = which == Which::Unstable;
  const auto advance = section_map(ell_s, p, !unstable, false);
  const auto indicator = section_map(ell_s, p, unstable, true);
  Vec2 psi = unstable ? fp.eigen.v2 : fp.eigen.v1;
  if (psi[0] * fp.point.u > 0) psi = -psi;
  const double lambda = unstable ? fp.eigen.lambda2 : 1 / fp.eigen.lambda1;
  return grow_branch(advance, indicator, fp.point.vec(), psi, lambda, which, opt);
}

double polyline_distance(const Primary& v, const Vec2& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : v.components) {
    if (c.size() == 1) best = std::min(best, (c[0].x - x).norm());
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
      const Vec2 a = c[k].x, d = c[k + 1].x - a;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0 ? std::clamp((x - a).dot(d) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, (a + t * d - x).norm());
    }
  }
  return best;
}

}  // namespace sunshadow::manifolds
