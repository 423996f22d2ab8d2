#include <doctest.h>

#include <numbers>

#include "sunshadow/brake.hpp"
#include "sunshadow/ssmap.hpp"
#include "support.hpp"

using namespace sunshadow;
using namespace sunshadow::ssmap;
using testing::rel_diff;

namespace {

const PhysParams P;
constexpr double kEll = testing::kEll;

// Right-hand side of the p_v^2 <= 0 boundary in (u, p_u).
double pv_boundary(double u, double ell) {
  const double R2 = P.R * P.R;
  return 2 * (P.mu + ell) + P.f * R2 + (P.f - 2 * (P.mu - ell) / R2) * std::pow(u, 4);
}

std::vector<SectionPoint> returned_points(std::uint64_t seed, int count, double umin = 2500, double umax = 4500) {
  auto g = testing::rng(seed);
  std::vector<SectionPoint> out;
  while (static_cast<int>(out.size()) < count) {
    const SectionPoint q{testing::uniform(g, umin, umax), testing::uniform(g, -300, 300), kEll};
    if (forbidden_class(q, P) != Domain::Admissible) continue;
    if (apply(q, P).kind == MapKind::Returned) out.push_back(q);
  }
  return out;
}

const FixedPoint& upsilon1() {
  static const FixedPoint fp = [] {
    const auto b = brake::solve_brake(kEll, P);
    return find_fixed_point({std::sqrt(b.xiE), -b.puE, kEll}, P);
  }();
  return fp;
}

}  // namespace

TEST_CASE("forbidden set examples") {
  CHECK(forbidden_class({50, 10, kEll}, P) == Domain::GuardViolated);
  CHECK(forbidden_class({3000, 1000, kEll}, P) == Domain::Admissible);

  // The p_v^2 <= 0 band only reaches u ~ 157 at this ell_s.
  const double u = 120;
  const double edge = std::sqrt(pv_boundary(u, kEll));
  CHECK(std::abs(lifted_pv_squared({u, edge, kEll}, P)) <= 1e-9 * edge * edge);
  CHECK(forbidden_class({u, edge * (1 - 1e-9), kEll}, P) == Domain::PvNonPositive);
  CHECK(forbidden_class({u, edge * (1 + 1e-9), kEll}, P) == Domain::Admissible);

  // Quadrant II above the u^4 bound is admissible for ell_s < mu - f R^2 / 2.
  CHECK(kEll < P.mu - P.f * P.R * P.R / 2);
  CHECK(forbidden_class({3581, -2.35, kEll}, P) == Domain::Admissible);
  CHECK(forbidden_class({-3581, 2.35, kEll}, P) == Domain::Admissible);

  // Beyond mu - f R^2 / 2 every quadrant II point is forbidden.
  const double high = P.mu - P.f * P.R * P.R / 4;
  const SectionPoint q2{3000, -2000, high};
  REQUIRE(lifted_pv_squared(q2, P) > 0);
  CHECK(forbidden_class(q2, P) == Domain::OutwardViolated);
  CHECK(forbidden_class({3000, 2000, high}, P) == Domain::Admissible);
}

TEST_CASE("forbidden set against the section conditions") {
  auto g = testing::rng(41);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const double ell = testing::uniform(g, -0.9 * P.mu, 0.99 * P.mu);
    const SectionPoint q{testing::uniform(g, -6000, 6000), testing::uniform(g, -3000, 3000), ell};
    const double pv2 = lifted_pv_squared(q, P);
    const double margin_pv = q.pu * q.pu - pv_boundary(q.u, ell);
    if (std::abs(margin_pv) < 1e-9 * (q.pu * q.pu + std::abs(pv_boundary(q.u, ell)))) continue;
    bool forbidden = std::abs(q.u) < std::sqrt(P.R) || margin_pv <= 0;
    if (!forbidden) {
      const double pv = std::copysign(std::sqrt(pv2), q.u);
      const double v = P.R / q.u;
      const double lhs = q.u * pv, rhs = std::max(0.0, -q.pu * v);
      if (std::abs(lhs - rhs) < 1e-9 * std::abs(lhs)) continue;
      forbidden = !(lhs > rhs);
    }
    CAPTURE(q.u);
    CAPTURE(q.pu);
    CAPTURE(ell);
    CHECK((forbidden_class(q, P) != Domain::Admissible) == forbidden);
    ++checked;
  }
  CHECK(checked > 19000);
}

TEST_CASE("lift") {
  auto g = testing::rng(42);
  for (int i = 0; i < 1000; ++i) {
    const SectionPoint q{testing::uniform(g, -5000, 5000), testing::uniform(g, -2000, 2000), kEll};
    if (forbidden_class(q, P) != Domain::Admissible) {
      CHECK_THROWS_AS(lift(q, P), Error);
      continue;
    }
    const auto s = lift(q, P);
    CHECK(rel_diff(phase::stark_ell(s.phase(), P.mu, P.f), kEll) <= 1e-12);
    CHECK(std::abs(s.u * s.v - P.R) <= 1e-12 * P.R);
    CHECK(s.u * s.pv > 0);
    CHECK(to_cartesian(s).py > 0);

    const auto L = lift_jacobian(q, P);
    for (int k = 0; k < 2; ++k) {
      const double e = 1e-6 * std::max(1.0, std::abs(q.vec()[k]));
      Vec2 up = q.vec(), dn = q.vec();
      up[k] += e;
      dn[k] -= e;
      const auto a = SectionPoint::from(up, kEll), b = SectionPoint::from(dn, kEll);
      if (forbidden_class(a, P) != Domain::Admissible || forbidden_class(b, P) != Domain::Admissible) continue;
      const Vec4 fd = (lift(a, P).phase() - lift(b, P).phase()) / (2 * e);
      CHECK((L.col(k) - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("winding number of closed loops") {
  const double xs = 1000, xe = 5000;
  const double chord = std::atan2(P.R, xe) - std::atan2(P.R, xs);
  CHECK(winding_number(0, xs, xs, P) == 0);
  CHECK(winding_number(std::numbers::pi, xs, xs, P) == 1);
  CHECK(winding_number(-2 * std::numbers::pi, xs, xs, P) == -2);
  CHECK(winding_number((2 * std::numbers::pi + chord) / 2, xs, xe, P) == 1);
  CHECK(winding_number(chord / 2, xs, xe, P) == 0);
}

TEST_CASE("returned points lie on the section") {
  auto g = testing::rng(43);
  int returned = 0;
  for (int i = 0; i < 200 && returned < 50; ++i) {
    const SectionPoint q{testing::uniform(g, 2000, 4500), testing::uniform(g, -500, 500), kEll};
    const auto o = apply(q, P);
    if (forbidden_class(q, P) != Domain::Admissible) {
      CHECK(o.kind == MapKind::Forbidden);
      continue;
    }
    if (o.kind != MapKind::Returned) continue;
    ++returned;
    const auto& s = o.final;
    CHECK(std::abs(s.u) >= std::sqrt(P.R));
    CHECK(std::abs(s.u * s.v - P.R) <= 1e-10 * P.R);
    CHECK(s.u * s.pv > std::max(0.0, -s.pu * s.v));
    CHECK(rel_diff(phase::stark_ell(s.phase(), P.mu, P.f), kEll) <= 1e-9);
    CHECK(o.point.u == s.u);
    CHECK(o.point.pu == s.pu);
    CHECK(forbidden_class(o.point, P) == Domain::Admissible);
    CHECK(o.elapsed_t > 0);
  }
  CHECK(returned == 50);
}

TEST_CASE("inverse map undoes the map") {
  for (const auto& q : returned_points(44, 15)) {
    const auto fwd = apply(q, P);
    const auto back = apply_inverse(fwd.point, P);
    REQUIRE(back.kind == MapKind::Returned);
    CHECK(rel_diff(back.point.u, q.u) <= 1e-7);
    CHECK(std::abs(back.point.pu - q.pu) <= 1e-7 * q.vec().norm());
    CHECK(back.winding == fwd.winding);
  }
}

TEST_CASE("winding is stable under step refinement") {
  const double step = propagate::default_step(kEll, P);
  for (const auto& q : returned_points(45, 10)) {
    const auto a = apply(q, P);
    MapOptions half;
    half.step = step / 2;
    const auto b = apply(q, P, half);
    REQUIRE(b.kind == MapKind::Returned);
    CHECK(a.winding == b.winding);
  }
}

TEST_CASE("variational Jacobian against finite differences") {
  for (const auto& q : returned_points(46, 20)) {
    const Mat2 J = jacobian(q, P);
    const Mat2 F = jacobian(q, P, JacobianMethod::FiniteDifference);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CAPTURE(q.u);
        CAPTURE(q.pu);
        CHECK(rel_diff(J(i, j), F(i, j)) <= 1e-5);
      }
  }
}

TEST_CASE("closed-form 2x2 eigen-decomposition") {
  auto g = testing::rng(47);
  for (int i = 0; i < 500; ++i) {
    Mat2 A;
    A << testing::uniform(g, -5, 5), testing::uniform(g, -5, 5), testing::uniform(g, -5, 5), testing::uniform(g, -5, 5);
    const auto e = eigen2(A);
    const double disc = std::pow(A.trace(), 2) - 4 * A.determinant();
    CHECK(e.real == (disc >= 0));
    if (!e.real) continue;
    CHECK(std::abs(e.lambda1) <= std::abs(e.lambda2));
    CHECK((A * e.v1 - e.lambda1 * e.v1).norm() <= 1e-12 * A.norm() * e.v1.norm());
    CHECK((A * e.v2 - e.lambda2 * e.v2).norm() <= 1e-12 * A.norm() * e.v2.norm());
  }
  Mat2 near;
  near << 6478.5, 1e-3, 0, 1.5e-4;
  const auto e = eigen2(near);
  CHECK(rel_diff(e.lambda1, 1.5e-4) < 1e-12);
  CHECK(rel_diff(e.lambda2, 6478.5) < 1e-15);
}

TEST_CASE("hyperbolic fixed points") {
  const auto& fp = upsilon1();
  CHECK(fp.residual <= 1e-10);
  const auto again = apply(fp.point, P);
  REQUIRE(again.kind == MapKind::Returned);
  CHECK((again.point.vec() - fp.point.vec()).norm() <= 1e-10);
  REQUIRE(fp.eigen.real);
  CHECK(fp.eigen.lambda1 > 0);
  CHECK(fp.eigen.lambda1 < 1);
  CHECK(fp.eigen.lambda2 > 1);
  CHECK(fp.point.u > 0);
  CHECK(fp.point.pu < 0);

  const auto fp2 = find_fixed_point({-fp.point.u, -fp.point.pu, kEll}, P);
  CHECK(fp2.residual <= 1e-10);
  CHECK((fp2.point.vec() + fp.point.vec()).norm() <= 1e-8 * fp.point.vec().norm());
  CHECK(rel_diff(fp2.eigen.lambda1, fp.eigen.lambda1) < 1e-4);
  CHECK(rel_diff(fp2.eigen.lambda2, fp.eigen.lambda2) < 1e-4);
}

TEST_CASE("stable direction contracts") {
  const auto& fp = upsilon1();
  auto shrink = [&](double offset) {
    const Vec2 q = fp.point.vec() + offset * fp.eigen.v1.normalized();
    const auto o = apply(SectionPoint::from(q, kEll), P);
    REQUIRE(o.kind == MapKind::Returned);
    return (o.point.vec() - fp.point.vec()).norm() / offset;
  };
  const double coarse = shrink(1e-3);
  CHECK(coarse < 10 * fp.eigen.lambda1);
  // Closer in, the ratio approaches the stable eigenvalue.
  const double fine = shrink(1e-5);
  CAPTURE(fine);
  CHECK(rel_diff(fine, fp.eigen.lambda1) < 0.25);
}

TEST_CASE("area pipeline on known curves") {
  for (const double c : {1.0, 4.0}) {
    AreaSpec spec;
    spec.c = c;
    spec.m = 4000;
    const auto curve = area_curve(spec, kEll);
    REQUIRE(curve.size() == 4000u);
    std::vector<double> u, pu;
    for (const auto& q : curve) {
      CHECK(std::abs(c * q.pu * q.pu + std::pow(q.u - spec.u_c, 2) - spec.r_c * spec.r_c) <= 1e-9 * spec.r_c * spec.r_c);
      u.push_back(q.u);
      pu.push_back(q.pu);
    }
    const double exact = std::numbers::pi * spec.r_c * spec.r_c / std::sqrt(c);
    CHECK(rel_diff(std::abs(curve_area(u, pu)), exact) <= 1e-6);
  }
  // Unit square traversed counter-clockwise in (u, p_u).
  const std::vector<double> su{0, 1, 1, 0}, sp{0, 0, 1, 1};
  CHECK(curve_area(su, sp) > 0);
}

TEST_CASE("scan classes agree with the closed-form tests") {
  ScanSpec spec{100, 4500, -600, 600, 24, 12, 1};
  const auto nodes = scan_domain(spec, kEll, P);
  REQUIRE(nodes.size() == 24u * 12u);
  int forbidden = 0, returned = 0;
  for (const auto& n : nodes) {
    const SectionPoint q{n.u, n.pu, kEll};
    const bool closed_form = forbidden_class(q, P) != Domain::Admissible;
    CHECK((n.cls == NodeClass::F) == closed_form);
    CHECK(n.winding.has_value() == (n.cls == NodeClass::D));
    if (n.cls == NodeClass::F) {
      ++forbidden;
      const bool pv = n.pu * n.pu <= pv_boundary(n.u, kEll);
      const bool guard = std::abs(n.u) < std::sqrt(P.R);
      const double k4 = 2 * (P.mu - kEll) - P.f * P.R * P.R;
      const bool quadrant = n.u * n.pu < 0 && std::pow(n.u, 4) <= (2 * (P.mu + kEll) + P.f * P.R * P.R) * P.R * P.R / k4;
      CHECK((pv || guard || quadrant));
    }
    if (n.cls == NodeClass::D) ++returned;
  }
  CHECK(forbidden > 0);
  CHECK(returned > 0);
  CHECK(nodes[1].u == doctest::Approx(100 + 4400.0 / 23));
  CHECK(nodes[24].pu == doctest::Approx(-600 + 1200.0 / 11));
}
