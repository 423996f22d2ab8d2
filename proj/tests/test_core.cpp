#include <doctest.h>

#include <numbers>

#include "sunshadow/core.hpp"
#include "support.hpp"

using namespace sunshadow;
using testing::rel_diff;

namespace {

CartesianState<double> random_state(std::mt19937_64& g) {
  CartesianState<double> s;
  s.x = testing::uniform(g, -3e4, 3e4);
  s.y = testing::uniform(g, -3e4, 3e4);
  s.px = testing::uniform(g, -6, 6);
  s.py = testing::uniform(g, -6, 6);
  s.t = testing::uniform(g, 0, 1e5);
  return s;
}

}  // namespace

TEST_CASE("parameter validation") {
  PhysParams p;
  CHECK_NOTHROW(p.validate());
  auto rejects = [](PhysParams q) {
    try {
      q.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigInvalid;
    }
    return false;
  };
  PhysParams q = p;
  q.r_escape = q.R;
  CHECK(rejects(q));
  q = p;
  q.mu = -1;
  CHECK(rejects(q));
  q = p;
  q.f = 2 * q.mu / (q.R * q.R);
  CHECK(rejects(q));
}

TEST_CASE("to_parabolic on the axis and on the y axis") {
  const auto a = to_parabolic(CartesianState<double>{2, 0, 0, 1, 0}, Branch::Plus);
  CHECK(a.u == doctest::Approx(2));
  CHECK(a.v == doctest::Approx(0));
  CHECK(a.pu == doctest::Approx(0));
  CHECK(a.pv == doctest::Approx(2));

  const double r2 = std::sqrt(2.0);
  const auto b = to_parabolic(CartesianState<double>{0, 2, 1, 0, 0}, Branch::Plus);
  CHECK(b.u == doctest::Approx(r2));
  CHECK(b.v == doctest::Approx(r2));
  CHECK(b.pu == doctest::Approx(r2));
  CHECK(b.pv == doctest::Approx(-r2));
}

TEST_CASE("to_cartesian examples") {
  const auto a = to_cartesian(ParabolicState<double>{1, 0, 0, 1, 0, 0});
  CHECK(a.x == doctest::Approx(0.5));
  CHECK(a.y == doctest::Approx(0));
  CHECK(a.px == doctest::Approx(0));
  CHECK(a.py == doctest::Approx(1));

  const double r2 = std::sqrt(2.0);
  const auto b = to_cartesian(ParabolicState<double>{r2, r2, r2, -r2, 0, 0});
  CHECK(b.x == doctest::Approx(0).epsilon(1e-12));
  CHECK(b.y == doctest::Approx(2));
  CHECK(b.px == doctest::Approx(1));
  CHECK(b.py == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(to_parabolic(CartesianState<double>{0, 0, 1, 1, 0}, Branch::Plus), Error);
  CHECK_THROWS_AS(to_cartesian(ParabolicState<double>{0, 0, 1, 1, 0, 0}), Error);
}

TEST_CASE("round trips between the coordinate systems") {
  auto g = testing::rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_state(g);
    const auto branch = i % 2 ? Branch::Plus : Branch::Minus;
    const auto back = to_cartesian(to_parabolic(s, branch));
    CHECK(rel_diff(back.x, s.x, 1e4) < 1e-13);
    CHECK(rel_diff(back.y, s.y, 1e4) < 1e-13);
    CHECK(rel_diff(back.px, s.px, 1) < 1e-13);
    CHECK(rel_diff(back.py, s.py, 1) < 1e-13);
    CHECK(back.t == s.t);

    const auto q = to_parabolic(s, branch);
    const auto again = to_parabolic(to_cartesian(q), q.u >= 0 ? Branch::Plus : Branch::Minus);
    CHECK(rel_diff(again.u, q.u, 1) < 1e-12);
    CHECK(rel_diff(again.v, q.v, 1) < 1e-12);
    CHECK(rel_diff(again.pu, q.pu, 1) < 1e-12);
    CHECK(rel_diff(again.pv, q.pv, 1) < 1e-12);
  }
}

TEST_CASE("time rate") {
  CHECK(time_rate(ParabolicState<double>{1, 0, 0, 0, 0, 0}) == 1);
  CHECK(time_rate(ParabolicState<double>{3, 4, 0, 0, 0, 0}) == 25);
  auto g = testing::rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_state(g);
    CHECK(rel_diff(time_rate(to_parabolic(s, Branch::Plus)), 2 * std::hypot(s.x, s.y)) < 1e-13);
  }
}

TEST_CASE("integrals of simple states") {
  PhysParams p;
  const double r0 = 7000;
  const CartesianState<double> circ{r0, 0, 0, std::sqrt(p.mu / r0), 0};
  const auto I = integrals(to_parabolic(circ, Branch::Plus), p);
  CHECK(rel_diff(I.h_k, -p.mu / (2 * r0)) < 1e-14);
  CHECK(rel_diff(I.c_k, std::sqrt(p.mu * r0)) < 1e-14);

  const CartesianState<double> rest{-5000, 12000, 0, 0, 0};
  const auto J = integrals(to_parabolic(rest, Branch::Plus), p);
  CHECK(rel_diff(J.h_s, -p.mu / 13000 - p.f * rest.x) < 1e-14);
}

TEST_CASE("integral identities on random states") {
  PhysParams p;
  auto g = testing::rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto c = random_state(g);
    const auto s = to_parabolic(c, Branch::Plus);
    const auto I = integrals(s, p);
    const auto K = cartesian_integrals(c, p);
    CAPTURE(i);
    const double A2 = I.A_k.squaredNorm();
    CHECK(rel_diff(A2, p.mu * p.mu + 2 * I.h_k * I.c_k * I.c_k) < 1e-12);
    CHECK(rel_diff(I.h_k, K.h_k) < 1e-12);
    CHECK(rel_diff(I.h_s, K.h_s) < 1e-12);
    CHECK(rel_diff(I.c_k, K.c_k) < 1e-12);
    CHECK(rel_diff(I.ell_s, K.ell_s, p.mu) < 1e-12);
    CHECK(rel_diff(I.ell_k, -I.A_k.x(), p.mu) < 1e-12);

    // Separated forms of both regimes.
    const double u2 = s.u * s.u, v2 = s.v * s.v;
    const double scale = s.pu * s.pu + s.pv * s.pv + 4 * p.mu;
    CHECK(std::abs(s.pu * s.pu - 2 * (I.h_k * u2 + p.mu) - 2 * I.ell_k) < 1e-12 * scale);
    CHECK(std::abs(s.pv * s.pv - 2 * (I.h_k * v2 + p.mu) + 2 * I.ell_k) < 1e-12 * scale);
    const double scale_s = scale + p.f * (u2 * u2 + v2 * v2);
    CHECK(std::abs(s.pu * s.pu - (p.f * u2 * u2 + 2 * I.h_s * u2 + 2 * (p.mu + I.ell_s))) < 1e-12 * scale_s);
    CHECK(std::abs(s.pv * s.pv - (-p.f * v2 * v2 + 2 * I.h_s * v2 + 2 * (p.mu - I.ell_s))) < 1e-12 * scale_s);
  }
}

TEST_CASE("momentum map is a bijection at fixed position") {
  auto g = testing::rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto c = random_state(g);
    const auto s = to_parabolic(c, Branch::Plus);
    Mat2 M;
    M << s.u, s.v, -s.v, s.u;
    CHECK(std::abs(M.determinant()) > 0);
    const Vec2 p = M * Vec2{c.px, c.py};
    CHECK(rel_diff(p[0], s.pu, 1) < 1e-13);
    CHECK(rel_diff(p[1], s.pv, 1) < 1e-13);
  }
}
