#include <doctest.h>

#include <numbers>

#include "sunshadow/stark.hpp"
#include "support.hpp"
#include "period_oracle.hpp"
#include "taxonomy_oracle.hpp"

using namespace sunshadow;
using namespace sunshadow::stark;
using testing::rel_diff;

namespace {

const PhysParams P;

double to_ell(double L) { return L * P.mu; }
double to_hs(double H) { return H * std::sqrt(P.f * P.mu); }

std::pair<double, double> region_iv_draw(std::mt19937_64& g) {
  const double L = testing::uniform(g, -0.99, 0.99);
  const double edge = -std::sqrt(2 * (1 + L));
  return {to_ell(L), to_hs(edge - std::pow(10.0, testing::uniform(g, -4, 0.5)))};
}

}  // namespace

TEST_CASE("quartic structure examples") {
  const auto a = quartic_structure(-2 * P.mu, to_hs(0.3), P);
  CHECK(a.eta_real);
  CHECK(a.eta2.real() < 0);
  CHECK_FALSE(a.v2.has_value());
  CHECK(a.xi_real);
  CHECK(a.xi1.real() > 0);

  const auto b = quartic_structure(0, -std::sqrt(2 * P.f * P.mu), P);
  CHECK(b.xi_real);
  CHECK(rel_diff(b.xi1.real(), b.xi2.real()) < 1e-7);
}

TEST_CASE("roots reproduce the quartics") {
  auto g = testing::rng(21);
  for (int i = 0; i < 300; ++i) {
    const double ell = to_ell(testing::uniform(g, -3, 3)), hs = to_hs(testing::uniform(g, -6, 6));
    const auto q = quartic_structure(ell, hs, P);
    CAPTURE(ell);
    CAPTURE(hs);
    for (double x : {0.5, 1.0, 2.0}) {
      const double s = x * std::pow(P.mu / P.f, 0.25);
      const double s2 = s * s;
      const double scale = P.f * s2 * s2 + 2 * std::abs(hs) * s2 + 2 * (P.mu + std::abs(ell));
      const std::complex<double> Uf = P.f * (s2 - q.xi1) * (s2 - q.xi2);
      const std::complex<double> Vf = -P.f * (s2 - q.eta1) * (s2 - q.eta2);
      CHECK(std::abs(Uf - q.U(s, P)) < 1e-10 * scale);
      CHECK(std::abs(Vf - q.V(s, P)) < 1e-10 * scale);
    }
    const double scale = 2 * (P.mu + std::abs(ell));
    if (q.u1) CHECK(std::abs(q.U(*q.u1, P)) < 1e-10 * scale);
    if (q.u1) CHECK(std::abs(q.U(-*q.u1, P)) < 1e-10 * scale);
    if (q.v1) CHECK(std::abs(q.V(*q.v1, P)) < 1e-10 * scale);
    if (q.v1) CHECK(std::abs(q.V(-*q.v1, P)) < 1e-10 * scale);
  }
}

TEST_CASE("classification examples") {
  CHECK(classify(0.3 * P.mu, to_hs(-std::sqrt(2.6) - 0.1), P).label == Region::IV);
  CHECK(classify(0.3 * P.mu, to_hs(-std::sqrt(2.6) - 0.1), P).bounded_u_branch_exists);
  CHECK(classify(P.mu, to_hs(1.5), P).label == Region::B_II_III);
  CHECK(classify(P.mu, -2 * std::sqrt(P.f * P.mu), P).label == Region::P_II_IV);
  CHECK(classify(1.5 * P.mu, to_hs(0.5), P).label == Region::Forbidden);
  CHECK(classify(-800000, -1, P).label == Region::I);
}

TEST_CASE("root patterns agree with the taxonomy") {
  auto g = testing::rng(22);
  for (const auto r : oracle::kRegions) {
    CAPTURE(to_string(r));
    const auto table = oracle::table_pattern(r);
    const auto lib = expected_pattern(r);
    REQUIRE(lib.has_value());
    CHECK(oracle::matches(table, *lib));
    for (int i = 0; i < 100; ++i) {
      const auto [L, H] = oracle::sample(r, g);
      CAPTURE(L);
      CAPTURE(H);
      CHECK(classify(to_ell(L), to_hs(H), P).label == r);
      CHECK(oracle::matches(table, root_pattern(quartic_structure(to_ell(L), to_hs(H), P), P)));
      if (oracle::is_interior(r)) {
        CHECK(oracle::matches(table, oracle::interior_roots(L, H)));
      }
    }
  }
}

TEST_CASE("roots converge across a boundary") {
  // Approaching the II/IV boundary from both sides, xi1 and xi2 merge.
  const double L = 0.2, edge = -std::sqrt(2 * (1 + L));
  const auto on = quartic_structure(to_ell(L), to_hs(edge), P);
  for (double d : {1e-3, 1e-5, 1e-7}) {
    const auto below = quartic_structure(to_ell(L), to_hs(edge - d), P);
    const auto above = quartic_structure(to_ell(L), to_hs(edge + d), P);
    CHECK(std::abs(below.xi1 - on.xi1) < 10 * std::sqrt(d) * std::abs(on.xi1));
    CHECK(std::abs(above.xi1 - on.xi1) < 10 * std::sqrt(d) * std::abs(on.xi1));
  }
  // At ell = mu, eta1 reaches zero from both sides.
  for (double d : {1e-3, 1e-6}) {
    const auto inside = quartic_structure(P.mu * (1 - d), to_hs(-1), P);
    CHECK(std::abs(inside.eta1.real()) < 10 * d * std::sqrt(P.mu / P.f));
  }
}

TEST_CASE("zero-velocity points") {
  CHECK(zero_velocity_points(0.2 * P.mu, to_hs(1), P).empty());
  const double ell = 0.2 * P.mu, hs = to_hs(-std::sqrt(2.4) - 0.3);
  const auto iv = zero_velocity_points(ell, hs, P);
  REQUIRE(iv.size() == 4);
  for (const auto& z : iv) {
    const double r = std::hypot(z.x, z.y);
    CHECK(std::abs(hs + P.mu / r + P.f * z.x) < 1e-10 * (P.mu / r));
    bool mirrored = false;
    for (const auto& w : iv) mirrored |= rel_diff(w.x, z.x) < 1e-14 && rel_diff(w.y, -z.y) < 1e-14;
    CHECK(mirrored);
  }
  const auto i = zero_velocity_points(-1.5 * P.mu, to_hs(0.7), P);
  REQUIRE(i.size() == 2);
  for (const auto& z : i) {
    const double r = std::hypot(z.x, z.y);
    CHECK(std::abs(to_hs(0.7) + P.mu / r + P.f * z.x) < 1e-10 * (P.mu / r));
  }
}

TEST_CASE("periods against quadrature") {
  auto g = testing::rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto [ell, hs] = region_iv_draw(g);
    CAPTURE(ell);
    CAPTURE(hs);
    const double Tv = period_v(ell, hs, P), Tu = period_u(ell, hs, P);
    CHECK(rel_diff(Tv, oracle::period_v(ell, hs, P)) < 1e-10);
    CHECK(rel_diff(Tu, oracle::period_u(ell, hs, P)) < 1e-10);
    CHECK(Tv / Tu < 1);
  }
  // T_v exists outside region IV too.
  CHECK(rel_diff(period_v(0.4 * P.mu, to_hs(2), P), oracle::period_v(0.4 * P.mu, to_hs(2), P)) < 1e-10);
  CHECK_THROWS_AS(period_u(0.4 * P.mu, to_hs(2), P), Error);
}

TEST_CASE("T_u grows toward the separatrix") {
  const double ell = testing::kEll;
  const double hstar = brake_family(ell, P).hs_star;
  double prev = 0;
  for (double d : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    const double T = period_u(ell, hstar * (1 + d), P);
    CHECK(T > prev);
    prev = T;
  }
}

TEST_CASE("brake family closed forms") {
  const double ell = testing::kEll;
  const auto fam = brake_family(ell, P);
  // Direct evaluation with the default constants.
  CHECK(rel_diff(fam.hs_star, -std::sqrt(2 * P.f * (P.mu + ell))) < 1e-15);
  CHECK(fam.hs_star == doctest::Approx(-0.116743).epsilon(1e-5));
  CHECK(fam.xi_star == doctest::Approx(1.28008e7).epsilon(1e-5));
  CHECK(rel_diff(fam.u_star, std::pow(2 * (P.mu + ell) / P.f, 0.25)) < 1e-15);
  CHECK(rel_diff(fam.xi_star, fam.u_star * fam.u_star) < 1e-14);
  CHECK(fam.reduced_jacobian.determinant() < 0);
  CHECK(rel_diff(fam.reduced_jacobian.determinant(), -4 * P.f / fam.xi_star) < 1e-10);
  // u* ~ (mu + ell)^(1/4) as ell -> -mu.
  const double far = brake_family(-P.mu * (1 - 1e-4), P).u_star;
  const double near = brake_family(-P.mu * (1 - 1e-12), P).u_star;
  CHECK(rel_diff(near / far, 1e-2) < 1e-4);
  CHECK_THROWS_AS(brake_family(1.2 * P.mu, P), Error);
}

TEST_CASE("commensurable energies") {
  const double ell = testing::kEll;
  for (int den : {2, 3}) {
    const double h = commensurable_energy(ell, 1, den, P);
    CHECK(classify(ell, h, P).label == Region::IV);
    CHECK(std::abs(period_v(ell, h, P) / period_u(ell, h, P) - 1.0 / den) < 1e-10);
  }
  CHECK_THROWS_AS(commensurable_energy(ell, 2, 1, P), Error);
}
