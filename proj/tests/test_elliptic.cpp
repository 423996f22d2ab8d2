#include <doctest.h>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_rf.hpp>

#include <numbers>

#include "sunshadow/elliptic.hpp"
#include "support.hpp"

using namespace sunshadow::elliptic;
using testing::rel_diff;

TEST_CASE("agm of equal and classical arguments") {
  CHECK(agm(3.5, 3.5) == doctest::Approx(3.5));
  // Gauss's constant: 1 / M(1, sqrt 2).
  CHECK(rel_diff(1 / agm(1, std::sqrt(2.0)), 0.8346268416740731862814297) < 1e-15);
  CHECK(agm(2, 0) == 0);
}

TEST_CASE("carlson R_F against Boost") {
  auto g = testing::rng(11);
  for (int i = 0; i < 200; ++i) {
    const double x = testing::uniform(g, 0, 10), y = testing::uniform(g, 0.1, 10), z = testing::uniform(g, 0.1, 10);
    CHECK(rel_diff(carlson_rf(x, y, z), boost::math::ellint_rf(x, y, z)) < 1e-14);
  }
  CHECK(rel_diff(carlson_rf(0, 1, 2), boost::math::ellint_rf(0.0, 1.0, 2.0)) < 1e-14);
}

TEST_CASE("first-kind integrals against Boost") {
  auto g = testing::rng(12);
  for (int i = 0; i < 200; ++i) {
    const double m = testing::uniform(g, -3, 0.999), phi = testing::uniform(g, 0, std::numbers::pi / 2);
    if (m >= 0) {
      const double k = std::sqrt(m);
      CHECK(rel_diff(ellint_f(phi, m), boost::math::ellint_1(k, phi)) < 1e-13);
      CHECK(rel_diff(ellint_k(m), boost::math::ellint_1(k)) < 1e-13);
    } else {
      // Imaginary modulus: F(phi | m) = (1 - m)^(-1/2) F(theta | m / (m - 1)).
      const double m2 = m / (m - 1);
      const double theta = std::asin(std::sqrt(1 - m) * std::sin(phi) / std::sqrt(1 - m * std::sin(phi) * std::sin(phi)));
      CHECK(rel_diff(ellint_f(phi, m), boost::math::ellint_1(std::sqrt(m2), theta) / std::sqrt(1 - m)) < 1e-12);
    }
  }
}
