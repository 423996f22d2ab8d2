#pragma once

#include <cmath>
#include <random>

#include "sunshadow/core.hpp"

namespace testing {

inline double rel_diff(double a, double b, double floor = 0) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return scale > 0 ? std::abs(a - b) / scale : 0.0;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline constexpr double kEll = 348600;

}  // namespace testing
