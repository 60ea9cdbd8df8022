#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dynoct/geometry.hpp"

namespace dynoct::rng {

// Explicit mappings from mt19937_64 output to doubles so that a seed fully
// determines every generated value independent of the standard library's
// distribution implementations.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
  return g() % n;
}

/// Box-Muller without a cached spare: two engine draws per sample.
inline double normal(std::mt19937_64& g) {
  double u1 = uniform01(g);
  if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
  const double u2 = uniform01(g);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline Vec3 normal_vec3(std::mt19937_64& g) {
  const double x = normal(g);
  const double y = normal(g);
  const double z = normal(g);
  return {x, y, z};
}

inline Vec3 uniform_vec3(std::mt19937_64& g, const Aabb& box) {
  const double x = uniform(g, box.min[0], box.max[0]);
  const double y = uniform(g, box.min[1], box.max[1]);
  const double z = uniform(g, box.min[2], box.max[2]);
  return {x, y, z};
}

}  // namespace dynoct::rng
