#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace dynoct {

using Vec3 = std::array<double, 3>;
using PointId = std::uint64_t;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt(squared_distance(a, b));
}

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

/// Axis-aligned box. Interior membership follows the half-open convention
/// [min, max) per axis; closures at the tree's outer boundary are handled by
/// the octree itself, which knows the root box.
struct Aabb {
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{1.0, 1.0, 1.0};

  Vec3 center() const {
    return {0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1]),
            0.5 * (min[2] + max[2])};
  }

  bool non_degenerate() const {
    return min[0] < max[0] && min[1] < max[1] && min[2] < max[2];
  }

  /// Closed containment on all faces; used for root-bounds checks.
  bool contains_closed(const Vec3& p) const {
    for (int i = 0; i < 3; ++i) {
      if (p[i] < min[i] || p[i] > max[i]) return false;
    }
    return true;
  }

  /// Smallest squared distance from p to any point of the box (0 inside).
  double min_squared_distance(const Vec3& p) const {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = 0.0;
      if (p[i] < min[i]) {
        d = min[i] - p[i];
      } else if (p[i] > max[i]) {
        d = p[i] - max[i];
      }
      d2 += d * d;
    }
    return d2;
  }

  /// Smallest squared distance between any two points of the boxes.
  double min_squared_distance(const Aabb& o) const {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = 0.0;
      if (o.max[i] < min[i]) {
        d = min[i] - o.max[i];
      } else if (o.min[i] > max[i]) {
        d = o.min[i] - max[i];
      }
      d2 += d * d;
    }
    return d2;
  }
};

}  // namespace dynoct
