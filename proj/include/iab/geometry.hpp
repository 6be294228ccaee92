#pragma once

#include <cmath>
#include <numbers>

namespace iab {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Horizontal velocity of a U-UAV, distance units per slot unit.
struct Velocity {
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const Velocity&, const Velocity&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

inline double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Elevation angle in degrees seen between two points, from the height gap.
inline double elevation_deg(const Vec3& a, const Vec3& b) {
  const double d = distance(a, b);
  const double s = std::abs(a.z - b.z) / d;
  return std::asin(s > 1.0 ? 1.0 : s) * 180.0 / std::numbers::pi;
}

}  // namespace iab
