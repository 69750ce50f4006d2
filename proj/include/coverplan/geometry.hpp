#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace coverplan {

/// Meters, right-handed, z up. The ground plane is z = 0.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;

/// Axis-aligned rectangle in the ground plane.
struct Extent {
  Point2 min{0.0, 0.0};
  Point2 max{0.0, 0.0};

  bool contains(const Point2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

}  // namespace coverplan

namespace coverplan {

/// Half-line origin + t * direction, t > 0. `direction` is unit length.
struct Ray {
  Point3 origin;
  Vec3 direction;
};

}  // namespace coverplan
