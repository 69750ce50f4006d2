#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coverplan/geometry.hpp"
#include "coverplan/scene.hpp"

namespace coverplan {

using Triangle = std::array<Point3, 3>;

/// Barycentric slack accepted by the ray/triangle test.
inline constexpr double kBarycentricEpsilon = 1e-9;
/// Hits closer than this to the ray origin are ignored.
inline constexpr double kMinHitDistance = 1e-9;

struct TriangleHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
};

/// Moller-Trumbore, two-sided. Returns the ray parameter of the hit when it
/// lies in (kMinHitDistance, t_max].
std::optional<double> intersect_triangle(const Ray& ray, const Triangle& tri, double t_max);

/// Binary bounding-volume hierarchy over a triangle soup.
///
/// Nodes are split at the centroid median of the widest axis until a leaf
/// holds at most four triangles. Immutable after construction; concurrent
/// queries are safe.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(std::vector<Triangle> triangles);

  /// Nearest triangle hit with t <= t_max. Ties keep the lowest t found first.
  std::optional<TriangleHit> nearest_hit(const Ray& ray, double t_max) const;

  std::span<const Triangle> triangles() const { return triangles_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
    std::uint32_t first = 0;  // first triangle (leaf) or left child (inner)
    std::uint32_t count = 0;  // triangle count; 0 marks an inner node
    std::uint32_t right = 0;  // right child (inner)
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Point3>& centroids);

  std::vector<Triangle> triangles_;
  std::vector<Node> nodes_;
};

/// All obstacle triangles of the scene. The ground plane stays analytic.
Bvh build_bvh(const Scene& scene);

}  // namespace coverplan
