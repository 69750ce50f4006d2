#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "coverplan/geometry.hpp"

namespace coverplan {

/// Indexed triangle soup. Vertex coordinates are world-space meters.
struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Checks index bounds, finiteness and triangle area (> 1e-12 m^2).
/// Throws SceneError naming the mesh and offending triangle or vertex.
void validate_mesh(const TriangleMesh& mesh, std::size_t mesh_index);

/// Simple polygon in the ground plane, stored counter-clockwise.
///
/// Construction validates the boundary: at least three vertices, finite
/// coordinates, no self-intersection and positive area. A clockwise ring is
/// reversed rather than rejected.
class RoadPolygon {
 public:
  RoadPolygon() = default;
  explicit RoadPolygon(std::vector<Point2> boundary);

  const std::vector<Point2>& boundary() const { return boundary_; }
  double area() const;

  /// Shortest distance from p to any boundary edge.
  double distance_to_boundary(const Point2& p) const;
  bool on_boundary(const Point2& p) const;

 private:
  std::vector<Point2> boundary_;
};

struct Scene {
  std::vector<TriangleMesh> obstacles;
  RoadPolygon road;
  Extent extent;
};

/// Uniform target samples strictly inside the road, all at z = 0.
struct TargetGrid {
  std::vector<Point3> points;
  double spacing = 0.0;
  double radius = 0.0;
};

struct CandidatePose {
  Point3 position;
  std::size_t index = 0;
};

/// Strict containment: points on the boundary are outside.
bool point_in_polygon(const Point2& p, const RoadPolygon& poly);

/// Parses the native scene JSON document.
Scene parse_scene_json(std::string_view text);

/// Parses `v`/`f` records of a Wavefront OBJ. Only triangular faces are accepted.
TriangleMesh parse_obj(std::string_view text);

/// Loads a `.json` scene, or a `.obj` obstacle mesh together with its road
/// sidecar `<stem>.road.json` (keys `road` and `extent`).
Scene load_scene(const std::filesystem::path& path);

/// Serializes a scene to the native JSON format.
std::string scene_to_json(const Scene& scene);

/// Grid anchored at the extent minimum corner, kept where strictly inside
/// the road. Ordered row-major by y then x. Throws EmptyGridError.
TargetGrid generate_target_grid(const Scene& scene, double spacing, double radius);

/// Grid over the extent at the given spacing, dropping points inside the
/// road, on its edge, or closer than `margin` to it. Throws EmptyGridError.
std::vector<CandidatePose> generate_candidates(const Scene& scene, double spacing, double height,
                                               double margin);

}  // namespace coverplan
