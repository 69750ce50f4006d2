#include "coverplan/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

constexpr double kMinTriangleArea = 1e-12;
constexpr double kBoundaryTolerance = 1e-12;

double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross2(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double signed_area(const std::vector<Point2>& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % ring.size()];
    twice += cross2(a, b);
  }
  return 0.5 * twice;
}

Point2 read_point2(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SceneError(what + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Point3 read_point3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    throw SceneError(what + ": expected [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

RoadPolygon read_road(const nlohmann::json& doc) {
  if (!doc.contains("road") || !doc["road"].contains("boundary") ||
      !doc["road"]["boundary"].is_array()) {
    throw SceneError("scene: missing road.boundary");
  }
  std::vector<Point2> ring;
  const auto& boundary = doc["road"]["boundary"];
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    ring.push_back(read_point2(boundary[i], "road vertex " + std::to_string(i)));
  }
  return RoadPolygon(std::move(ring));
}

Extent read_extent(const nlohmann::json& doc) {
  if (!doc.contains("extent")) throw SceneError("scene: missing extent");
  Extent e{read_point2(doc["extent"].at("min"), "extent.min"),
           read_point2(doc["extent"].at("max"), "extent.max")};
  if (!(e.min.x() < e.max.x() && e.min.y() < e.max.y())) {
    throw SceneError("scene: extent.min must be strictly below extent.max");
  }
  return e;
}

void validate_scene(const Scene& scene) {
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) validate_mesh(scene.obstacles[i], i);
  for (std::size_t i = 0; i < scene.road.boundary().size(); ++i) {
    if (!scene.extent.contains(scene.road.boundary()[i])) {
      throw SceneError("road vertex " + std::to_string(i) + " lies outside the extent");
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError("cannot open scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t axis_count(double span, double spacing) {
  return static_cast<std::size_t>(std::floor(span / spacing + 1e-9)) + 1;
}

}  // namespace

void validate_mesh(const TriangleMesh& mesh, std::size_t mesh_index) {
  const std::string name = "obstacle " + std::to_string(mesh_index);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!mesh.vertices[v].allFinite()) {
      throw SceneError(name + ", vertex " + std::to_string(v) + ": non-finite coordinate");
    }
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (auto idx : tri) {
      if (idx >= mesh.vertices.size()) {
        throw SceneError(name + ", triangle " + std::to_string(t) + ": vertex index " +
                         std::to_string(idx) + " out of range");
      }
    }
    const Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
    const Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
    if (0.5 * e1.cross(e2).norm() <= kMinTriangleArea) {
      throw SceneError(name + ", triangle " + std::to_string(t) + ": degenerate (zero area)");
    }
  }
}

RoadPolygon::RoadPolygon(std::vector<Point2> boundary) : boundary_(std::move(boundary)) {
  if (boundary_.size() >= 2 && boundary_.front() == boundary_.back()) boundary_.pop_back();
  const std::size_t n = boundary_.size();
  if (n < 3) {
    throw SceneError("road polygon: needs at least 3 vertices, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!boundary_[i].allFinite()) {
      throw SceneError("road polygon: vertex " + std::to_string(i) + " is not finite");
    }
    if (boundary_[i] == boundary_[(i + 1) % n]) {
      throw SceneError("road polygon: repeated vertex " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = boundary_[i];
    const Point2& b = boundary_[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point2& c = boundary_[j];
      const Point2& d = boundary_[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges share one vertex; they must not fold back over each other.
        const Point2& shared = (j == i + 1) ? b : a;
        const Point2& other_i = (j == i + 1) ? a : b;
        const Point2& other_j = (j == i + 1) ? d : c;
        if (orientation(other_i, shared, other_j) == 0 &&
            (other_i - shared).dot(other_j - shared) > 0.0) {
          throw SceneError("road polygon: edges " + std::to_string(i) + " and " +
                           std::to_string(j) + " overlap");
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) {
        throw SceneError("road polygon: not simple, edges " + std::to_string(i) + " and " +
                         std::to_string(j) + " intersect");
      }
    }
  }
  const double area = signed_area(boundary_);
  if (area == 0.0) throw SceneError("road polygon: zero area");
  if (area < 0.0) std::reverse(boundary_.begin(), boundary_.end());
}

double RoadPolygon::area() const { return std::abs(signed_area(boundary_)); }

double RoadPolygon::distance_to_boundary(const Point2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    best = std::min(best, segment_distance(p, boundary_[i], boundary_[(i + 1) % boundary_.size()]));
  }
  return best;
}

bool RoadPolygon::on_boundary(const Point2& p) const {
  return distance_to_boundary(p) <= kBoundaryTolerance;
}

bool point_in_polygon(const Point2& p, const RoadPolygon& poly) {
  const auto& ring = poly.boundary();
  if (ring.size() < 3 || poly.on_boundary(p)) return false;
  // Crossing number with a half-open rule on edge endpoints.
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point2& a = ring[i];
    const Point2& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

Scene parse_scene_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SceneError(std::string("scene: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SceneError("scene: top level must be an object");

  Scene scene;
  try {
    if (doc.contains("obstacles")) {
      const auto& obstacles = doc["obstacles"];
      if (!obstacles.is_array()) throw SceneError("scene: obstacles must be an array");
      for (std::size_t m = 0; m < obstacles.size(); ++m) {
        const std::string name = "obstacle " + std::to_string(m);
        TriangleMesh mesh;
        for (const auto& v : obstacles[m].at("vertices")) {
          mesh.vertices.push_back(read_point3(v, name + " vertex"));
        }
        for (const auto& t : obstacles[m].at("triangles")) {
          if (!t.is_array() || t.size() != 3) {
            throw SceneError(name + ": triangle must have exactly 3 indices");
          }
          std::array<std::uint32_t, 3> tri{};
          for (std::size_t k = 0; k < 3; ++k) {
            if (!t[k].is_number_integer() || t[k].get<long long>() < 0) {
              throw SceneError(name + ": triangle indices must be non-negative integers");
            }
            tri[k] = t[k].get<std::uint32_t>();
          }
          mesh.triangles.push_back(tri);
        }
        scene.obstacles.push_back(std::move(mesh));
      }
    }
    scene.road = read_road(doc);
    scene.extent = read_extent(doc);
  } catch (const nlohmann::json::exception& e) {
    throw SceneError(std::string("scene: ") + e.what());
  }
  validate_scene(scene);
  return scene;
}

TriangleMesh parse_obj(std::string_view text) {
  TriangleMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const std::string where = "obj line " + std::to_string(line_no);
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw SceneError(where + ": malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<long long> idx;
      std::string token;
      while (ls >> token) {
        const std::string head = token.substr(0, token.find('/'));
        long long value = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
        if (ec != std::errc() || ptr != head.data() + head.size() || value == 0) {
          throw SceneError(where + ": malformed face index '" + token + "'");
        }
        // Negative indices count back from the latest vertex.
        if (value < 0) value = static_cast<long long>(mesh.vertices.size()) + value + 1;
        if (value < 1) throw SceneError(where + ": face index out of range");
        idx.push_back(value - 1);
      }
      if (idx.size() != 3) {
        throw SceneError(where + ": only triangular faces are supported, got " +
                         std::to_string(idx.size()) + " vertices");
      }
      mesh.triangles.push_back({static_cast<std::uint32_t>(idx[0]),
                                static_cast<std::uint32_t>(idx[1]),
                                static_cast<std::uint32_t>(idx[2])});
    }
  }
  return mesh;
}

Scene load_scene(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ") {
    std::filesystem::path sidecar = path;
    sidecar.replace_extension(".road.json");
    if (!std::filesystem::exists(sidecar)) {
      throw SceneError("obj scene " + path.string() + " needs road sidecar " + sidecar.string());
    }
    Scene scene;
    scene.obstacles.push_back(parse_obj(read_file(path)));
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(sidecar));
      scene.road = read_road(doc);
      scene.extent = read_extent(doc);
    } catch (const nlohmann::json::exception& e) {
      throw SceneError("road sidecar " + sidecar.string() + ": " + e.what());
    }
    validate_scene(scene);
    return scene;
  }
  return parse_scene_json(read_file(path));
}

std::string scene_to_json(const Scene& scene) {
  nlohmann::json doc;
  doc["obstacles"] = nlohmann::json::array();
  for (const auto& mesh : scene.obstacles) {
    nlohmann::json m;
    m["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) m["vertices"].push_back({v.x(), v.y(), v.z()});
    m["triangles"] = mesh.triangles;
    doc["obstacles"].push_back(std::move(m));
  }
  doc["road"]["boundary"] = nlohmann::json::array();
  for (const auto& p : scene.road.boundary()) doc["road"]["boundary"].push_back({p.x(), p.y()});
  doc["extent"]["min"] = {scene.extent.min.x(), scene.extent.min.y()};
  doc["extent"]["max"] = {scene.extent.max.x(), scene.extent.max.y()};
  return doc.dump();
}

TargetGrid generate_target_grid(const Scene& scene, double spacing, double radius) {
  if (!(spacing > 0.0) || !(radius > 0.0)) {
    throw ConfigError("target grid: spacing and radius must be positive");
  }
  const Point2 span = scene.extent.max - scene.extent.min;
  const std::size_t nx = axis_count(span.x(), spacing);
  const std::size_t ny = axis_count(span.y(), spacing);

  TargetGrid grid;
  grid.spacing = spacing;
  grid.radius = radius;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Point2 p = scene.extent.min + Point2(static_cast<double>(i) * spacing,
                                                 static_cast<double>(j) * spacing);
      if (point_in_polygon(p, scene.road)) grid.points.emplace_back(p.x(), p.y(), 0.0);
    }
  }
  if (grid.points.empty()) {
    throw EmptyGridError("target grid: no grid point at spacing " + std::to_string(spacing) +
                         " m falls strictly inside the road");
  }
  return grid;
}

std::vector<CandidatePose> generate_candidates(const Scene& scene, double spacing, double height,
                                               double margin) {
  if (!(spacing > 0.0) || !(height > 0.0) || !(margin >= 0.0)) {
    throw ConfigError("candidates: spacing and height must be positive, margin non-negative");
  }
  const Point2 span = scene.extent.max - scene.extent.min;
  const std::size_t nx = axis_count(span.x(), spacing);
  const std::size_t ny = axis_count(span.y(), spacing);

  std::vector<CandidatePose> out;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Point2 p = scene.extent.min + Point2(static_cast<double>(i) * spacing,
                                                 static_cast<double>(j) * spacing);
      if (point_in_polygon(p, scene.road)) continue;
      const double d = scene.road.distance_to_boundary(p);
      if (d <= kBoundaryTolerance || d < margin) continue;
      out.push_back({Point3(p.x(), p.y(), height), out.size()});
    }
  }
  if (out.empty()) {
    throw EmptyGridError("candidates: no admissible position at spacing " +
                         std::to_string(spacing) + " m");
  }
  return out;
}

}  // namespace coverplan
