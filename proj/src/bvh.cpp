#include "coverplan/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coverplan {

namespace {

constexpr std::uint32_t kLeafSize = 4;
// Boxes are padded so that hits accepted through the barycentric slack are
// never culled by the box test.
constexpr double kBoxPadding = 1e-7;

bool slab_test(const Ray& ray, const Eigen::Vector3d& inv_dir, const Eigen::Vector3d& lo,
               const Eigen::Vector3d& hi, double t_max, double& t_entry) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    if (ray.direction[a] == 0.0) {
      if (ray.origin[a] < lo[a] || ray.origin[a] > hi[a]) return false;
      continue;
    }
    double near = (lo[a] - ray.origin[a]) * inv_dir[a];
    double far = (hi[a] - ray.origin[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  t_entry = t0;
  return true;
}

}  // namespace

std::optional<double> intersect_triangle(const Ray& ray, const Triangle& tri, double t_max) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - tri[0];
  const double u = s.dot(p) * inv_det;
  if (u < -kBarycentricEpsilon || u > 1.0 + kBarycentricEpsilon) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv_det;
  if (v < -kBarycentricEpsilon || u + v > 1.0 + kBarycentricEpsilon) return std::nullopt;
  const double t = e2.dot(q) * inv_det;
  if (!(t > kMinHitDistance) || t > t_max) return std::nullopt;
  return t;
}

Bvh::Bvh(std::vector<Triangle> triangles) : triangles_(std::move(triangles)) {
  if (triangles_.empty()) return;
  std::vector<Point3> centroids(triangles_.size());
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    centroids[i] = (triangles_[i][0] + triangles_[i][1] + triangles_[i][2]) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size());
  build(0, static_cast<std::uint32_t>(triangles_.size()), centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Point3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  Eigen::Vector3d clo = lo;
  Eigen::Vector3d chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const auto& v : triangles_[i]) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    clo = clo.cwiseMin(centroids[i]);
    chi = chi.cwiseMax(centroids[i]);
  }
  const Eigen::Vector3d pad =
      Eigen::Vector3d::Constant(kBoxPadding) + kBoxPadding * lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
  nodes_[index].lo = lo - pad;
  nodes_[index].hi = hi + pad;

  const Eigen::Vector3d span = chi - clo;
  int axis = 0;
  span.maxCoeff(&axis);
  if (end - begin <= kLeafSize || span[axis] <= 0.0) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  // Partition triangles and centroids together around the median centroid.
  std::vector<std::uint32_t> order(end - begin);
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = begin + i;
  const std::uint32_t mid_offset = static_cast<std::uint32_t>(order.size() / 2);
  std::nth_element(order.begin(), order.begin() + mid_offset, order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) {
                       return centroids[a][axis] < centroids[b][axis];
                     }
                     return a < b;
                   });
  std::vector<Triangle> tri_tmp(order.size());
  std::vector<Point3> cen_tmp(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    tri_tmp[i] = triangles_[order[i]];
    cen_tmp[i] = centroids[order[i]];
  }
  std::copy(tri_tmp.begin(), tri_tmp.end(), triangles_.begin() + begin);
  std::copy(cen_tmp.begin(), cen_tmp.end(), centroids.begin() + begin);

  const std::uint32_t mid = begin + mid_offset;
  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].first = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

std::optional<TriangleHit> Bvh::nearest_hit(const Ray& ray, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Eigen::Vector3d inv_dir = ray.direction.cwiseInverse();

  std::optional<TriangleHit> best;
  double best_t = t_max;
  std::uint32_t stack[64];
  int top = 0;
  double entry = 0.0;
  if (!slab_test(ray, inv_dir, nodes_[0].lo, nodes_[0].hi, best_t, entry)) return std::nullopt;
  stack[top++] = 0;

  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (auto t = intersect_triangle(ray, triangles_[i], best_t)) {
          if (!best || *t < best_t) {
            best_t = *t;
            best = TriangleHit{*t, i};
          }
        }
      }
      continue;
    }
    const std::uint32_t left = node.first;
    const std::uint32_t right = node.right;
    double t_left = 0.0;
    double t_right = 0.0;
    const bool hit_left = slab_test(ray, inv_dir, nodes_[left].lo, nodes_[left].hi, best_t, t_left);
    const bool hit_right =
        slab_test(ray, inv_dir, nodes_[right].lo, nodes_[right].hi, best_t, t_right);
    if (hit_left && hit_right) {
      // Push the farther child first so the nearer one is popped next.
      if (t_left <= t_right) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hit_left) {
      stack[top++] = left;
    } else if (hit_right) {
      stack[top++] = right;
    }
  }
  return best;
}

Bvh build_bvh(const Scene& scene) {
  std::vector<Triangle> tris;
  for (const auto& mesh : scene.obstacles) {
    for (const auto& t : mesh.triangles) {
      tris.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
    }
  }
  return Bvh(std::move(tris));
}

}  // namespace coverplan
