#pragma once

// Test-only oracles and generators. Nothing here calls into the code path
// it is used to check: the polygon oracle uses winding numbers, the
// visibility oracle compares every cast point with every target, and the
// raycast oracle loops over all triangles.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "coverplan/bvh.hpp"
#include "coverplan/optmodel.hpp"
#include "coverplan/raycast.hpp"
#include "coverplan/scene.hpp"
#include "coverplan/visibility.hpp"

namespace coverplan::testing {

/// Winding number of a closed ring around p (non-zero = inside).
inline int winding_number(const Point2& p, const std::vector<Point2>& ring) {
  auto is_left = [](const Point2& a, const Point2& b, const Point2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  };
  int wn = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % ring.size()];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && is_left(a, b, p) > 0) ++wn;
    } else {
      if (b.y() <= p.y() && is_left(a, b, p) < 0) --wn;
    }
  }
  return wn;
}

/// Nearest hit over every triangle, no acceleration structure.
inline std::optional<TriangleHit> brute_force_nearest(std::span<const Triangle> tris,
                                                      const Ray& ray, double t_max) {
  std::optional<TriangleHit> best;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    if (auto t = intersect_triangle(ray, tris[i], t_max)) {
      if (!best || *t < best->t) best = TriangleHit{*t, static_cast<std::uint32_t>(i)};
    }
  }
  return best;
}

/// All-pairs cast point / target matching.
inline VisibilityMatrix brute_force_visibility(
    const std::vector<std::vector<CastPoint>>& cast_points, const TargetGrid& targets) {
  VisibilityMatrix v(cast_points.size(), targets.points.size());
  const double r2 = targets.radius * targets.radius;
  for (std::size_t i = 0; i < cast_points.size(); ++i) {
    for (std::size_t k = 0; k < targets.points.size(); ++k) {
      for (const auto& cp : cast_points[i]) {
        if (cp.kind == HitKind::max_range) continue;
        if ((cp.position - targets.points[k]).squaredNorm() <= r2) {
          v.set(i, k);
          break;
        }
      }
    }
  }
  return v;
}

inline TriangleMesh box_mesh(const Point3& lo, const Point3& hi) {
  TriangleMesh m;
  m.vertices = {{lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
                {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
                {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  m.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                 {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return m;
}

inline RoadPolygon rect_road(double x0, double y0, double x1, double y1) {
  return RoadPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

/// Random non-degenerate triangles inside a cube of half-width `half`.
inline std::vector<Triangle> random_triangles(std::mt19937_64& rng, std::size_t n, double half,
                                              double max_edge) {
  std::uniform_real_distribution<double> pos(-half, half);
  std::uniform_real_distribution<double> off(-max_edge, max_edge);
  std::vector<Triangle> tris;
  while (tris.size() < n) {
    const Point3 a(pos(rng), pos(rng), pos(rng));
    const Point3 b = a + Vec3(off(rng), off(rng), off(rng));
    const Point3 c = a + Vec3(off(rng), off(rng), off(rng));
    if ((b - a).cross(c - a).norm() > 1e-6) tris.push_back({a, b, c});
  }
  return tris;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

/// Random covering instance in which every target is seen by at least one
/// sensor, so any cvr is feasible.
inline VisibilityMatrix random_matrix(std::mt19937_64& rng, std::size_t ns, std::size_t nt,
                                      double density) {
  VisibilityMatrix v(ns, nt);
  std::bernoulli_distribution bit(density);
  std::uniform_int_distribution<std::size_t> pick(0, ns - 1);
  for (std::size_t k = 0; k < nt; ++k) {
    bool any = false;
    for (std::size_t i = 0; i < ns; ++i) {
      if (bit(rng)) {
        v.set(i, k);
        any = true;
      }
    }
    if (!any) v.set(pick(rng), k);
  }
  return v;
}

/// Candidates on a random integer lattice, for overlap degrees.
inline std::vector<CandidatePose> random_candidates(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> coord(0, 20);
  std::vector<CandidatePose> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({Point3(coord(rng), coord(rng), 2.4), i});
  }
  return out;
}

inline VisibilityMatrix matrix_from_rows(const std::vector<std::string>& rows) {
  VisibilityMatrix v(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      if (rows[i][k] == '1') v.set(i, k);
    }
  }
  return v;
}

/// Instance with unit costs (lambda = 0) and identity overlap.
inline BipInstance plain_instance(VisibilityMatrix v, double cvr) {
  OverlapMatrix o;
  o.n = v.n_sensors();
  o.o.assign(o.n * o.n, 0);
  o.degree.assign(o.n, 1);
  for (std::size_t i = 0; i < o.n; ++i) o.o[i * o.n + i] = 1;
  return build_instance(std::move(v), o, cvr, 0.0);
}

}  // namespace coverplan::testing
