#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coverplan/bvh.hpp"
#include "coverplan/geometry.hpp"
#include "coverplan/scene.hpp"

namespace coverplan {

/// Field of view and range of a line-of-sight sensor. Angles in degrees.
///
/// Defaults describe a common 16-channel LIDAR: elevation -17..+3 deg, full
/// azimuth circle, both in 1 deg steps, 100 m range.
struct SensorSpec {
  double v_fov_min = -17.0;
  double v_fov_max = 3.0;
  double v_step = 1.0;
  double h_fov_min = 0.0;
  double h_fov_max = 360.0;
  double h_step = 1.0;
  double range = 100.0;

  /// Throws ConfigError when bounds, steps or range are inconsistent.
  void validate() const;

  /// Elevation angles, ascending, both FoV ends included.
  std::vector<double> elevations() const;
  /// Azimuth angles, ascending. A full 360 deg span drops the closing angle.
  std::vector<double> azimuths() const;
  std::size_t ray_count() const { return elevations().size() * azimuths().size(); }
};

enum class HitKind : std::uint8_t { ground, obstacle, max_range };

const char* to_string(HitKind kind);

struct CastPoint {
  Point3 position;
  HitKind kind = HitKind::max_range;
  double alpha_h = 0.0;  // degrees
  double alpha_v = 0.0;  // degrees
};

/// [sin(h) cos(v), cos(h) cos(v), sin(v)]: azimuth measured from +y toward +x.
Vec3 ray_direction(double alpha_h_deg, double alpha_v_deg);

/// One ray per (elevation, azimuth) pair; elevation outer, azimuth inner.
std::vector<Ray> build_ray_fan(const SensorSpec& spec, const CandidatePose& pose);

/// Nearest hit among obstacles and the ground plane z = 0 within `range`.
/// Returns a max_range point at origin + range * direction when nothing is hit.
CastPoint cast(const Bvh& bvh, const Ray& ray, double range);

/// cast() over the full ray fan of one pose, in fan order.
std::vector<CastPoint> cast_sensor(const Bvh& bvh, const SensorSpec& spec,
                                   const CandidatePose& pose);

/// cast_sensor() for every candidate. Work is spread over `threads` workers
/// (0 picks the hardware concurrency); output order follows `candidates`.
std::vector<std::vector<CastPoint>> cast_all(const Bvh& bvh, const SensorSpec& spec,
                                             std::span<const CandidatePose> candidates,
                                             unsigned threads = 0);

}  // namespace coverplan
