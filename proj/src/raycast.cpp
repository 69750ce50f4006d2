#include "coverplan/raycast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

constexpr double kStepTolerance = 1e-9;

// Lattice size for [lo, hi] in `step` increments, both ends included.
std::size_t lattice_count(double lo, double hi, double step, const char* what) {
  const double steps = (hi - lo) / step;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > kStepTolerance) {
    throw ConfigError(std::string("sensor: ") + what + " span is not a whole number of steps");
  }
  return static_cast<std::size_t>(rounded) + 1;
}

// sin/cos of an angle in degrees, exact at multiples of 90.
void sin_cos_deg(double deg, double& s, double& c) {
  double reduced = std::fmod(deg, 360.0);
  if (reduced < 0.0) reduced += 360.0;
  const double quadrant = std::floor(reduced / 90.0);
  const double rem = deg_to_rad(reduced - 90.0 * quadrant);
  const double rs = rem == 0.0 ? 0.0 : std::sin(rem);
  const double rc = rem == 0.0 ? 1.0 : std::cos(rem);
  switch (static_cast<int>(quadrant) & 3) {
    case 0: s = rs; c = rc; break;
    case 1: s = rc; c = -rs; break;
    case 2: s = -rs; c = -rc; break;
    default: s = -rc; c = rs; break;
  }
}

}  // namespace

void SensorSpec::validate() const {
  if (!(v_step > 0.0) || !(h_step > 0.0)) throw ConfigError("sensor: steps must be positive");
  if (!(range > 0.0)) throw ConfigError("sensor: range must be positive");
  if (!(v_fov_min <= v_fov_max)) throw ConfigError("sensor: v_fov_min exceeds v_fov_max");
  if (!(h_fov_min <= h_fov_max)) throw ConfigError("sensor: h_fov_min exceeds h_fov_max");
  if (v_fov_min < -90.0 || v_fov_max > 90.0) {
    throw ConfigError("sensor: vertical field of view must lie within [-90, 90]");
  }
  if (h_fov_max - h_fov_min > 360.0 + kStepTolerance) {
    throw ConfigError("sensor: horizontal field of view spans more than 360 deg");
  }
  lattice_count(v_fov_min, v_fov_max, v_step, "vertical");
  lattice_count(h_fov_min, h_fov_max, h_step, "horizontal");
}

std::vector<double> SensorSpec::elevations() const {
  const std::size_t n = lattice_count(v_fov_min, v_fov_max, v_step, "vertical");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v_fov_min + static_cast<double>(i) * v_step;
  return out;
}

std::vector<double> SensorSpec::azimuths() const {
  std::size_t n = lattice_count(h_fov_min, h_fov_max, h_step, "horizontal");
  if (n > 1 && std::abs(h_fov_max - h_fov_min - 360.0) <= kStepTolerance) --n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = h_fov_min + static_cast<double>(i) * h_step;
  return out;
}

const char* to_string(HitKind kind) {
  switch (kind) {
    case HitKind::ground: return "ground";
    case HitKind::obstacle: return "obstacle";
    case HitKind::max_range: return "max_range";
  }
  return "unknown";
}

Vec3 ray_direction(double alpha_h_deg, double alpha_v_deg) {
  double sh, ch, sv, cv;
  sin_cos_deg(alpha_h_deg, sh, ch);
  sin_cos_deg(alpha_v_deg, sv, cv);
  return {sh * cv, ch * cv, sv};
}

std::vector<Ray> build_ray_fan(const SensorSpec& spec, const CandidatePose& pose) {
  const auto elevations = spec.elevations();
  const auto azimuths = spec.azimuths();
  std::vector<Ray> rays;
  rays.reserve(elevations.size() * azimuths.size());
  for (double v : elevations) {
    for (double h : azimuths) rays.push_back({pose.position, ray_direction(h, v)});
  }
  return rays;
}

CastPoint cast(const Bvh& bvh, const Ray& ray, double range) {
  double t_ground = std::numeric_limits<double>::infinity();
  if (ray.direction.z() < 0.0 && ray.origin.z() > 0.0) {
    t_ground = -ray.origin.z() / ray.direction.z();
  }
  const double t_limit = std::min(range, t_ground);

  CastPoint out;
  if (auto hit = bvh.nearest_hit(ray, t_limit)) {
    out.position = ray.origin + hit->t * ray.direction;
    out.kind = HitKind::obstacle;
  } else if (t_ground <= range) {
    out.position = ray.origin + t_ground * ray.direction;
    out.position.z() = 0.0;
    out.kind = HitKind::ground;
  } else {
    out.position = ray.origin + range * ray.direction;
    out.kind = HitKind::max_range;
  }
  return out;
}

std::vector<CastPoint> cast_sensor(const Bvh& bvh, const SensorSpec& spec,
                                   const CandidatePose& pose) {
  const auto elevations = spec.elevations();
  const auto azimuths = spec.azimuths();
  std::vector<CastPoint> out;
  out.reserve(elevations.size() * azimuths.size());
  for (double v : elevations) {
    for (double h : azimuths) {
      CastPoint cp = cast(bvh, Ray{pose.position, ray_direction(h, v)}, spec.range);
      cp.alpha_h = h;
      cp.alpha_v = v;
      out.push_back(cp);
    }
  }
  return out;
}

std::vector<std::vector<CastPoint>> cast_all(const Bvh& bvh, const SensorSpec& spec,
                                             std::span<const CandidatePose> candidates,
                                             unsigned threads) {
  spec.validate();
  std::vector<std::vector<CastPoint>> out(candidates.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(1, candidates.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      out[i] = cast_sensor(bvh, spec, candidates[i]);
    }
  };
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return out;
}

}  // namespace coverplan
