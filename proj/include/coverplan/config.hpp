#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coverplan/raycast.hpp"
#include "coverplan/solver.hpp"

namespace coverplan {

/// One pipeline run, parsed from a JSON file.
///
/// Example:
///   {
///     "name": "A1",
///     "scene": "../scenes/t_junction.json",
///     "sensor": {"v_fov": [-17, 3], "v_step": 1, "h_fov": [0, 360], "h_step": 1, "range": 100},
///     "sensor_heights": [2.4],
///     "candidates": {"spacing": 4, "margin": 0.5},
///     "targets": {"spacing": 1, "radius": 1},
///     "cvr": 1.0,
///     "lambda": "auto",
///     "overlap_distance": "auto",
///     "output_dir": "out/A1",
///     "solver": {"node_limit": 0, "time_limit_s": 0}
///   }
///
/// `scene` is resolved against the config file's directory; `output_dir`
/// against the working directory.
struct RunConfig {
  std::string name;
  std::filesystem::path scene_path;
  SensorSpec sensor;
  std::vector<double> sensor_heights;
  double candidate_spacing = 4.0;
  double candidate_margin = 0.5;
  double target_spacing = 1.0;
  double target_radius = 1.0;
  double cvr = 1.0;
  std::optional<double> lambda;            // nullopt = auto
  std::optional<double> overlap_distance;  // nullopt = candidate spacing
  std::filesystem::path output_dir = "out";
  SolverOptions solver;
  bool use_cache = true;

  void validate() const;
};

RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace coverplan
