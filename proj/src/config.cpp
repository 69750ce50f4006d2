#include "coverplan/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
  if (!j[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

std::optional<double> number_or_auto(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (j[key].is_string() && j[key].get<std::string>() == "auto") return std::nullopt;
  return number(j, key);
}

std::pair<double, double> bounds(const json& j, const char* key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& b = j[key];
  if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
    throw ConfigError(std::string("config: '") + key + "' must be [min, max]");
  }
  return {b[0].get<double>(), b[1].get<double>()};
}

}  // namespace

void RunConfig::validate() const {
  if (scene_path.empty()) throw ConfigError("config: scene path is empty");
  sensor.validate();
  if (sensor_heights.empty()) throw ConfigError("config: sensor_heights is empty");
  for (double h : sensor_heights) {
    if (!(h > 0.0)) throw ConfigError("config: sensor heights must be positive");
  }
  if (!(candidate_spacing > 0.0)) throw ConfigError("config: candidate spacing must be positive");
  if (!(candidate_margin >= 0.0)) throw ConfigError("config: candidate margin must be non-negative");
  if (!(target_spacing > 0.0)) throw ConfigError("config: target spacing must be positive");
  if (!(target_radius > 0.0)) throw ConfigError("config: target radius must be positive");
  if (!(cvr >= 0.0 && cvr <= 1.0)) throw ConfigError("config: cvr must lie in [0, 1]");
  if (lambda && !(*lambda >= 0.0)) throw ConfigError("config: lambda must be non-negative");
  if (overlap_distance && !(*overlap_distance >= 0.0)) {
    throw ConfigError("config: overlap_distance must be non-negative");
  }
  if (!(solver.time_limit_seconds >= 0.0)) throw ConfigError("config: time limit must be >= 0");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig c;
  try {
    c.name = doc.value("name", std::string{});
    if (!doc.contains("scene") || !doc["scene"].is_string()) {
      throw ConfigError("config: 'scene' must be a path string");
    }
    c.scene_path = base_dir / doc["scene"].get<std::string>();

    if (doc.contains("sensor")) {
      const auto& s = doc["sensor"];
      std::tie(c.sensor.v_fov_min, c.sensor.v_fov_max) =
          bounds(s, "v_fov", {c.sensor.v_fov_min, c.sensor.v_fov_max});
      std::tie(c.sensor.h_fov_min, c.sensor.h_fov_max) =
          bounds(s, "h_fov", {c.sensor.h_fov_min, c.sensor.h_fov_max});
      c.sensor.v_step = number_or(s, "v_step", c.sensor.v_step);
      c.sensor.h_step = number_or(s, "h_step", c.sensor.h_step);
      c.sensor.range = number_or(s, "range", c.sensor.range);
    }
    if (!doc.contains("sensor_heights") || !doc["sensor_heights"].is_array()) {
      throw ConfigError("config: 'sensor_heights' must be an array");
    }
    for (const auto& h : doc["sensor_heights"]) {
      if (!h.is_number()) throw ConfigError("config: sensor heights must be numbers");
      c.sensor_heights.push_back(h.get<double>());
    }
    if (doc.contains("candidates")) {
      c.candidate_spacing = number_or(doc["candidates"], "spacing", c.candidate_spacing);
      c.candidate_margin = number_or(doc["candidates"], "margin", c.candidate_margin);
    }
    if (doc.contains("targets")) {
      c.target_spacing = number_or(doc["targets"], "spacing", c.target_spacing);
      c.target_radius = number_or(doc["targets"], "radius", c.target_radius);
    }
    c.cvr = number_or(doc, "cvr", c.cvr);
    c.lambda = number_or_auto(doc, "lambda");
    c.overlap_distance = number_or_auto(doc, "overlap_distance");
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("solver")) {
      const auto& s = doc["solver"];
      const double nodes = number_or(s, "node_limit", 0.0);
      if (nodes < 0.0) throw ConfigError("config: node_limit must be >= 0");
      c.solver.node_limit = static_cast<std::uint64_t>(nodes);
      c.solver.time_limit_seconds = number_or(s, "time_limit_s", 0.0);
    }
    c.use_cache = doc.value("cache", true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_run_config(ss.str(), path.parent_path());
  if (c.name.empty()) c.name = path.stem().string();
  return c;
}

}  // namespace coverplan
