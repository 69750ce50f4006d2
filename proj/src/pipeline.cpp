#include "coverplan/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coverplan/bvh.hpp"
#include "coverplan/error.hpp"
#include "coverplan/raycast.hpp"

namespace coverplan {

namespace {

std::string real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Fnv1a {
 public:
  void add(std::string_view s) {
    for (unsigned char c : s) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
    add_separator();
  }
  void add(double x) { add(real(x)); }
  std::uint64_t value() const { return hash_; }

 private:
  void add_separator() {
    hash_ ^= 0xff;
    hash_ *= 0x100000001b3ULL;
  }
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string ply_header(std::size_t vertices, std::size_t faces, bool redundancy) {
  std::string h = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(vertices) +
                  "\nproperty float x\nproperty float y\nproperty float z\n"
                  "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (redundancy) h += "property int redundancy\n";
  if (faces > 0) h += "element face " + std::to_string(faces) + "\nproperty list uchar int vertex_indices\n";
  return h + "end_header\n";
}

std::string ply_vertex(const Point3& p, const std::array<int, 3>& rgb) {
  return real(p.x()) + ' ' + real(p.y()) + ' ' + real(p.z()) + ' ' + std::to_string(rgb[0]) +
         ' ' + std::to_string(rgb[1]) + ' ' + std::to_string(rgb[2]);
}

std::string infeasibility_to_json(const InfeasibilityReport& report, const TargetGrid& targets) {
  nlohmann::ordered_json doc;
  doc["requested_cvr"] = report.requested_cvr;
  doc["max_cvr"] = report.max_cvr;
  doc["uncovered_target_indices"] = report.uncovered_target_indices;
  doc["uncovered_positions"] = nlohmann::ordered_json::array();
  for (auto k : report.uncovered_target_indices) {
    doc["uncovered_positions"].push_back({targets.points[k].x(), targets.points[k].y()});
  }
  return doc.dump(2) + "\n";
}

HeightResult run_height(const RunConfig& config, const RunOptions& options, const Scene& scene,
                        const TargetGrid& targets, double height,
                        const std::filesystem::path& root) {
  HeightResult r;
  r.height = height;
  r.output_dir = root / ("h" + real(height));
  if (options.write_files) std::filesystem::create_directories(r.output_dir);

  r.candidates = generate_candidates(scene, config.candidate_spacing, height, config.candidate_margin);

  const std::uint64_t key =
      visibility_cache_key(scene, config.sensor, height, config.candidate_spacing,
                           config.candidate_margin, config.target_spacing, config.target_radius);
  char key_hex[17];
  std::snprintf(key_hex, sizeof key_hex, "%016llx", static_cast<unsigned long long>(key));
  const auto cache_file = root / "cache" / (std::string("visibility_") + key_hex + ".bin");
  if (config.use_cache && options.write_files && std::filesystem::exists(cache_file)) {
    r.visibility = read_visibility_binary(cache_file);
    r.from_cache = r.visibility.n_sensors() == r.candidates.size() &&
                   r.visibility.n_targets() == targets.points.size();
  }
  if (!r.from_cache) {
    r.visibility = compute_visibility(scene, config.sensor, r.candidates, targets, options.threads);
    if (config.use_cache && options.write_files) {
      std::filesystem::create_directories(cache_file.parent_path());
      write_visibility_binary(r.visibility, cache_file);
    }
  }
  r.max_coverage = compute_cvr(r.visibility);
  if (options.write_files) {
    write_visibility_binary(r.visibility, r.output_dir / "visibility.bin");
    write_text(r.output_dir / "visibility.csv", visibility_to_csv(r.visibility));
  }

  r.infeasible = check_feasibility(r.visibility, config.cvr);
  if (r.infeasible) {
    r.exit_code = kExitInfeasible;
    r.message = "requested cvr " + real(config.cvr) + " exceeds maximum feasible cvr " +
                real(r.infeasible->max_cvr) + "; " +
                std::to_string(r.infeasible->uncovered_target_indices.size()) +
                " targets are not visible from any candidate";
    if (options.write_files) {
      write_text(r.output_dir / "infeasible.json", infeasibility_to_json(*r.infeasible, targets));
    }
    return r;
  }

  const double overlap_distance = config.overlap_distance.value_or(config.candidate_spacing);
  const OverlapMatrix overlap = build_overlap(r.candidates, overlap_distance);
  const double lambda = config.lambda.value_or(default_lambda(overlap));
  r.instance = build_instance(r.visibility, overlap, config.cvr, lambda);

  r.placement = solve(*r.instance, config.solver);
  if (r.placement->proof != Proof::optimal) {
    r.exit_code = kExitSolverCap;
    r.message = "solver budget exhausted after " +
                std::to_string(r.placement->stats.nodes_explored) +
                " nodes; placement is not proven optimal";
  } else if (!verify(*r.placement, *r.instance)) {
    throw Error("internal error: solver placement failed verification");
  }
  r.report = before_after_report(r.visibility, *r.placement);

  if (options.write_files) {
    write_text(r.output_dir / "placement.json",
               placement_to_json(*r.placement, *r.instance, r.candidates));
    write_text(r.output_dir / "instance.txt", instance_to_text(*r.instance));
    write_text(r.output_dir / "coverage.csv", coverage_to_csv(targets, *r.report));
    write_text(r.output_dir / "summary.json", summary_to_json(*r.report));
    export_visuals(scene, targets, r.candidates, *r.placement, *r.report, r.output_dir);
  }
  return r;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const SceneError*>(&e)) return kExitScene;
  if (dynamic_cast<const EmptyGridError*>(&e)) return kExitScene;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
  return kExitIo;
}

VisibilityMatrix compute_visibility(const Scene& scene, const SensorSpec& sensor,
                                    std::span<const CandidatePose> candidates,
                                    const TargetGrid& targets, unsigned threads) {
  const Bvh bvh = build_bvh(scene);
  const auto cast_points = cast_all(bvh, sensor, candidates, threads);
  return build_visibility_matrix(cast_points, targets);
}

std::uint64_t visibility_cache_key(const Scene& scene, const SensorSpec& sensor, double height,
                                   double candidate_spacing, double candidate_margin,
                                   double target_spacing, double target_radius) {
  Fnv1a h;
  h.add(scene_to_json(scene));
  for (double x : {sensor.v_fov_min, sensor.v_fov_max, sensor.v_step, sensor.h_fov_min,
                   sensor.h_fov_max, sensor.h_step, sensor.range, height, candidate_spacing,
                   candidate_margin, target_spacing, target_radius}) {
    h.add(x);
  }
  return h.value();
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  RunResult result;
  result.scene = load_scene(config.scene_path);
  result.targets = generate_target_grid(result.scene, config.target_spacing, config.target_radius);
  const auto root = options.output_dir.value_or(config.output_dir);

  for (double h : config.sensor_heights) {
    result.heights.push_back(run_height(config, options, result.scene, result.targets, h, root));
    if (result.exit_code == kExitOk) result.exit_code = result.heights.back().exit_code;
  }
  return result;
}

std::vector<SweepRow> sweep(std::span<const RunConfig> configs, const RunOptions& options) {
  std::vector<SweepRow> rows;
  for (const auto& config : configs) {
    RunResult result;
    try {
      result = run(config, options);
    } catch (const std::exception& e) {
      for (double h : config.sensor_heights) {
        SweepRow row;
        row.config = config.name;
        row.height = h;
        row.status = std::string("error: ") + e.what();
        rows.push_back(std::move(row));
      }
      continue;
    }
    for (const auto& hr : result.heights) {
      SweepRow row;
      row.config = config.name;
      row.height = hr.height;
      row.candidate_count = hr.candidates.size();
      row.target_count = result.targets.points.size();
      row.max_cvr = hr.max_coverage.cvr;
      if (!hr.candidates.empty()) {
        const auto before = coverage_stats(hr.visibility);
        row.mean_pct_before = before.mean_pct;
        row.median_pct_before = before.median_pct;
      }
      if (hr.placement) row.selected_count = hr.placement->selected.size();
      if (hr.report) {
        row.mean_pct_after = hr.report->after.mean_pct;
        row.median_pct_after = hr.report->after.median_pct;
      }
      row.status = hr.exit_code == kExitOk ? "optimal" : hr.message;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out =
      "config,height,candidates,targets,max_cvr,selected,mean_pct_before,median_pct_before,"
      "mean_pct_after,median_pct_after,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out += r.config + ',' + real(r.height) + ',' + std::to_string(r.candidate_count) + ',' +
           std::to_string(r.target_count) + ',' + real(r.max_cvr) + ',' +
           std::to_string(r.selected_count) + ',' + real(r.mean_pct_before) + ',' +
           real(r.median_pct_before) + ',' + real(r.mean_pct_after) + ',' +
           real(r.median_pct_after) + ',' + status + '\n';
  }
  return out;
}

std::array<int, 3> redundancy_color(std::size_t value, std::size_t lo, std::size_t hi) {
  if (hi <= lo) return {0, 0, 255};
  const double t = static_cast<double>(value - lo) / static_cast<double>(hi - lo);
  const int red = static_cast<int>(std::lround(255.0 * t));
  return {red, 0, 255 - red};
}

void export_visuals(const Scene& scene, const TargetGrid& targets,
                    std::span<const CandidatePose> candidates, const Placement& placement,
                    const BeforeAfterReport& report, const std::filesystem::path& output_dir) {
  const auto& counts = report.after.per_target_count;
  const auto [lo_it, hi_it] = std::minmax_element(counts.begin(), counts.end());
  const std::size_t lo = counts.empty() ? 0 : *lo_it;
  const std::size_t hi = counts.empty() ? 0 : *hi_it;

  std::string t = ply_header(targets.points.size(), 0, true);
  for (std::size_t k = 0; k < targets.points.size(); ++k) {
    t += ply_vertex(targets.points[k], redundancy_color(counts[k], lo, hi)) + ' ' +
         std::to_string(counts[k]) + '\n';
  }
  write_text(output_dir / "targets.ply", t);

  std::string s = ply_header(placement.selected.size(), 0, false);
  for (auto i : placement.selected) s += ply_vertex(candidates[i].position, {255, 0, 0}) + '\n';
  write_text(output_dir / "selected.ply", s);

  std::string c = ply_header(candidates.size(), 0, false);
  for (const auto& cand : candidates) c += ply_vertex(cand.position, {128, 128, 128}) + '\n';
  write_text(output_dir / "candidates.ply", c);

  const auto obstacle_file = output_dir / "obstacles.ply";
  if (scene.obstacles.empty()) {
    std::filesystem::remove(obstacle_file);
    return;
  }
  std::size_t nv = 0;
  std::size_t nf = 0;
  for (const auto& m : scene.obstacles) {
    nv += m.vertices.size();
    nf += m.triangles.size();
  }
  std::string o = ply_header(nv, nf, false);
  for (const auto& m : scene.obstacles) {
    for (const auto& v : m.vertices) o += ply_vertex(v, {160, 160, 160}) + '\n';
  }
  std::size_t base = 0;
  for (const auto& m : scene.obstacles) {
    for (const auto& tri : m.triangles) {
      o += "3 " + std::to_string(base + tri[0]) + ' ' + std::to_string(base + tri[1]) + ' ' +
           std::to_string(base + tri[2]) + '\n';
    }
    base += m.vertices.size();
  }
  write_text(obstacle_file, o);
}

VerifyOutcome verify_files(const std::filesystem::path& placement_json,
                           const std::filesystem::path& matrix_bin) {
  VerifyOutcome out;
  const VisibilityMatrix v = read_visibility_binary(matrix_bin);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(placement_json));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("placement json: " + std::string(e.what()));
  }
  auto problem = [&](std::string msg) { out.problems.push_back(std::move(msg)); };

  try {
    const auto selected = doc.at("selected_indices").get<std::vector<std::size_t>>();
    for (std::size_t j = 0; j < selected.size(); ++j) {
      if (selected[j] >= v.n_sensors()) problem("selected index " + std::to_string(selected[j]) + " out of range");
      if (j > 0 && selected[j] <= selected[j - 1]) problem("selected indices are not strictly ascending");
    }
    if (!out.problems.empty()) return out;

    if (doc.contains("n_candidates") && doc["n_candidates"].get<std::size_t>() != v.n_sensors()) {
      problem("n_candidates does not match the matrix");
    }
    if (doc.contains("n_targets") && doc["n_targets"].get<std::size_t>() != v.n_targets()) {
      problem("n_targets does not match the matrix");
    }
    const auto u = v.union_of(selected);
    std::size_t covered = 0;
    for (std::size_t k = 0; k < v.n_targets(); ++k) covered += (u[k / 64] >> (k % 64)) & 1u;
    const auto claimed = doc.at("covered_count").get<std::size_t>();
    if (claimed != covered) {
      problem("covered_count " + std::to_string(claimed) + " but matrix gives " + std::to_string(covered));
    }
    const double cvr = v.n_targets() == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(v.n_targets());
    if (std::abs(doc.at("cvr_achieved").get<double>() - cvr) > 1e-12) problem("cvr_achieved mismatch");
    if (doc.contains("min_cover_count") && covered < doc["min_cover_count"].get<std::size_t>()) {
      problem("coverage constraint violated");
    }
    if (doc.contains("lambda") && doc.contains("degrees")) {
      const auto degrees = doc["degrees"].get<std::vector<std::int64_t>>();
      if (degrees.size() != v.n_sensors()) {
        problem("degrees length does not match the matrix");
      } else {
        std::int64_t dsum = 0;
        for (auto i : selected) dsum += degrees[i];
        const double obj = static_cast<double>(selected.size()) +
                           doc["lambda"].get<double>() * static_cast<double>(dsum);
        if (std::abs(doc.at("objective").get<double>() - obj) > 1e-9) problem("objective mismatch");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    problem(std::string("placement json: ") + e.what());
  }
  out.ok = out.problems.empty();
  return out;
}

}  // namespace coverplan
