#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coverplan/config.hpp"
#include "coverplan/error.hpp"
#include "coverplan/pipeline.hpp"
#include "support.hpp"

using namespace coverplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "coverplan_pipeline_tests";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// A straight 30 x 8 m road with one parked box; solves in well under a second.
json small_scene(bool walled) {
  Scene s;
  s.road = coverplan::testing::rect_road(0, 0, 30, 8);
  s.extent = {{-6, -6}, {36, 14}};
  s.obstacles.push_back(coverplan::testing::box_mesh({12, 2, 0}, {14, 3, 2}));
  if (walled) {
    // Closed 10 m pen around the right end of the road.
    using coverplan::testing::box_mesh;
    s.obstacles.push_back(box_mesh({21.9, -1, 0}, {22.1, 9, 10}));
    s.obstacles.push_back(box_mesh({29.9, -1, 0}, {30.1, 9, 10}));
    s.obstacles.push_back(box_mesh({22.1, -1.2, 0}, {29.9, -1, 10}));
    s.obstacles.push_back(box_mesh({22.1, 9, 0}, {29.9, 9.2, 10}));
  }
  return json::parse(scene_to_json(s));
}

fs::path write_config(const std::string& name, json overrides = json::object(),
                      bool walled = false) {
  const fs::path dir = kWork / name;
  fs::create_directories(dir);
  spit(dir / "scene.json", small_scene(walled).dump());
  json c = {{"name", name},
            {"scene", "scene.json"},
            {"sensor", {{"v_fov", {-17, 3}}, {"v_step", 1}, {"h_fov", {0, 360}}, {"h_step", 2}, {"range", 100}}},
            {"sensor_heights", {2.4, 4.0}},
            {"candidates", {{"spacing", 6}, {"margin", 0.5}}},
            {"targets", {{"spacing", 1}, {"radius", 1}}},
            {"cvr", 1.0},
            {"lambda", "auto"},
            {"overlap_distance", "auto"},
            {"output_dir", (dir / "out").string()}};
  c.merge_patch(overrides);
  spit(dir / "config.json", c.dump(2));
  return dir / "config.json";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COVERPLAN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_run_config(R"({"scene": "s.json", "sensor_heights": [3]})", "/base");
  CHECK(c.scene_path == fs::path("/base/s.json"));
  CHECK(c.sensor_heights == std::vector<double>{3});
  CHECK_FALSE(c.lambda);
  CHECK(c.sensor.ray_count() == 7560);

  const auto d = parse_run_config(
      R"({"scene": "s.json", "sensor_heights": [3], "lambda": 0.01, "overlap_distance": 7})", "");
  CHECK(d.lambda == 0.01);
  CHECK(d.overlap_distance == 7.0);

  CHECK_THROWS_AS(parse_run_config("{", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"sensor_heights": [3]})", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"scene": "s", "sensor_heights": []})", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"scene": "s", "sensor_heights": [3], "cvr": 2})", ""),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"scene": "s", "sensor_heights": [3], "sensor": {"v_step": 0}})", ""),
      ConfigError);
}

TEST_CASE("end-to-end run writes every artifact") {
  const auto config = load_run_config(write_config("full"));
  RunOptions opts;
  opts.output_dir = kWork / "full" / "out";
  fs::remove_all(*opts.output_dir);
  const auto result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  REQUIRE(result.heights.size() == 2);

  for (const auto& h : result.heights) {
    REQUIRE(h.placement);
    CHECK(h.placement->proof == Proof::optimal);
    for (const char* f : {"visibility.bin", "visibility.csv", "placement.json", "instance.txt",
                          "coverage.csv", "summary.json", "targets.ply", "selected.ply",
                          "candidates.ply", "obstacles.ply"}) {
      CHECK_MESSAGE(fs::exists(h.output_dir / f), f);
    }
    // covered_count recomputed from the CSV dump.
    const auto v = visibility_from_csv(slurp(h.output_dir / "visibility.csv"));
    const auto doc = json::parse(slurp(h.output_dir / "placement.json"));
    std::size_t covered = 0;
    for (std::size_t k = 0; k < v.n_targets(); ++k) {
      bool seen = false;
      for (auto i : doc["selected_indices"]) seen |= v.get(i.get<std::size_t>(), k);
      covered += seen;
    }
    CHECK(doc["covered_count"].get<std::size_t>() == covered);
    CHECK(verify_files(h.output_dir / "placement.json", h.output_dir / "visibility.bin").ok);

    // targets.ply: one vertex per target, colors span blue..red over the redundancy range.
    const std::string ply = slurp(h.output_dir / "targets.ply");
    CHECK(ply.find("element vertex " + std::to_string(result.targets.points.size())) !=
          std::string::npos);
    const auto& counts = h.report->after.per_target_count;
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    if (*hi > *lo) {
      CHECK(ply.find(" 0 0 255 " + std::to_string(*lo) + "\n") != std::string::npos);
      CHECK(ply.find(" 255 0 0 " + std::to_string(*hi) + "\n") != std::string::npos);
    }
    const std::string sel = slurp(h.output_dir / "selected.ply");
    CHECK(sel.find("element vertex " + std::to_string(h.placement->selected.size())) !=
          std::string::npos);
  }
}

TEST_CASE("no obstacle file for an obstacle-free scene") {
  Scene s;
  s.road = coverplan::testing::rect_road(0, 0, 10, 4);
  s.extent = {{-4, -4}, {14, 8}};
  TargetGrid t = generate_target_grid(s, 1.0, 1.0);
  std::vector<CandidatePose> c{{Point3(-2, 2, 2.4), 0}};
  VisibilityMatrix v(1, t.points.size());
  Placement p;
  p.selected = {0};
  const auto dir = kWork / "bare";
  fs::create_directories(dir);
  spit(dir / "obstacles.ply", "stale");
  export_visuals(s, t, c, p, before_after_report(v, p), dir);
  CHECK(fs::exists(dir / "targets.ply"));
  CHECK_FALSE(fs::exists(dir / "obstacles.ply"));
}

TEST_CASE("repeat runs are byte-identical") {
  const auto config = load_run_config(write_config("repeat", {{"cache", false}}));
  RunOptions a, b;
  a.output_dir = kWork / "repeat" / "a";
  b.output_dir = kWork / "repeat" / "b";
  b.threads = 1;
  fs::remove_all(*a.output_dir);
  fs::remove_all(*b.output_dir);
  run(config, a);
  run(config, b);
  for (const char* f : {"placement.json", "coverage.csv", "summary.json", "visibility.bin",
                        "instance.txt", "targets.ply"}) {
    CHECK_MESSAGE(slurp(*a.output_dir / "h2.4" / f) == slurp(*b.output_dir / "h2.4" / f), f);
  }
}

TEST_CASE("visibility cache is reused") {
  const auto config = load_run_config(write_config("cached"));
  RunOptions opts;
  opts.output_dir = kWork / "cached" / "out";
  fs::remove_all(*opts.output_dir);
  const auto first = run(config, opts);
  const auto second = run(config, opts);
  CHECK_FALSE(first.heights[0].from_cache);
  CHECK(second.heights[0].from_cache);
  CHECK(first.heights[0].visibility == second.heights[0].visibility);
  CHECK(slurp(first.heights[0].output_dir / "placement.json") ==
        slurp(second.heights[0].output_dir / "placement.json"));

  SensorSpec other = config.sensor;
  other.h_step = 1;
  CHECK(visibility_cache_key(Scene{}, config.sensor, 2.4, 6, 0.5, 1, 1) !=
        visibility_cache_key(Scene{}, other, 2.4, 6, 0.5, 1, 1));
}

TEST_CASE("infeasible height is reported and the run continues") {
  const auto config = load_run_config(write_config("pen", json::object(), true));
  RunOptions opts;
  opts.output_dir = kWork / "pen" / "out";
  const auto result = run(config, opts);
  CHECK(result.exit_code == kExitInfeasible);
  REQUIRE(result.heights.size() == 2);
  for (const auto& h : result.heights) {
    CHECK(h.exit_code == kExitInfeasible);
    REQUIRE(h.infeasible);
    CHECK(h.infeasible->max_cvr < 1.0);
    CHECK(fs::exists(h.output_dir / "infeasible.json"));
    CHECK_FALSE(fs::exists(h.output_dir / "placement.json"));
    const auto doc = json::parse(slurp(h.output_dir / "infeasible.json"));
    CHECK(doc["uncovered_target_indices"].size() == h.infeasible->uncovered_target_indices.size());
    for (auto k : h.infeasible->uncovered_target_indices) {
      const double x = result.targets.points[k].x();
      CHECK(x > 22.1);
    }
  }
}

TEST_CASE("sweep table") {
  CHECK(sweep_to_csv({}).find('\n') == sweep_to_csv({}).size() - 1);  // header only
  const std::vector<RunConfig> configs{load_run_config(write_config("sweep_ok")),
                                       load_run_config(write_config("sweep_pen", json::object(), true))};
  RunOptions opts;
  opts.write_files = false;
  const auto rows = sweep(configs, opts);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].status == "optimal");
  CHECK(rows[0].selected_count > 0);
  CHECK(rows[2].status != "optimal");
  const std::string csv = sweep_to_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("command-line exit codes") {
  const auto good = write_config("cli_ok");
  const auto out = kWork / "cli_ok" / "out";
  CHECK(run_cli("run --config " + good.string() + " --out " + out.string()) == kExitOk);
  const auto placement = out / "h2.4" / "placement.json";
  const auto matrix = out / "h2.4" / "visibility.bin";
  CHECK(run_cli("verify --placement " + placement.string() + " --matrix " + matrix.string()) ==
        kExitOk);

  auto doc = json::parse(slurp(placement));
  doc["selected_indices"].erase(doc["selected_indices"].size() - 1);
  const auto tampered = kWork / "cli_ok" / "tampered.json";
  spit(tampered, doc.dump());
  CHECK(run_cli("verify --placement " + tampered.string() + " --matrix " + matrix.string()) ==
        kExitVerifyFailed);

  CHECK(run_cli("run --config " + write_config("cli_pen", json::object(), true).string()) ==
        kExitInfeasible);
  CHECK(run_cli("run --config " + write_config("cli_cap", {{"solver", {{"node_limit", 1}}}, {"cache", false}}).string()) ==
        kExitSolverCap);
  CHECK(run_cli("run --config " + write_config("cli_bad", {{"cvr", 3}}).string()) == kExitConfig);
  CHECK(run_cli("run --config " + write_config("cli_noscene", {{"scene", "missing.json"}}).string()) ==
        kExitScene);
  CHECK(run_cli("frobnicate") == kExitConfig);
}
