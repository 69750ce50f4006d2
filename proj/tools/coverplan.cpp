// coverplan: minimum roadside sensor placement for line-of-sight coverage.
//
//   coverplan run    --config <path> [--out <dir>]
//   coverplan sweep  --configs <path>... [--out <csv>]
//   coverplan verify --placement <json> --matrix <bin>
//
// COVERPLAN_THREADS caps the raycasting worker pool.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coverplan/config.hpp"
#include "coverplan/error.hpp"
#include "coverplan/pipeline.hpp"

namespace {

unsigned thread_cap() {
  if (const char* env = std::getenv("COVERPLAN_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid COVERPLAN_THREADS='" << env << "'\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const auto config = coverplan::load_run_config(config_path);
  coverplan::RunOptions options;
  options.threads = thread_cap();
  if (!out_dir.empty()) options.output_dir = out_dir;

  const auto result = coverplan::run(config, options);
  std::cout << config.name << ": " << result.targets.points.size() << " targets\n";
  for (const auto& h : result.heights) {
    std::cout << "  h=" << h.height << " m: " << h.candidates.size() << " candidates, max cvr "
              << h.max_coverage.cvr;
    if (h.placement) {
      std::cout << ", selected " << h.placement->selected.size() << " ("
                << coverplan::to_string(h.placement->proof) << ", "
                << h.placement->stats.nodes_explored << " nodes, "
                << h.placement->stats.runtime_seconds << " s)";
    }
    if (h.from_cache) std::cout << " [cached visibility]";
    std::cout << "\n";
    if (!h.message.empty()) std::cerr << "  h=" << h.height << " m: " << h.message << "\n";
    std::cout << "    -> " << h.output_dir.string() << "\n";
  }
  return result.exit_code;
}

int cmd_sweep(const std::vector<std::string>& config_paths, const std::string& out_csv) {
  std::vector<coverplan::RunConfig> configs;
  for (const auto& p : config_paths) configs.push_back(coverplan::load_run_config(p));
  coverplan::RunOptions options;
  options.threads = thread_cap();
  const auto rows = coverplan::sweep(configs, options);
  const auto csv = coverplan::sweep_to_csv(rows);
  if (out_csv.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw coverplan::IoError("cannot write " + out_csv);
    out << csv;
  }
  return coverplan::kExitOk;
}

int cmd_verify(const std::string& placement, const std::string& matrix) {
  const auto outcome = coverplan::verify_files(placement, matrix);
  if (outcome.ok) {
    std::cout << "placement verified\n";
    return coverplan::kExitOk;
  }
  for (const auto& p : outcome.problems) std::cerr << "verify: " << p << "\n";
  return coverplan::kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal roadside sensor placement"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run the full pipeline for one config");
  run->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::vector<std::string> sweep_configs;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run several configs and tabulate the results");
  sweep->add_option("--configs", sweep_configs, "Run configuration JSON files");
  sweep->add_option("--out", sweep_out, "Summary CSV path (default: stdout)");

  std::string placement_path;
  std::string matrix_path;
  auto* verify = app.add_subcommand("verify", "Check a placement against a visibility dump");
  verify->add_option("--placement", placement_path, "placement.json")->required()->check(CLI::ExistingFile);
  verify->add_option("--matrix", matrix_path, "visibility.bin")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : coverplan::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*sweep) return cmd_sweep(sweep_configs, sweep_out);
    if (*verify) return cmd_verify(placement_path, matrix_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return coverplan::exit_code_for(e);
  }
  return coverplan::kExitOk;
}
