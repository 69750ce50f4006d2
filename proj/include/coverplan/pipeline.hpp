#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coverplan/config.hpp"
#include "coverplan/metrics.hpp"
#include "coverplan/optmodel.hpp"
#include "coverplan/scene.hpp"
#include "coverplan/solver.hpp"
#include "coverplan/visibility.hpp"

namespace coverplan {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitConfig = 2,
  kExitScene = 3,
  kExitInfeasible = 4,
  kExitSolverCap = 5,
  kExitVerifyFailed = 6,
};

/// Maps a library exception to its exit code.
int exit_code_for(const std::exception& e);

/// Everything computed for one sensor height. Later stages are empty when
/// an earlier one failed.
struct HeightResult {
  double height = 0.0;
  std::filesystem::path output_dir;
  std::vector<CandidatePose> candidates;
  VisibilityMatrix visibility;
  CoverageSummary max_coverage;
  std::optional<InfeasibilityReport> infeasible;
  std::optional<BipInstance> instance;
  std::optional<Placement> placement;
  std::optional<BeforeAfterReport> report;
  bool from_cache = false;
  int exit_code = kExitOk;
  std::string message;
};

struct RunResult {
  Scene scene;
  TargetGrid targets;
  std::vector<HeightResult> heights;
  int exit_code = kExitOk;  // first non-zero height code
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides the config's
  unsigned threads = 0;                              // 0 = hardware concurrency
  bool write_files = true;
};

/// Scene -> rays -> visibility -> model -> solve -> metrics for every
/// configured height, writing artifacts under `<output_dir>/h<height>/`.
/// Config and scene errors propagate as exceptions; infeasible or capped
/// heights are recorded in their HeightResult and the run continues.
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Casts and matches without solving. Used by run() and the sweep table.
VisibilityMatrix compute_visibility(const Scene& scene, const SensorSpec& sensor,
                                    std::span<const CandidatePose> candidates,
                                    const TargetGrid& targets, unsigned threads = 0);

/// Stable 64-bit FNV-1a digest of everything the visibility matrix depends on.
std::uint64_t visibility_cache_key(const Scene& scene, const SensorSpec& sensor, double height,
                                   double candidate_spacing, double candidate_margin,
                                   double target_spacing, double target_radius);

struct SweepRow {
  std::string config;
  double height = 0.0;
  std::size_t candidate_count = 0;
  std::size_t target_count = 0;
  double max_cvr = 0.0;
  std::size_t selected_count = 0;
  double mean_pct_before = 0.0;
  double median_pct_before = 0.0;
  double mean_pct_after = 0.0;
  double median_pct_after = 0.0;
  std::string status;  // "optimal", or the failure
};

/// Runs every config; a failing row is recorded and the sweep continues.
std::vector<SweepRow> sweep(std::span<const RunConfig> configs, const RunOptions& options = {});
std::string sweep_to_csv(std::span<const SweepRow> rows);

/// ASCII PLY exports: targets colored by post-optimization redundancy,
/// selected sensors, all candidates, and the obstacle meshes when present.
void export_visuals(const Scene& scene, const TargetGrid& targets,
                    std::span<const CandidatePose> candidates, const Placement& placement,
                    const BeforeAfterReport& report, const std::filesystem::path& output_dir);

/// Blue (lowest) to red (highest) ramp over [lo, hi].
std::array<int, 3> redundancy_color(std::size_t value, std::size_t lo, std::size_t hi);

struct VerifyOutcome {
  bool ok = false;
  std::vector<std::string> problems;
};

/// Cross-checks a placement JSON against a binary visibility dump.
VerifyOutcome verify_files(const std::filesystem::path& placement_json,
                           const std::filesystem::path& matrix_bin);

}  // namespace coverplan
