#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coverplan/scene.hpp"
#include "coverplan/solver.hpp"
#include "coverplan/visibility.hpp"

namespace coverplan {

/// Per-target percentage coverage C_k = 100 * N_Sk / N_S over an evaluated
/// sensor set, where N_Sk counts the set's sensors that see target k and
/// N_S is the size of the set.
struct CoverageStats {
  std::vector<double> per_target_pct;
  std::vector<std::size_t> per_target_count;
  double mean_pct = 0.0;
  double median_pct = 0.0;
  std::size_t sensor_count_used = 0;
};

/// `selected` = nullopt evaluates every candidate. Throws ConfigError for an
/// empty selection or an out-of-range index.
CoverageStats coverage_stats(const VisibilityMatrix& v,
                             std::optional<std::span<const std::size_t>> selected = std::nullopt);

/// Median with the two middle values averaged for even counts.
double median(std::vector<double> values);

struct BeforeAfterReport {
  CoverageStats before;  // all candidates
  CoverageStats after;   // selected sensors
  double cvr_before = 0.0;
  double cvr_after = 0.0;
  double mean_count_before = 0.0;
  double mean_count_after = 0.0;
};

BeforeAfterReport before_after_report(const VisibilityMatrix& v, const Placement& placement);

/// Header x,y,C_before,C_after,count_before,count_after; one row per target.
std::string coverage_to_csv(const TargetGrid& targets, const BeforeAfterReport& report);

/// Means, medians, CVRs and sensor counts of both sides.
std::string summary_to_json(const BeforeAfterReport& report);

}  // namespace coverplan
