#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coverplan/optmodel.hpp"
#include "coverplan/scene.hpp"

namespace coverplan {

enum class Proof : std::uint8_t {
  optimal,
  infeasible,
  none,  // heuristic result or search budget exhausted
};

const char* to_string(Proof proof);

struct SolverStats {
  std::uint64_t nodes_explored = 0;
  double runtime_seconds = 0.0;
};

struct Placement {
  std::vector<std::size_t> selected;  // ascending candidate indices
  double objective_value = 0.0;
  std::size_t covered_count = 0;
  Proof proof = Proof::none;
  SolverStats stats;
};

struct SolverOptions {
  std::uint64_t node_limit = 0;  // 0 = unlimited
  double time_limit_seconds = 0.0;  // 0 = unlimited
};

/// Exact branch-and-bound over the sensor variables.
///
/// Depth-first; each node branches on the free candidate that covers the
/// most still-uncovered targets (lowest index on ties), include-branch
/// first. A node is pruned when the free candidates cannot close the
/// coverage deficit, or when its cost plus a covering lower bound reaches
/// the incumbent. The lower bound takes the fewest free candidates whose
/// largest gains sum to the deficit and charges each at the cheapest free
/// cost. The incumbent starts from greedy_cover().
///
/// Among all optimal selections the lexicographically smallest index list
/// is returned, so the result matches brute_force_solve() exactly. When the
/// node or time budget runs out the best selection found so far is returned
/// with Proof::none.
Placement solve(const BipInstance& instance, const SolverOptions& options = {});

/// Enumerates every subset. Ties go to the lexicographically smallest
/// sorted index list. Throws InstanceTooLargeError above 25 candidates.
Placement brute_force_solve(const BipInstance& instance);

inline constexpr std::size_t kBruteForceMaxSensors = 25;

/// Repeatedly adds the candidate with the most uncovered targets (lowest
/// index on ties) until min_cover_count is met. Proof::infeasible when the
/// candidates run out first.
Placement greedy_cover(const BipInstance& instance);

/// Recomputes coverage and objective from scratch.
bool verify(const Placement& placement, const BipInstance& instance);

/// Placement document: selected_indices, positions, objective, covered_count,
/// cvr_achieved, proof, the model parameters and solver_stats. Runtime is
/// left out so identical runs serialize identically.
std::string placement_to_json(const Placement& placement, const BipInstance& instance,
                              std::span<const CandidatePose> candidates);

}  // namespace coverplan
