#include "coverplan/solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include <json.hpp>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

using Words = std::vector<std::uint64_t>;
using Clock = std::chrono::steady_clock;

std::size_t popcount_and_not(std::span<const std::uint64_t> row, const Words& covered) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < covered.size(); ++w) {
    n += static_cast<std::size_t>(std::popcount(row[w] & ~covered[w]));
  }
  return n;
}

std::size_t count_covered(const BipInstance& inst, std::span<const std::size_t> selected) {
  const auto u = inst.visibility.union_of(selected);
  std::size_t n = 0;
  for (auto w : u) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool instance_feasible(const BipInstance& inst) {
  std::vector<std::size_t> all(inst.n_s);
  for (std::size_t i = 0; i < inst.n_s; ++i) all[i] = i;
  return count_covered(inst, all) >= inst.min_cover_count;
}

enum class State : std::uint8_t { free, in, out };

// Depth-first search over sensor variables with a mutable partial assignment.
//
// In optimize mode a node is pruned when its bound reaches the incumbent, and
// the incumbent only improves strictly. In witness mode the search looks for
// any completion whose objective does not exceed `budget` and stops at the
// first one.
class BranchAndBound {
 public:
  BranchAndBound(const BipInstance& inst, const SolverOptions& options, Clock::time_point start,
                 std::uint64_t& nodes)
      : inst_(inst), options_(options), start_(start), nodes_(nodes) {}

  struct Result {
    std::vector<std::size_t> selected;
    double objective = std::numeric_limits<double>::infinity();
    bool found = false;
  };

  // Lowest objective among completions of `fixed`, pruning anything that
  // cannot beat `incumbent`.
  Result optimize(const std::vector<State>& fixed, Result incumbent) {
    witness_mode_ = false;
    best_ = std::move(incumbent);
    run(fixed);
    return best_;
  }

  // Some completion of `fixed` with objective <= budget, if one exists.
  Result witness(const std::vector<State>& fixed, double budget) {
    witness_mode_ = true;
    budget_ = budget;
    best_ = Result{};
    run(fixed);
    return best_;
  }

  bool aborted() const { return aborted_; }

 private:
  void run(const std::vector<State>& fixed) {
    state_ = fixed;
    covered_.assign(inst_.visibility.words_per_row(), 0);
    count_ = 0;
    degree_sum_ = 0;
    for (std::size_t i = 0; i < inst_.n_s; ++i) {
      if (state_[i] != State::in) continue;
      const auto row = inst_.visibility.row(i);
      for (std::size_t w = 0; w < covered_.size(); ++w) covered_[w] |= row[w];
      ++count_;
      degree_sum_ += inst_.degree[i];
    }
    covered_count_ = 0;
    for (auto w : covered_) covered_count_ += static_cast<std::size_t>(std::popcount(w));
    done_ = false;
    dfs();
  }

  bool out_of_budget() {
    if (options_.node_limit > 0 && nodes_ >= options_.node_limit) return true;
    if (options_.time_limit_seconds > 0.0 && (nodes_ & 1023u) == 0) {
      const std::chrono::duration<double> elapsed = Clock::now() - start_;
      if (elapsed.count() >= options_.time_limit_seconds) return true;
    }
    return false;
  }

  bool prune(double bound) const {
    return witness_mode_ ? bound > budget_ : bound >= best_.objective;
  }

  void record_leaf() {
    const double obj = inst_.objective(count_, degree_sum_);
    if (witness_mode_ ? obj > budget_ : obj >= best_.objective) return;
    best_.objective = obj;
    best_.found = true;
    best_.selected.clear();
    for (std::size_t i = 0; i < inst_.n_s; ++i) {
      if (state_[i] == State::in) best_.selected.push_back(i);
    }
    if (witness_mode_) done_ = true;
  }

  void dfs() {
    if (done_ || aborted_) return;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    ++nodes_;

    if (covered_count_ >= inst_.min_cover_count) {
      // Every cost is at least one, so extending a feasible set only hurts.
      record_leaf();
      return;
    }
    const std::size_t deficit = inst_.min_cover_count - covered_count_;

    // Gains of the free candidates that still add coverage.
    gains_scratch_.clear();
    Words reachable = covered_;
    std::size_t branch = inst_.n_s;
    std::size_t branch_gain = 0;
    for (std::size_t i = 0; i < inst_.n_s; ++i) {
      if (state_[i] != State::free) continue;
      const auto row = inst_.visibility.row(i);
      const std::size_t gain = popcount_and_not(row, covered_);
      if (gain == 0) continue;
      gains_scratch_.push_back({gain, inst_.degree[i]});
      for (std::size_t w = 0; w < reachable.size(); ++w) reachable[w] |= row[w];
      if (gain > branch_gain) {
        branch_gain = gain;
        branch = i;
      }
    }
    std::size_t reachable_count = 0;
    for (auto w : reachable) reachable_count += static_cast<std::size_t>(std::popcount(w));
    if (reachable_count < inst_.min_cover_count) return;

    // Fewest candidates whose largest gains can close the deficit.
    std::vector<std::size_t> gains(gains_scratch_.size());
    std::int64_t min_degree = std::numeric_limits<std::int64_t>::max();
    for (std::size_t g = 0; g < gains_scratch_.size(); ++g) {
      gains[g] = gains_scratch_[g].first;
      min_degree = std::min(min_degree, gains_scratch_[g].second);
    }
    std::sort(gains.begin(), gains.end(), std::greater<>());
    std::size_t k = 0;
    std::size_t reach = 0;
    while (reach < deficit) reach += gains[k++];
    const double bound = inst_.objective(count_ + k, degree_sum_ + static_cast<std::int64_t>(k) * min_degree);
    if (prune(bound)) return;

    const Words saved = covered_;
    const std::size_t saved_count = covered_count_;

    state_[branch] = State::in;
    const auto row = inst_.visibility.row(branch);
    for (std::size_t w = 0; w < covered_.size(); ++w) covered_[w] |= row[w];
    covered_count_ += branch_gain;
    ++count_;
    degree_sum_ += inst_.degree[branch];
    dfs();
    --count_;
    degree_sum_ -= inst_.degree[branch];
    covered_ = saved;
    covered_count_ = saved_count;

    state_[branch] = State::out;
    dfs();
    state_[branch] = State::free;
  }

  const BipInstance& inst_;
  const SolverOptions& options_;
  Clock::time_point start_;
  std::uint64_t& nodes_;

  bool witness_mode_ = false;
  double budget_ = 0.0;
  bool done_ = false;
  bool aborted_ = false;
  Result best_;

  std::vector<State> state_;
  Words covered_;
  std::size_t covered_count_ = 0;
  std::size_t count_ = 0;
  std::int64_t degree_sum_ = 0;
  std::vector<std::pair<std::size_t, std::int64_t>> gains_scratch_;
};

Placement make_placement(const BipInstance& inst, std::vector<std::size_t> selected, Proof proof) {
  Placement p;
  p.selected = std::move(selected);
  p.objective_value = inst.objective_of(p.selected);
  p.covered_count = count_covered(inst, p.selected);
  p.proof = proof;
  return p;
}

}  // namespace

const char* to_string(Proof proof) {
  switch (proof) {
    case Proof::optimal: return "optimal";
    case Proof::infeasible: return "infeasible";
    case Proof::none: return "none";
  }
  return "unknown";
}

Placement greedy_cover(const BipInstance& inst) {
  Words covered(inst.visibility.words_per_row(), 0);
  std::size_t covered_count = 0;
  std::vector<std::size_t> selected;
  std::vector<bool> used(inst.n_s, false);
  while (covered_count < inst.min_cover_count) {
    std::size_t best = inst.n_s;
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < inst.n_s; ++i) {
      if (used[i]) continue;
      const std::size_t gain = popcount_and_not(inst.visibility.row(i), covered);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == inst.n_s) {
      Placement p = make_placement(inst, {}, Proof::infeasible);
      p.covered_count = 0;
      return p;
    }
    used[best] = true;
    selected.push_back(best);
    const auto row = inst.visibility.row(best);
    for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= row[w];
    covered_count += best_gain;
  }
  std::sort(selected.begin(), selected.end());
  return make_placement(inst, std::move(selected), Proof::none);
}

Placement solve(const BipInstance& inst, const SolverOptions& options) {
  const auto start = Clock::now();
  std::uint64_t nodes = 0;
  auto finish = [&](Placement p) {
    p.stats.nodes_explored = nodes;
    p.stats.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return p;
  };

  if (!instance_feasible(inst)) return finish(make_placement(inst, {}, Proof::infeasible));

  const Placement greedy = greedy_cover(inst);
  BranchAndBound search(inst, options, start, nodes);

  // Phase 1: optimal objective value, seeded with the greedy incumbent.
  BranchAndBound::Result incumbent;
  incumbent.selected = greedy.selected;
  incumbent.objective = greedy.objective_value;
  incumbent.found = true;
  std::vector<State> fixed(inst.n_s, State::free);
  auto best = search.optimize(fixed, incumbent);
  if (search.aborted()) return finish(make_placement(inst, best.selected, Proof::none));
  const double optimum = best.objective;

  // Phase 2: walk indices in ascending order and keep each one whenever an
  // optimal completion still exists with it included. This yields the
  // lexicographically smallest optimal index list.
  std::vector<std::size_t> witness = best.selected;
  Words covered(inst.visibility.words_per_row(), 0);
  std::size_t covered_count = 0;
  for (std::size_t i = 0; i < inst.n_s && covered_count < inst.min_cover_count; ++i) {
    const bool in_witness = std::binary_search(witness.begin(), witness.end(), i);
    bool keep = in_witness;
    if (!in_witness && popcount_and_not(inst.visibility.row(i), covered) > 0) {
      fixed[i] = State::in;
      auto found = search.witness(fixed, optimum);
      if (search.aborted()) return finish(make_placement(inst, witness, Proof::none));
      if (found.found) {
        witness = std::move(found.selected);
        keep = true;
      }
    }
    fixed[i] = keep ? State::in : State::out;
    if (keep) {
      const auto row = inst.visibility.row(i);
      for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= row[w];
      covered_count = 0;
      for (auto w : covered) covered_count += static_cast<std::size_t>(std::popcount(w));
    }
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < inst.n_s; ++i) {
    if (fixed[i] == State::in) selected.push_back(i);
  }
  return finish(make_placement(inst, std::move(selected), Proof::optimal));
}

Placement brute_force_solve(const BipInstance& inst) {
  if (inst.n_s > kBruteForceMaxSensors) {
    throw InstanceTooLargeError("brute force: " + std::to_string(inst.n_s) +
                                " candidates exceed the enumeration limit of " +
                                std::to_string(kBruteForceMaxSensors));
  }
  const auto start = Clock::now();
  std::optional<std::vector<std::size_t>> best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
  const std::uint64_t total = std::uint64_t{1} << inst.n_s;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < inst.n_s; ++i) {
      if ((mask >> i) & 1u) subset.push_back(i);
    }
    if (count_covered(inst, subset) < inst.min_cover_count) continue;
    const double obj = inst.objective_of(subset);
    if (!best || obj < best_obj || (obj == best_obj && subset < *best)) {
      best = subset;
      best_obj = obj;
    }
  }
  Placement p = best ? make_placement(inst, *best, Proof::optimal)
                     : make_placement(inst, {}, Proof::infeasible);
  p.stats.nodes_explored = total;
  p.stats.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return p;
}

bool verify(const Placement& placement, const BipInstance& inst) {
  const auto& sel = placement.selected;
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (sel[j] >= inst.n_s) return false;
    if (j > 0 && sel[j] <= sel[j - 1]) return false;
  }
  const std::size_t covered = count_covered(inst, sel);
  if (covered != placement.covered_count) return false;
  if (placement.proof == Proof::infeasible) return sel.empty() && !instance_feasible(inst);
  if (covered < inst.min_cover_count) return false;
  return std::abs(placement.objective_value - inst.objective_of(sel)) <= 1e-9;
}

std::string placement_to_json(const Placement& placement, const BipInstance& inst,
                              std::span<const CandidatePose> candidates) {
  nlohmann::ordered_json doc;
  doc["selected_indices"] = placement.selected;
  doc["positions"] = nlohmann::ordered_json::array();
  for (auto i : placement.selected) {
    const auto& p = candidates[i].position;
    doc["positions"].push_back({p.x(), p.y(), p.z()});
  }
  doc["objective"] = placement.objective_value;
  doc["covered_count"] = placement.covered_count;
  doc["cvr_achieved"] = inst.n_t == 0 ? 1.0
                                       : static_cast<double>(placement.covered_count) /
                                             static_cast<double>(inst.n_t);
  doc["proof"] = to_string(placement.proof);
  doc["requested_cvr"] = inst.cvr;
  doc["min_cover_count"] = inst.min_cover_count;
  doc["lambda"] = inst.lambda;
  doc["n_candidates"] = inst.n_s;
  doc["n_targets"] = inst.n_t;
  doc["degrees"] = inst.degree;
  doc["solver_stats"] = {{"nodes_explored", placement.stats.nodes_explored}};
  return doc.dump(2) + "\n";
}

}  // namespace coverplan
