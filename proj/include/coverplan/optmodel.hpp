#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coverplan/scene.hpp"
#include "coverplan/visibility.hpp"

namespace coverplan {

/// Pairwise candidate proximity: o(i, j) = 1 iff |P_i - P_j| <= L.
struct OverlapMatrix {
  std::size_t n = 0;
  std::vector<std::uint8_t> o;       // n x n, row-major
  std::vector<std::int64_t> degree;  // row sums d_i

  bool at(std::size_t i, std::size_t j) const { return o[i * n + j] != 0; }
};

OverlapMatrix build_overlap(std::span<const CandidatePose> candidates, double max_distance);

/// 0.99 / (N_S * max_i d_i). Keeps lambda * sum(d_i) below one for any
/// selection, so the overlap penalty never outweighs one sensor.
double default_lambda(const OverlapMatrix& overlap);

/// Regularized minimum-sensor covering program.
///
///   minimize    sum_i s_i + lambda * sum_i d_i s_i
///   subject to  c_k <= sum_i v_ik s_i <= N_S c_k   for every target k
///               sum_k c_k >= min_cover_count
///
/// Sensor variables s_i are binary. c_k is determined by s (it is the
/// coverage indicator of target k), so solvers only search over s.
struct BipInstance {
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  VisibilityMatrix visibility;
  std::vector<std::int64_t> degree;  // d_i
  double lambda = 0.0;
  double cvr = 1.0;
  std::size_t min_cover_count = 0;

  double cost(std::size_t i) const { return 1.0 + lambda * static_cast<double>(degree[i]); }
  std::vector<double> costs() const;

  /// |S| + lambda * sum_{i in S} d_i, evaluated the same way for every caller.
  double objective(std::size_t count, std::int64_t degree_sum) const {
    return static_cast<double>(count) + lambda * static_cast<double>(degree_sum);
  }
  double objective_of(std::span<const std::size_t> selected) const;
};

/// ceil(n_targets * cvr), robust to representation error in cvr.
std::size_t min_cover_count(std::size_t n_targets, double cvr);

/// Throws InfeasibleError when `cvr` exceeds the matrix's maximum CVR and
/// ConfigError for out-of-range parameters.
BipInstance build_instance(VisibilityMatrix v, const OverlapMatrix& overlap, double cvr,
                           double lambda);

/// c_k implied by a sensor selection: 1 iff some selected row covers k.
std::vector<std::uint8_t> derived_coverage(const BipInstance& instance,
                                           std::span<const std::uint8_t> s);

/// Checks both linking constraints and the coverage constraint for (s, c).
bool satisfies_constraints(const BipInstance& instance, std::span<const std::uint8_t> s,
                           std::span<const std::uint8_t> c);

/// Line format: "NS NT MINCOVER LAMBDA", one line of costs, then one 0/1
/// string per sensor row. Reals use shortest round-trip notation.
std::string instance_to_text(const BipInstance& instance);
BipInstance instance_from_text(const std::string& text);

}  // namespace coverplan
