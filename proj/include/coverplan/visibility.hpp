#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coverplan/raycast.hpp"
#include "coverplan/scene.hpp"

namespace coverplan {

/// Binary sensor-by-target matrix; row i is candidate i, column k target k.
/// Rows are packed into 64-bit words, bit k of a row lives in word k / 64.
class VisibilityMatrix {
 public:
  VisibilityMatrix() = default;
  VisibilityMatrix(std::size_t n_sensors, std::size_t n_targets);

  std::size_t n_sensors() const { return n_sensors_; }
  std::size_t n_targets() const { return n_targets_; }
  std::size_t words_per_row() const { return words_per_row_; }

  bool get(std::size_t sensor, std::size_t target) const {
    return (bits_[sensor * words_per_row_ + target / 64] >> (target % 64)) & 1u;
  }
  void set(std::size_t sensor, std::size_t target, bool value = true);

  std::span<const std::uint64_t> row(std::size_t sensor) const {
    return {bits_.data() + sensor * words_per_row_, words_per_row_};
  }
  std::span<std::uint64_t> row(std::size_t sensor) {
    return {bits_.data() + sensor * words_per_row_, words_per_row_};
  }
  std::size_t row_count(std::size_t sensor) const;

  /// Bitwise OR of the given rows.
  std::vector<std::uint64_t> union_of(std::span<const std::size_t> rows) const;

  bool operator==(const VisibilityMatrix&) const = default;

 private:
  std::size_t n_sensors_ = 0;
  std::size_t n_targets_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// v_ik = 1 iff some non-max_range cast point of sensor i lies within
/// `targets.radius` (3D Euclidean, inclusive) of target k.
VisibilityMatrix build_visibility_matrix(std::span<const std::vector<CastPoint>> cast_points,
                                         const TargetGrid& targets);

struct CoverageSummary {
  double cvr = 0.0;
  std::size_t covered_targets = 0;
  std::vector<std::size_t> uncovered_target_indices;
};

CoverageSummary compute_cvr(const VisibilityMatrix& v);

struct InfeasibilityReport {
  double requested_cvr = 0.0;
  double max_cvr = 0.0;
  std::vector<std::size_t> uncovered_target_indices;
};

/// nullopt when the full candidate set reaches `requested_cvr`.
std::optional<InfeasibilityReport> check_feasibility(const VisibilityMatrix& v,
                                                     double requested_cvr);

/// One line per sensor, comma-separated 0/1 per target.
std::string visibility_to_csv(const VisibilityMatrix& v);
VisibilityMatrix visibility_from_csv(const std::string& text);

/// Little-endian u32 N_S, u32 N_T, then ceil(N_S*N_T/8) bytes holding the
/// matrix bits in row-major order, least significant bit first.
std::vector<std::uint8_t> visibility_to_binary(const VisibilityMatrix& v);
VisibilityMatrix visibility_from_binary(std::span<const std::uint8_t> bytes);

void write_visibility_binary(const VisibilityMatrix& v, const std::filesystem::path& path);
VisibilityMatrix read_visibility_binary(const std::filesystem::path& path);

}  // namespace coverplan
