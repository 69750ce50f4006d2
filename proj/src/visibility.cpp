#include "coverplan/visibility.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

// Uniform 2D hash of target points with cells as wide as the match radius,
// so any match lies in the 3x3 neighbourhood of the query cell.
class TargetIndex {
 public:
  explicit TargetIndex(const TargetGrid& targets) : targets_(targets) {
    if (targets.points.empty()) return;
    cell_ = targets.radius;
    lo_ = targets.points.front().head<2>();
    Point2 hi = lo_;
    for (const auto& p : targets.points) {
      lo_ = lo_.cwiseMin(p.head<2>());
      hi = hi.cwiseMax(p.head<2>());
    }
    nx_ = static_cast<long>(std::floor((hi.x() - lo_.x()) / cell_)) + 1;
    ny_ = static_cast<long>(std::floor((hi.y() - lo_.y()) / cell_)) + 1;
    start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    std::vector<std::size_t> cell_of(targets.points.size());
    for (std::size_t k = 0; k < targets.points.size(); ++k) {
      cell_of[k] = static_cast<std::size_t>(cell_index(targets.points[k].head<2>()));
      ++start_[cell_of[k] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    entries_.resize(targets.points.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < targets.points.size(); ++k) entries_[fill[cell_of[k]]++] = k;
  }

  template <typename Fn>
  void for_each_within(const Point3& p, Fn&& fn) const {
    if (entries_.empty()) return;
    const double r2 = targets_.radius * targets_.radius;
    const long cx = static_cast<long>(std::floor((p.x() - lo_.x()) / cell_));
    const long cy = static_cast<long>(std::floor((p.y() - lo_.y()) / cell_));
    for (long y = std::max(cy - 1, 0L); y <= std::min(cy + 1, ny_ - 1); ++y) {
      for (long x = std::max(cx - 1, 0L); x <= std::min(cx + 1, nx_ - 1); ++x) {
        const auto c = static_cast<std::size_t>(y * nx_ + x);
        for (std::size_t e = start_[c]; e < start_[c + 1]; ++e) {
          const std::size_t k = entries_[e];
          if ((p - targets_.points[k]).squaredNorm() <= r2) fn(k);
        }
      }
    }
  }

 private:
  long cell_index(const Point2& p) const {
    const long x = static_cast<long>(std::floor((p.x() - lo_.x()) / cell_));
    const long y = static_cast<long>(std::floor((p.y() - lo_.y()) / cell_));
    return y * nx_ + x;
  }

  const TargetGrid& targets_;
  double cell_ = 1.0;
  Point2 lo_{0.0, 0.0};
  long nx_ = 0;
  long ny_ = 0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> entries_;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

VisibilityMatrix::VisibilityMatrix(std::size_t n_sensors, std::size_t n_targets)
    : n_sensors_(n_sensors),
      n_targets_(n_targets),
      words_per_row_((n_targets + 63) / 64),
      bits_(n_sensors * words_per_row_, 0) {}

void VisibilityMatrix::set(std::size_t sensor, std::size_t target, bool value) {
  auto& word = bits_[sensor * words_per_row_ + target / 64];
  const std::uint64_t mask = std::uint64_t{1} << (target % 64);
  word = value ? (word | mask) : (word & ~mask);
}

std::size_t VisibilityMatrix::row_count(std::size_t sensor) const {
  std::size_t n = 0;
  for (auto w : row(sensor)) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint64_t> VisibilityMatrix::union_of(std::span<const std::size_t> rows) const {
  std::vector<std::uint64_t> acc(words_per_row_, 0);
  for (auto i : rows) {
    const auto r = row(i);
    for (std::size_t w = 0; w < words_per_row_; ++w) acc[w] |= r[w];
  }
  return acc;
}

VisibilityMatrix build_visibility_matrix(std::span<const std::vector<CastPoint>> cast_points,
                                         const TargetGrid& targets) {
  VisibilityMatrix v(cast_points.size(), targets.points.size());
  const TargetIndex index(targets);
  for (std::size_t i = 0; i < cast_points.size(); ++i) {
    auto row = v.row(i);
    for (const auto& cp : cast_points[i]) {
      if (cp.kind == HitKind::max_range) continue;
      index.for_each_within(cp.position, [&](std::size_t k) {
        row[k / 64] |= std::uint64_t{1} << (k % 64);
      });
    }
  }
  return v;
}

CoverageSummary compute_cvr(const VisibilityMatrix& v) {
  std::vector<std::size_t> all(v.n_sensors());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto covered = v.union_of(all);

  CoverageSummary s;
  for (std::size_t k = 0; k < v.n_targets(); ++k) {
    if ((covered[k / 64] >> (k % 64)) & 1u) {
      ++s.covered_targets;
    } else {
      s.uncovered_target_indices.push_back(k);
    }
  }
  s.cvr = v.n_targets() == 0 ? 1.0
                             : static_cast<double>(s.covered_targets) /
                                   static_cast<double>(v.n_targets());
  return s;
}

std::optional<InfeasibilityReport> check_feasibility(const VisibilityMatrix& v,
                                                     double requested_cvr) {
  if (!(requested_cvr >= 0.0 && requested_cvr <= 1.0)) {
    throw ConfigError("requested cvr must lie in [0, 1]");
  }
  auto summary = compute_cvr(v);
  if (summary.cvr >= requested_cvr) return std::nullopt;
  return InfeasibilityReport{requested_cvr, summary.cvr,
                             std::move(summary.uncovered_target_indices)};
}

std::string visibility_to_csv(const VisibilityMatrix& v) {
  std::string out;
  out.reserve(v.n_sensors() * (2 * v.n_targets() + 1));
  for (std::size_t i = 0; i < v.n_sensors(); ++i) {
    for (std::size_t k = 0; k < v.n_targets(); ++k) {
      if (k > 0) out += ',';
      out += v.get(i, k) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

VisibilityMatrix visibility_from_csv(const std::string& text) {
  std::vector<std::vector<bool>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<bool> row;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (line[c] == '0' || line[c] == '1') {
        row.push_back(line[c] == '1');
      } else if (line[c] != ',' && line[c] != '\r') {
        throw IoError("visibility csv: unexpected character in row " +
                      std::to_string(rows.size()));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("visibility csv: ragged row " + std::to_string(rows.size()));
    }
    rows.push_back(std::move(row));
  }
  VisibilityMatrix v(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      if (rows[i][k]) v.set(i, k);
    }
  }
  return v;
}

std::vector<std::uint8_t> visibility_to_binary(const VisibilityMatrix& v) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(v.n_sensors()));
  put_u32(out, static_cast<std::uint32_t>(v.n_targets()));
  const std::size_t total = v.n_sensors() * v.n_targets();
  out.resize(8 + (total + 7) / 8, 0);
  for (std::size_t i = 0; i < v.n_sensors(); ++i) {
    for (std::size_t k = 0; k < v.n_targets(); ++k) {
      if (!v.get(i, k)) continue;
      const std::size_t bit = i * v.n_targets() + k;
      out[8 + bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

VisibilityMatrix visibility_from_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw IoError("visibility dump: truncated header");
  const std::size_t ns = get_u32(bytes, 0);
  const std::size_t nt = get_u32(bytes, 4);
  const std::size_t total = ns * nt;
  if (bytes.size() != 8 + (total + 7) / 8) {
    throw IoError("visibility dump: payload size does not match " + std::to_string(ns) + " x " +
                  std::to_string(nt));
  }
  VisibilityMatrix v(ns, nt);
  for (std::size_t bit = 0; bit < total; ++bit) {
    if ((bytes[8 + bit / 8] >> (bit % 8)) & 1u) v.set(bit / nt, bit % nt);
  }
  return v;
}

void write_visibility_binary(const VisibilityMatrix& v, const std::filesystem::path& path) {
  const auto bytes = visibility_to_binary(v);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

VisibilityMatrix read_visibility_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return visibility_from_binary(bytes);
}

}  // namespace coverplan
