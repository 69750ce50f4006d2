#include "coverplan/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <json.hpp>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

std::string real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double mean_of(const std::vector<std::size_t>& counts) {
  if (counts.empty()) return 0.0;
  const double sum = std::accumulate(counts.begin(), counts.end(), 0.0);
  return sum / static_cast<double>(counts.size());
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CoverageStats coverage_stats(const VisibilityMatrix& v,
                             std::optional<std::span<const std::size_t>> selected) {
  std::vector<std::size_t> rows;
  if (selected) {
    rows.assign(selected->begin(), selected->end());
    for (auto i : rows) {
      if (i >= v.n_sensors()) throw ConfigError("coverage stats: sensor index out of range");
    }
  } else {
    rows.resize(v.n_sensors());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  if (rows.empty()) throw ConfigError("coverage stats: empty sensor selection");

  CoverageStats s;
  s.sensor_count_used = rows.size();
  s.per_target_count.assign(v.n_targets(), 0);
  for (auto i : rows) {
    for (std::size_t k = 0; k < v.n_targets(); ++k) {
      if (v.get(i, k)) ++s.per_target_count[k];
    }
  }
  s.per_target_pct.resize(v.n_targets());
  const double denom = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < v.n_targets(); ++k) {
    s.per_target_pct[k] = 100.0 * static_cast<double>(s.per_target_count[k]) / denom;
  }
  if (!s.per_target_pct.empty()) {
    s.mean_pct = std::accumulate(s.per_target_pct.begin(), s.per_target_pct.end(), 0.0) /
                 static_cast<double>(s.per_target_pct.size());
  }
  s.median_pct = median(s.per_target_pct);
  return s;
}

BeforeAfterReport before_after_report(const VisibilityMatrix& v, const Placement& placement) {
  BeforeAfterReport r;
  r.before = coverage_stats(v);
  if (placement.selected.empty()) {
    // Nothing selected (e.g. cvr = 0): every target is seen by zero sensors.
    r.after.per_target_pct.assign(v.n_targets(), 0.0);
    r.after.per_target_count.assign(v.n_targets(), 0);
  } else {
    r.after = coverage_stats(v, std::span<const std::size_t>(placement.selected));
  }
  const auto covered = [&](const CoverageStats& s) {
    if (s.per_target_count.empty()) return 1.0;
    const auto n = std::count_if(s.per_target_count.begin(), s.per_target_count.end(),
                                 [](std::size_t c) { return c > 0; });
    return static_cast<double>(n) / static_cast<double>(s.per_target_count.size());
  };
  r.cvr_before = covered(r.before);
  r.cvr_after = covered(r.after);
  r.mean_count_before = mean_of(r.before.per_target_count);
  r.mean_count_after = mean_of(r.after.per_target_count);
  return r;
}

std::string coverage_to_csv(const TargetGrid& targets, const BeforeAfterReport& report) {
  std::string out = "x,y,C_before,C_after,count_before,count_after\n";
  for (std::size_t k = 0; k < targets.points.size(); ++k) {
    out += real(targets.points[k].x()) + ',' + real(targets.points[k].y()) + ',' +
           real(report.before.per_target_pct[k]) + ',' + real(report.after.per_target_pct[k]) +
           ',' + std::to_string(report.before.per_target_count[k]) + ',' +
           std::to_string(report.after.per_target_count[k]) + '\n';
  }
  return out;
}

std::string summary_to_json(const BeforeAfterReport& report) {
  nlohmann::ordered_json doc;
  const auto side = [](const CoverageStats& s, double cvr, double mean_count) {
    nlohmann::ordered_json j;
    j["sensor_count"] = s.sensor_count_used;
    j["cvr"] = cvr;
    j["mean_pct"] = s.mean_pct;
    j["median_pct"] = s.median_pct;
    j["mean_count"] = mean_count;
    return j;
  };
  doc["before"] = side(report.before, report.cvr_before, report.mean_count_before);
  doc["after"] = side(report.after, report.cvr_after, report.mean_count_after);
  return doc.dump(2) + "\n";
}

}  // namespace coverplan
