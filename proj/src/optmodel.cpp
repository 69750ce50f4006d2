#include "coverplan/optmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "coverplan/error.hpp"

namespace coverplan {

namespace {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& token, const char* what) {
  double x = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw IoError(std::string("instance text: bad ") + what + " '" + token + "'");
  }
  return x;
}

}  // namespace

OverlapMatrix build_overlap(std::span<const CandidatePose> candidates, double max_distance) {
  if (!(max_distance >= 0.0)) throw ConfigError("overlap distance L must be non-negative");
  OverlapMatrix m;
  m.n = candidates.size();
  m.o.assign(m.n * m.n, 0);
  m.degree.assign(m.n, 0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if ((candidates[j].position - candidates[i].position).norm() <= max_distance) {
        m.o[i * m.n + j] = 1;
        ++m.degree[i];
      }
    }
  }
  return m;
}

double default_lambda(const OverlapMatrix& overlap) {
  if (overlap.n == 0) return 0.0;
  const auto max_d = *std::max_element(overlap.degree.begin(), overlap.degree.end());
  return 0.99 / (static_cast<double>(overlap.n) * static_cast<double>(max_d));
}

std::vector<double> BipInstance::costs() const {
  std::vector<double> out(n_s);
  for (std::size_t i = 0; i < n_s; ++i) out[i] = cost(i);
  return out;
}

double BipInstance::objective_of(std::span<const std::size_t> selected) const {
  std::int64_t d = 0;
  for (auto i : selected) d += degree[i];
  return objective(selected.size(), d);
}

std::size_t min_cover_count(std::size_t n_targets, double cvr) {
  const double exact = static_cast<double>(n_targets) * cvr;
  // Products such as 100 * 0.07 land a hair above the integer they denote.
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::size_t>(rounded);
  }
  return static_cast<std::size_t>(std::ceil(exact));
}

BipInstance build_instance(VisibilityMatrix v, const OverlapMatrix& overlap, double cvr,
                           double lambda) {
  if (!(cvr >= 0.0 && cvr <= 1.0)) throw ConfigError("cvr must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and non-negative");
  }
  if (overlap.n != v.n_sensors()) {
    throw ConfigError("overlap matrix size does not match the visibility matrix");
  }
  if (auto report = check_feasibility(v, cvr)) {
    throw InfeasibleError("requested cvr " + format_real(cvr) + " exceeds maximum feasible cvr " +
                          format_real(report->max_cvr) + " (" +
                          std::to_string(report->uncovered_target_indices.size()) +
                          " targets unseen by every candidate)");
  }
  BipInstance inst;
  inst.n_s = v.n_sensors();
  inst.n_t = v.n_targets();
  inst.visibility = std::move(v);
  inst.degree = overlap.degree;
  inst.lambda = lambda;
  inst.cvr = cvr;
  inst.min_cover_count = min_cover_count(inst.n_t, cvr);
  return inst;
}

std::vector<std::uint8_t> derived_coverage(const BipInstance& instance,
                                           std::span<const std::uint8_t> s) {
  std::vector<std::uint8_t> c(instance.n_t, 0);
  for (std::size_t i = 0; i < instance.n_s; ++i) {
    if (!s[i]) continue;
    for (std::size_t k = 0; k < instance.n_t; ++k) {
      if (instance.visibility.get(i, k)) c[k] = 1;
    }
  }
  return c;
}

bool satisfies_constraints(const BipInstance& instance, std::span<const std::uint8_t> s,
                           std::span<const std::uint8_t> c) {
  if (s.size() != instance.n_s || c.size() != instance.n_t) return false;
  std::size_t covered = 0;
  for (std::size_t k = 0; k < instance.n_t; ++k) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < instance.n_s; ++i) {
      if (s[i] && instance.visibility.get(i, k)) ++seen;
    }
    if (seen < c[k]) return false;
    if (seen > instance.n_s * c[k]) return false;
    covered += c[k];
  }
  return covered >= instance.min_cover_count;
}

std::string instance_to_text(const BipInstance& instance) {
  std::string out = std::to_string(instance.n_s) + ' ' + std::to_string(instance.n_t) + ' ' +
                    std::to_string(instance.min_cover_count) + ' ' +
                    format_real(instance.lambda) + '\n';
  for (std::size_t i = 0; i < instance.n_s; ++i) {
    if (i > 0) out += ' ';
    out += format_real(instance.cost(i));
  }
  out += '\n';
  for (std::size_t i = 0; i < instance.n_s; ++i) {
    for (std::size_t k = 0; k < instance.n_t; ++k) out += instance.visibility.get(i, k) ? '1' : '0';
    out += '\n';
  }
  return out;
}

BipInstance instance_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string ns_tok, nt_tok, mc_tok, lambda_tok;
  if (!(in >> ns_tok >> nt_tok >> mc_tok >> lambda_tok)) {
    throw IoError("instance text: missing header");
  }
  BipInstance inst;
  inst.n_s = static_cast<std::size_t>(parse_real(ns_tok, "NS"));
  inst.n_t = static_cast<std::size_t>(parse_real(nt_tok, "NT"));
  inst.min_cover_count = static_cast<std::size_t>(parse_real(mc_tok, "MINCOVER"));
  inst.lambda = parse_real(lambda_tok, "LAMBDA");
  if (inst.min_cover_count > inst.n_t) throw IoError("instance text: MINCOVER exceeds NT");
  inst.cvr = inst.n_t == 0 ? 0.0
                           : static_cast<double>(inst.min_cover_count) /
                                 static_cast<double>(inst.n_t);

  inst.degree.assign(inst.n_s, 0);
  for (std::size_t i = 0; i < inst.n_s; ++i) {
    std::string tok;
    if (!(in >> tok)) throw IoError("instance text: missing cost " + std::to_string(i));
    const double cost = parse_real(tok, "cost");
    if (inst.lambda > 0.0) {
      const double d = std::round((cost - 1.0) / inst.lambda);
      inst.degree[i] = static_cast<std::int64_t>(d);
      if (inst.cost(i) != cost) {
        throw IoError("instance text: cost " + std::to_string(i) + " is not 1 + lambda * d");
      }
    } else if (cost != 1.0) {
      throw IoError("instance text: cost must be 1 when lambda is 0");
    }
  }
  inst.visibility = VisibilityMatrix(inst.n_s, inst.n_t);
  for (std::size_t i = 0; i < inst.n_s; ++i) {
    std::string row;
    if (inst.n_t > 0 && !(in >> row)) throw IoError("instance text: missing row " + std::to_string(i));
    if (row.size() != inst.n_t) throw IoError("instance text: row " + std::to_string(i) + " has wrong length");
    for (std::size_t k = 0; k < inst.n_t; ++k) {
      if (row[k] == '1') {
        inst.visibility.set(i, k);
      } else if (row[k] != '0') {
        throw IoError("instance text: row " + std::to_string(i) + " is not a 0/1 string");
      }
    }
  }
  return inst;
}

}  // namespace coverplan
