// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances and time budgets are fixed
// constants below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "coverplan/config.hpp"
#include "coverplan/pipeline.hpp"
#include "coverplan/solver.hpp"
#include "support.hpp"

using namespace coverplan;
namespace fs = std::filesystem;
namespace ct = coverplan::testing;

namespace {

const fs::path kData = COVERPLAN_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= budget_s) {
    out.pass = false;
    out.detail += "; over time budget";
  }
  if (!out.pass) ++g_failures;
  std::printf("[%s] %2d %-34s %7.2fs / %gs  %s\n", out.pass ? "PASS" : "FAIL", id, name, secs,
              budget_s, out.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome ray_direction_closed_form() {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> h(0.0, 360.0), v(-90.0, 90.0);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const double ah = h(rng), av = v(rng);
    const double hr = ah * kPi / 180.0, vr = av * kPi / 180.0;
    const Vec3 ref(std::sin(hr) * std::cos(vr), std::cos(hr) * std::cos(vr), std::sin(vr));
    worst = std::max(worst, (ray_direction(ah, av) - ref).cwiseAbs().maxCoeff());
  }
  const bool exact_north = ray_direction(0, 0) == Vec3(0, 1, 0);
  return {worst <= kTol && exact_north,
          fmt("max abs err %.3g (tol 1e-12), (0,0) exact: ", worst) + (exact_north ? "yes" : "no")};
}

Outcome ground_reach() {
  Scene s;
  s.road = ct::rect_road(-1, -1, 1, 1);
  s.extent = {{-150, -150}, {150, 150}};
  const Bvh bvh = build_bvh(s);
  double reach = 0;
  for (const auto& p : cast_sensor(bvh, SensorSpec{}, {Point3(0, 0, 2.4), 0})) {
    if (p.kind == HitKind::ground) reach = std::max(reach, p.position.head<2>().norm());
  }
  return {reach >= 66.0 && reach <= 70.0, fmt("max ground reach %.3f m (window [66, 70])", reach)};
}

Outcome bvh_vs_brute_force() {
  constexpr double kTol = 1e-9;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> count(1, 10000);
  std::uniform_real_distribution<double> o(-60, 60);
  double worst = 0;
  std::size_t mismatched = 0, hits = 0, rays = 0;
  for (int scene = 0; scene < 50; ++scene) {
    const Bvh bvh(ct::random_triangles(rng, count(rng), 50.0, 4.0));
    for (int r = 0; r < 1000; ++r, ++rays) {
      const Ray ray{Point3(o(rng), o(rng), o(rng)), ct::random_unit(rng)};
      const auto a = bvh.nearest_hit(ray, 200.0);
      const auto b = ct::brute_force_nearest(bvh.triangles(), ray, 200.0);
      if (a.has_value() != b.has_value()) {
        ++mismatched;
      } else if (a) {
        ++hits;
        worst = std::max(worst, std::abs(a->t - b->t));
      }
    }
  }
  return {mismatched == 0 && worst <= kTol,
          fmt("%g rays, %g hits, hit/miss mismatches %g", rays, hits, mismatched) +
              fmt(", max |dt| %.3g (tol 1e-9)", worst)};
}

Outcome visibility_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t equal = 0;
  for (int round = 0; round < 20; ++round) {
    Scene s;
    const double len = 8 + 12 * u(rng);
    s.road = ct::rect_road(0, 0, len, 5);
    s.extent = {{-5, -5}, {len + 5, 10}};
    for (int b = 0; b < 3; ++b) {
      const Point3 lo(len * u(rng), 5 * u(rng), 0);
      s.obstacles.push_back(ct::box_mesh(lo, lo + Vec3(0.5 + u(rng), 0.5 + u(rng), 1 + 3 * u(rng))));
    }
    TargetGrid t = generate_target_grid(s, 1.0, 0.5 + u(rng));
    if (t.points.size() > 100) t.points.resize(100);
    auto cands = generate_candidates(s, 3.0, 1.5 + 3 * u(rng), 0.5);
    if (cands.size() > 10) cands.resize(10);
    const auto cps = cast_all(build_bvh(s), SensorSpec{}, cands);
    equal += build_visibility_matrix(cps, t) == ct::brute_force_visibility(cps, t);
  }
  return {equal == 20, fmt("%g / 20 scenes identical", equal)};
}

struct SolverTally {
  std::size_t instances = 0, objective_equal = 0, sets_equal_auto = 0, auto_instances = 0;
  std::size_t semantics_ok = 0;
};
SolverTally g_tally;

Outcome solver_exactness() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> ns_d(1, 12), nt_d(1, 40);
  std::uniform_int_distribution<int> cvr_d(0, 2);
  std::uniform_real_distribution<double> dens(0.1, 0.4);
  for (int round = 0; round < 200; ++round) {
    const std::size_t ns = ns_d(rng), nt = nt_d(rng);
    const double cvr = std::array{0.5, 0.8, 1.0}[cvr_d(rng)];
    const bool use_auto = round % 2 == 1;
    auto v = ct::random_matrix(rng, ns, nt, dens(rng));
    const auto o = build_overlap(ct::random_candidates(rng, ns), 6.0);
    const auto inst = build_instance(std::move(v), o, cvr, use_auto ? default_lambda(o) : 0.0);
    const auto bf = brute_force_solve(inst);
    const auto bb = solve(inst);
    ++g_tally.instances;
    g_tally.objective_equal += bb.objective_value == bf.objective_value;
    if (use_auto) {
      ++g_tally.auto_instances;
      g_tally.sets_equal_auto += bb.selected == bf.selected;
    }
    // Corrected linking constraint: c is exactly the coverage indicator.
    std::vector<std::uint8_t> s(ns, 0);
    for (auto i : bb.selected) s[i] = 1;
    const auto c = derived_coverage(inst, s);
    bool ok = satisfies_constraints(inst, s, c);
    std::size_t sum_c = 0;
    for (std::size_t k = 0; k < nt; ++k) {
      bool seen = false;
      for (auto i : bb.selected) seen |= inst.visibility.get(i, k);
      ok &= (c[k] == 1) == seen;
      sum_c += c[k];
    }
    ok &= sum_c >= min_cover_count(nt, cvr);
    g_tally.semantics_ok += ok;
  }
  const bool pass = g_tally.objective_equal == g_tally.instances &&
                    g_tally.sets_equal_auto == g_tally.auto_instances;
  return {pass, fmt("objective equal %g/%g, auto-lambda sets equal %g/", g_tally.objective_equal,
                    g_tally.instances, g_tally.sets_equal_auto) +
                    std::to_string(g_tally.auto_instances)};
}

Outcome constraint_semantics() {
  return {g_tally.instances == 200 && g_tally.semantics_ok == g_tally.instances,
          fmt("%g / %g solved instances consistent", g_tally.semantics_ok, g_tally.instances)};
}

std::vector<RunResult> g_free, g_busy;

RunConfig reference_config(const std::string& name) {
  return load_run_config(kData / "configs" / (name + ".json"));
}

Outcome end_to_end() {
  RunOptions opts;
  opts.threads = 1;
  opts.write_files = false;
  std::string detail;
  bool pass = true;
  for (const char* name : {"A1", "B1", "C1"}) {
    g_free.push_back(run(reference_config(name), opts));
    detail += name;
    for (const auto& h : g_free.back().heights) {
      const bool ok = h.placement && h.max_coverage.cvr == 1.0 && h.report &&
                      h.report->cvr_after == 1.0 && h.placement->proof == Proof::optimal &&
                      h.placement->selected.size() < h.candidates.size();
      pass &= ok;
      detail += " " + std::to_string(h.placement ? h.placement->selected.size() : 0) + "/" +
                std::to_string(h.candidates.size()) + (ok ? "" : "!");
    }
    detail += "; ";
  }
  return {pass, "selected/candidates at h=2.4,4,6: " + detail};
}

Outcome obstacle_monotonicity() {
  RunOptions opts;
  opts.write_files = false;
  for (const char* name : {"A2", "B2", "C2"}) g_busy.push_back(run(reference_config(name), opts));
  bool pass = g_free.size() == 3;
  std::string detail;
  for (std::size_t c = 0; c < g_free.size(); ++c) {
    for (std::size_t h = 0; h < g_free[c].heights.size(); ++h) {
      const double free = coverage_stats(g_free[c].heights[h].visibility).mean_pct;
      const double busy = coverage_stats(g_busy[c].heights[h].visibility).mean_pct;
      pass &= busy < free;
      detail += fmt("%.1f<%.1f ", busy, free);
    }
  }
  return {pass, "mean % with/without obstacles: " + detail};
}

Outcome regularization() {
  // Rows: 0 = {t0,t1}, 1 = {t2,t3}, 2 = {t0,t2}, 3 = {t1,t3}. The only
  // two-sensor covers are {0,1} (adjacent candidates) and {2,3} (far apart).
  const auto v = ct::matrix_from_rows({"1100", "0011", "1010", "0101"});
  std::vector<CandidatePose> cands{{Point3(0, 0, 2.4), 0}, {Point3(1, 0, 2.4), 1},
                                   {Point3(10, 0, 2.4), 2}, {Point3(20, 0, 2.4), 3}};
  const auto o = build_overlap(cands, 2.0);
  const auto with = build_instance(v, o, 1.0, default_lambda(o));
  const auto without = build_instance(v, o, 1.0, 0.0);
  const auto a = solve(with), a_bf = brute_force_solve(with);
  const auto b = solve(without), b_bf = brute_force_solve(without);
  const bool pass = a.selected == std::vector<std::size_t>{2, 3} && a.selected == a_bf.selected &&
                    b.selected == std::vector<std::size_t>{0, 1} && b.selected == b_bf.selected;
  auto list = [](const std::vector<std::size_t>& s) {
    std::string out = "{";
    for (auto i : s) out += (out.size() > 1 ? "," : "") + std::to_string(i);
    return out + "}";
  };
  return {pass, "lambda=auto -> " + list(a.selected) + ", lambda=0 -> " + list(b.selected)};
}

Outcome determinism() {
  auto config = reference_config("A2");
  config.use_cache = false;
  const fs::path root = fs::temp_directory_path() / "coverplan_acceptance";
  RunOptions a, b;
  a.output_dir = root / "first";
  b.output_dir = root / "second";
  fs::remove_all(root);
  const auto ra = run(config, a);
  run(config, b);
  std::size_t same = 0, total = 0;
  for (const auto& h : ra.heights) {
    const auto rel = h.output_dir.filename();
    for (const char* f : {"placement.json", "coverage.csv"}) {
      ++total;
      const std::string x = slurp(*a.output_dir / rel / f);
      same += !x.empty() && x == slurp(*b.output_dir / rel / f);
    }
  }
  fs::remove_all(root);
  return {same == total && total == 6, fmt("%g / %g files byte-identical", same, total)};
}

}  // namespace

int main() {
  criterion(1, "ray direction closed form", 1, ray_direction_closed_form);
  criterion(2, "ground reach at 2.4 m", 5, ground_reach);
  criterion(3, "BVH vs brute force", 60, bvh_vs_brute_force);
  criterion(4, "visibility matrix oracle", 30, visibility_oracle);
  criterion(5, "solver exactness", 120, solver_exactness);
  criterion(6, "corrected constraint semantics", 1, constraint_semantics);
  criterion(7, "end-to-end T-junction", 600, end_to_end);
  criterion(8, "obstacle monotonicity", 600, obstacle_monotonicity);
  criterion(9, "regularization behavior", 5, regularization);
  criterion(10, "determinism", 600, determinism);
  std::printf("%s: %d failing criteria\n", g_failures == 0 ? "ACCEPTED" : "REJECTED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
