// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../support/paths.hpp"
#include "localtime/localtime.hpp"

using namespace loctime;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool in_time = secs <= budget_s;
  bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("C%d %s  %s  [%.2f s / %.0f s]  %s\n", id, pass ? "PASS" : "FAIL", title, secs, budget_s,
              (o.detail + (in_time ? "" : "  (over time budget)")).c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

LevelGrid grid_for(const SampledCadlagPath& p, double du, double margin) {
  return LevelGrid::covering(p.min_value(), p.max_value(), du, margin);
}

SampledCadlagPath step_path(std::uint64_t i, std::size_t n = 200) {
  return i % 4 == 3 ? testing_paths::lattice_path(derive_seed(2024, i), n)
                    : testing_paths::random_step_path(derive_seed(2024, i), n, 0.08, 0.05, 0.6);
}

std::string means(const ExperimentReport& r) {
  std::string s;
  for (const auto& row : r.rows) s += (s.empty() ? "" : " ") + fmt("%.4g", row.mean);
  return s;
}

bool strictly_decreasing(const ExperimentReport& r) {
  for (std::size_t l = 1; l < r.rows.size(); ++l)
    if (!(r.rows[l].mean < r.rows[l - 1].mean)) return false;
  return true;
}

// 1. Discrete Tanaka-Meyer identity.
Outcome c1() {
  const double tol = 1e-9;
  double worst = 0.0;
  std::size_t checks = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto p = step_path(i);
    double tv = total_variation(p);
    auto scheme = PartitionScheme::dyadic(p, {1, 3, 5, 7});
    std::vector<Partition> parts;
    for (std::size_t l = 0; l < scheme.size(); ++l) parts.push_back(scheme.level(l));
    parts.push_back(PartitionScheme::full_grid(p).level(0));
    for (const auto& f : builtin_suite())
      for (const auto& part : parts)
        for (double t : {0.3, 0.71, 1.0}) {
          worst = std::max(worst, std::abs(discrete_tanaka_residual(p, f, part, t)) / (1.0 + tv));
          ++checks;
        }
  }
  return {worst <= tol, fmt("%.0f residuals, max |r|/(1+TV) = %.3g", static_cast<double>(checks), worst)};
}

// 2. Mass identities for J and 2Kc.
Outcome c2() {
  const double du = 0.01;
  double worst_j = 0.0, worst_k = 0.0;
  bool ok = true;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto p = step_path(i);
    auto g = grid_for(p, du, 2 * du);
    auto full = PartitionScheme::full_grid(p).level(0);
    double tv = total_variation(p);
    for (double t : {0.5, 1.0}) {
      auto r = restrict(p, t);
      double jumps = 0.0;
      for (const auto& j : jump_sizes(r)) jumps += 0.5 * j.size * j.size;
      double ej = std::abs(j_pi(p, t, g).integral() - jumps);
      auto split = split_kc_kd(k_pi(p, full, t, g), j_pi(p, t, g));
      double ek = std::abs(split.l.integral() - continuous_quadratic_variation(r));
      worst_j = std::max(worst_j, ej);
      worst_k = std::max(worst_k, ek / (2 * du * tv));
      ok = ok && ej <= 1e-12 && ek <= 2 * du * tv;
    }
  }
  return {ok, fmt("max |int J - sum/2| = %.3g, max |int 2Kc - [x]^c| / (2 du TV) = %.3g", worst_j, worst_k)};
}

// 3. Skorokhod map invariants.
Outcome c3() {
  std::size_t bad = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto p = step_path(i, 400);
    for (double eps : {1.0, 0.3, 0.05}) {
      auto sol = skorokhod_map(p, eps);
      const auto& y = sol.regularized.values();
      bad += sol.phi[0] != 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        bad += std::abs(p.value(k) - y[k]) > eps / 2;
        if (k == 0) continue;
        double dy = y[k] - y[k - 1];
        if (dy > 0) bad += std::abs(sol.phi[k] - eps / 2) > 1e-12;
        if (dy < 0) bad += std::abs(sol.phi[k] + eps / 2) > 1e-12;
        // equality holds when x^eps rides a barrier through the jump; allow rounding of the two subtractions
        if (p.is_jump(k)) bad += std::abs(dy) > std::abs(p.value(k) - p.value(k - 1)) + 1e-12;
      }
      for (const auto& s : sol.segments)
        for (std::size_t k = s.start + 1; k <= s.end; ++k) bad += (y[k] - y[k - 1]) * s.direction < 0.0;
    }
  }
  return {bad == 0, fmt("%.0f invariant violations over 300 maps", static_cast<double>(bad))};
}

// 4. Strict crossing counts differ by at most two; indicatrix integral is TV.
Outcome c4() {
  long worst = 0;
  std::size_t levels = 0, skipped = 0;
  double worst_tv = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto p = step_path(i, 400);
    for (double eps : {1.0, 0.3, 0.05}) {
      auto sol = skorokhod_map(p, eps);
      auto g = grid_for(p, 0.01, 0.02);
      for (std::size_t c = 0; c < g.cells; ++c) {
        double z = g.center(c);
        if (exceptional_level(p, sol, z)) {
          ++skipped;
          continue;
        }
        long a = count_crossings(sol.regularized, z, 0.0, 1.0, true).total();
        long b = count_crossings(p, z, eps, 1.0, true).total();
        worst = std::max(worst, std::abs(a - b));
        ++levels;
      }
      double tv = total_variation(sol.regularized);
      worst_tv = std::max(worst_tv, std::abs(banach_indicatrix_field(sol, 1.0, g).integral() - tv));
    }
  }
  return {worst <= 2 && worst_tv <= 1e-9,
          fmt("max strict-count gap %.0f over %.0f levels", static_cast<double>(worst), static_cast<double>(levels)) +
              fmt(" (%.0f exceptional skipped), max |int N - TV| = %.3g", static_cast<double>(skipped), worst_tv)};
}

// 5. Brownian local time at zero against E|B_1|.
Outcome c5() {
  const std::size_t paths = 2000;
  GeneratorSpec spec;
  spec.kind = GeneratorKind::Brownian;
  spec.steps = 1 << 14;
  std::vector<double> l(paths), b(paths);
  parallel_for(paths, worker_count(), [&](std::size_t i) {
    auto s = spec;
    s.seed = derive_seed(5, i, 7);
    auto p = generate(s);
    l[i] = classical_local_time_at(p, 1.0, 0.0);
    b[i] = std::abs(p.values().back());
  });
  std::vector<double> diff(paths);
  for (std::size_t i = 0; i < paths; ++i) diff[i] = l[i] - b[i];
  auto ml = summarize(0, l), mb = summarize(0, b), md = summarize(0, diff);
  bool in_band = ml.mean >= 0.75 && ml.mean <= 0.85;
  bool agrees = std::abs(md.mean) <= 3 * md.se;
  return {in_band && agrees, fmt("mean L_1(0) = %.4f, mean |B_1| = %.4f", ml.mean, mb.mean) +
                                 fmt(", paired diff %.4f (3 SE = %.4f)", md.mean, 3 * md.se)};
}

// 6. K^pi converges to the reference along dyadic refinement.
Outcome c6() {
  ExperimentConfig cfg;
  cfg.generator.kind = GeneratorKind::Brownian;
  cfg.generator.steps = 1 << 14;
  cfg.estimator = Estimator::KPi;
  cfg.ladder = {8, 9, 10, 11, 12, 13};
  cfg.paths = 500;
  cfg.seed = 6;
  cfg.du = 1.0 / 32;
  auto r = run_convergence_experiment(cfg);
  double ratio = r.rows.back().mean / r.rows.front().mean;
  return {strictly_decreasing(r) && ratio < 0.25 && r.violations == 0,
          "means " + means(r) + fmt(", last/first = %.3f", ratio)};
}

// 7. Q statistic and interval-crossing estimates on a jump diffusion.
Outcome c7() {
  ExperimentConfig cfg;
  cfg.generator.kind = GeneratorKind::JumpDiffusion;
  cfg.generator.sigma = 1.0;
  cfg.generator.lambda = 5.0;
  cfg.generator.jump_lo = -1.0;
  cfg.generator.jump_hi = 1.0;
  cfg.generator.steps = 1 << 14;
  cfg.paths = 500;
  cfg.seed = 7;
  cfg.du = 0.00625;
  cfg.ladder = {0.4, 0.2, 0.1, 0.05};

  cfg.estimator = Estimator::QStatistic;
  auto q = run_convergence_experiment(cfg);
  cfg.estimator = Estimator::IntervalCrossing;
  auto a = run_convergence_experiment(cfg);
  // interleaved ladder on an independent seed stream
  auto cfg_b = cfg;
  cfg_b.seed = derive_seed(cfg.seed, 1, 1);
  cfg_b.ladder = {0.3, 0.15, 0.075, 0.05};
  auto b = run_convergence_experiment(cfg_b);

  const auto& fa = a.rows.back();
  const auto& fb = b.rows.back();
  double gap = std::abs(fa.mean - fb.mean), allowed = 2 * std::sqrt(fa.se * fa.se + fb.se * fb.se);

  // sandwich d' n^{z,d} <= c n^{z,c} <= d n^{z,d'} for d' < c <= d consecutive in ladder A,
  // with c from ladder B, on the first 50 paths at every level z
  std::size_t sandwich_bad = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    auto p = generate(path_spec(cfg, i));
    auto g = grid_for(p, cfg.du, 0.4);
    auto fa_ = interval_crossing_local_time(p, 1.0, cfg.ladder, g);
    auto fb_ = interval_crossing_local_time(p, 1.0, cfg_b.ladder, g);
    for (std::size_t k = 0; k + 1 < cfg.ladder.size(); ++k) {
      double d = cfg.ladder[k], dn = cfg.ladder[k + 1];
      for (std::size_t m = 0; m < cfg_b.ladder.size(); ++m) {
        double c = cfg_b.ladder[m];
        if (!(dn < c && c <= d)) continue;
        for (std::size_t z = 0; z < g.cells; ++z) {
          sandwich_bad += dn / d * fa_[k][z] > fb_[m][z] + 1e-12;
          sandwich_bad += fb_[m][z] > d / dn * fa_[k + 1][z] + 1e-12;
        }
      }
    }
  }

  bool ok = strictly_decreasing(q) && strictly_decreasing(a) && gap <= allowed && sandwich_bad == 0 &&
            q.violations + a.violations + b.violations == 0;
  return {ok, "int|Q| " + means(q) + "; L1(c n, L) A " + means(a) + ", B " + means(b) +
                  fmt("; |A-B| at 0.05 = %.4f (allowed %.4f)", gap, allowed) +
                  fmt("; sandwich violations %.0f", static_cast<double>(sandwich_bad))};
}

// 8. Finite-variation and pure-jump paths carry no local time.
Outcome c8() {
  std::vector<std::pair<std::string, SampledCadlagPath>> ramps, pure;
  {
    GeneratorSpec s;
    s.kind = GeneratorKind::BrownianDrift;
    s.sigma = 0.0;
    for (double mu : {1.0, -2.0, 0.3}) {
      s.mu = mu;
      s.steps = 2048;
      ramps.emplace_back("drift " + fmt("%.1f", mu), generate(s));
    }
    GeneratorSpec d;
    d.kind = GeneratorKind::DeterministicTest;
    d.mu = 1.0;
    d.sigma = 0.1;  // x0 + t + 0.1 sin(2 pi t), monotone
    d.steps = 4096;
    ramps.emplace_back("curved ramp", generate(d));
    GeneratorSpec c;
    c.kind = GeneratorKind::CompoundPoisson;
    c.lambda = 10.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      c.seed = seed;
      pure.emplace_back("compound poisson", generate(c));
    }
    d.mu = 0.0;
    d.sigma = 0.0;
    d.lambda = 4.0;
    d.jump_hi = 0.7;
    pure.emplace_back("alternating steps", generate(d));
  }
  const double du = 0.005;
  const std::vector<double> widths{0.4, 0.2, 0.1, 0.05};
  double worst = 0.0;  // estimate divided by its allowance
  auto check = [&](const SampledCadlagPath& p, bool is_ramp) {
    double h = max_abs_increment(p);
    auto g = grid_for(p, du, 0.5);
    auto full = PartitionScheme::full_grid(p).level(0);
    double n_jumps = static_cast<double>(p.jumps().size());
    for (double t : {0.5, 1.0}) {
      // occupation estimate
      for (double eps : {0.2, 0.05, 0.01}) {
        double occ = occupation_local_time(p, t, eps, g).sup();
        double allow = is_ramp ? 2 * h : 1e-15;
        worst = std::max(worst, occ / allow);
      }
      // 2Kc from the full-grid crossing time
      double l = split_kc_kd(k_pi(p, full, t, g), j_pi(p, t, g)).l.sup();
      worst = std::max(worst, l / (is_ramp ? 2 * h : 1e-12));
      // interval crossing c n
      auto f = interval_crossing_local_time(p, t, widths, g);
      for (std::size_t k = 0; k < widths.size(); ++k)
        worst = std::max(worst, f[k].sup() / (widths[k] * (is_ramp ? 1.0 : std::max(1.0, n_jumps))));
    }
  };
  for (const auto& [name, p] : ramps) check(p, true);
  for (const auto& [name, p] : pure) check(p, false);
  return {worst <= 1.0, fmt("max estimate / allowance = %.3g over %.0f paths", worst,
                            static_cast<double>(ramps.size() + pure.size()))};
}

}  // namespace

int main() {
  std::printf("workers: %u\n", worker_count());
  report(1, "discrete Tanaka-Meyer identity", 5, c1);
  report(2, "mass identities for J and 2Kc", 1, c2);
  report(3, "Skorokhod map invariants", 2, c3);
  report(4, "strict crossing counts and Banach indicatrix", 2, c4);
  report(5, "Brownian local time at 0", 90, c5);
  report(6, "K^pi trend along dyadic partitions", 120, c6);
  report(7, "Q statistic and interval-crossing trend", 180, c7);
  report(8, "degenerate finite-variation and pure-jump paths", 1, c8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures ? 1 : 0;
}
