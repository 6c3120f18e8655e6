#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dc_function.hpp"
#include "grid.hpp"
#include "level_crossing.hpp"
#include "path.hpp"
#include "quadrature.hpp"
#include "skorokhod.hpp"

namespace loctime {

// ---------------------------------------------------------------------------
// Generators

enum class GeneratorKind { Brownian, BrownianDrift, CompoundPoisson, JumpDiffusion, DeterministicTest };

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Brownian: return "brownian";
    case GeneratorKind::BrownianDrift: return "brownian_drift";
    case GeneratorKind::CompoundPoisson: return "compound_poisson";
    case GeneratorKind::JumpDiffusion: return "jump_diffusion";
    case GeneratorKind::DeterministicTest: return "deterministic_test";
  }
  return "brownian";
}

inline GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "brownian") return GeneratorKind::Brownian;
  if (s == "brownian_drift") return GeneratorKind::BrownianDrift;
  if (s == "compound_poisson") return GeneratorKind::CompoundPoisson;
  if (s == "jump_diffusion") return GeneratorKind::JumpDiffusion;
  if (s == "deterministic_test") return GeneratorKind::DeterministicTest;
  throw std::invalid_argument("unknown generator kind '" + s + "'");
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Brownian;
  double sigma = 1.0;
  double mu = 0.0;
  double lambda = 0.0;
  double jump_lo = -1.0;
  double jump_hi = 1.0;
  double horizon = 1.0;
  double x0 = 0.0;
  long steps = 1024;  // per unit time
  std::uint64_t seed = 1;

  long total_steps() const { return std::max(1L, std::lround(static_cast<double>(steps) * horizon)); }

  void validate() const {
    if (steps < 2) throw std::invalid_argument("generator: steps must be at least 2");
    if (!(sigma >= 0.0)) throw std::invalid_argument("generator: sigma must be non-negative");
    if (!(lambda >= 0.0)) throw std::invalid_argument("generator: lambda must be non-negative");
    if (!(horizon > 0.0)) throw std::invalid_argument("generator: horizon must be positive");
    if (jump_hi < jump_lo) throw std::invalid_argument("generator: jump_hi below jump_lo");
    if (!std::isfinite(mu) || !std::isfinite(x0)) throw std::invalid_argument("generator: non-finite parameter");
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of stream `stream` for item `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// Euler skeleton on a uniform grid. Jumps arrive as a Poisson count with uniform
// times snapped to the next grid point; a step that carries a jump takes no
// continuous increment, so the marks split the path exactly.
inline SampledCadlagPath generate(const GeneratorSpec& spec) {
  spec.validate();
  const long n = spec.total_steps();
  const double dt = spec.horizon / static_cast<double>(n);
  std::vector<double> times(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) times[static_cast<std::size_t>(i)] = spec.horizon * static_cast<double>(i) / n;

  bool diffusive = spec.kind != GeneratorKind::DeterministicTest;
  bool jumps = spec.lambda > 0.0 &&
               (spec.kind == GeneratorKind::CompoundPoisson || spec.kind == GeneratorKind::JumpDiffusion);
  double sigma = (spec.kind == GeneratorKind::CompoundPoisson) ? 0.0 : spec.sigma;
  double mu = (spec.kind == GeneratorKind::Brownian) ? 0.0 : spec.mu;

  std::vector<double> jump_at(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<char> has_jump(static_cast<std::size_t>(n) + 1, 0);
  if (jumps) {
    std::mt19937_64 rng(derive_seed(spec.seed, 0, 1));
    std::poisson_distribution<long> count(spec.lambda * spec.horizon);
    std::uniform_real_distribution<double> when(0.0, 1.0), size(spec.jump_lo, spec.jump_hi);
    long k = count(rng);
    for (long j = 0; j < k; ++j) {
      double u = when(rng);
      auto idx = static_cast<std::size_t>(std::clamp(static_cast<long>(std::ceil(u * n)), 1L, n));
      jump_at[idx] += size(rng);
      has_jump[idx] = 1;
    }
  }

  std::vector<double> values(times.size());
  std::vector<JumpMark> marks;
  values[0] = spec.x0;
  if (diffusive) {
    std::mt19937_64 rng(derive_seed(spec.seed, 0, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    double sd = sigma * std::sqrt(dt);
    for (std::size_t i = 1; i < values.size(); ++i) {
      double z = normal(rng);
      if (has_jump[i]) {
        values[i] = values[i - 1] + jump_at[i];
        marks.push_back({i, values[i - 1]});
      } else {
        values[i] = values[i - 1] + mu * dt + sd * z;
      }
    }
  } else {
    // x_t = x0 + mu t + sigma sin(2 pi t), plus alternating jumps of size jump_hi every 1/lambda
    const double two_pi = 6.283185307179586;
    double next_jump = spec.lambda > 0.0 ? 1.0 / spec.lambda : spec.horizon * 2.0;
    double shift = 0.0, sgn = 1.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
      double t = times[i];
      double smooth = spec.x0 + mu * t + spec.sigma * std::sin(two_pi * t);
      if (t >= next_jump) {
        shift += sgn * spec.jump_hi;
        sgn = -sgn;
        next_jump += 1.0 / spec.lambda;
        values[i] = spec.x0 + mu * times[i - 1] + spec.sigma * std::sin(two_pi * times[i - 1]) + shift;
        marks.push_back({i, values[i - 1]});
      } else {
        values[i] = smooth + shift;
      }
    }
  }
  return SampledCadlagPath(std::move(times), std::move(values), std::move(marks));
}

// ---------------------------------------------------------------------------
// Classical local time

// Tanaka estimate at one level with the full sample grid:
//   |x_t - u| - |x_0 - u| - sum sign(x_{i-1} - u) dx_i - 2 J_t(u).
inline double classical_local_time_at(const SampledCadlagPath& path, double t, double u) {
  std::size_t last = path.index_at(t);
  double s = std::abs(path.value(last) - u) - std::abs(path.value(0) - u);
  for (std::size_t i = 1; i <= last; ++i) s -= lsign(path.value(i - 1) - u) * (path.value(i) - path.value(i - 1));
  return s - 2.0 * j_at(path, t, u);
}

struct ClassicalLocalTime {
  LevelFunction field;      // cell averages, floored at 0
  double floored_mass = 0;  // integral of the negative part removed by the floor
};

// Cell averages of the same estimate. The signed sum is rewritten as
// (x_t - x_0) - 2 G(u) with G(u) = sum_{x_{i-1} <= u} dx_i, a step function in u.
inline ClassicalLocalTime classical_local_time(const SampledCadlagPath& path, double t, const LevelGrid& grid) {
  std::size_t last = path.index_at(t);
  CellAverageAccumulator acc(grid);
  double xt = path.value(last), x0 = path.value(0);
  const double far = grid.u_max() + grid.du;
  const double near = grid.u_min - grid.du;
  // |x_t - u|
  acc.add(near, xt, xt, -1.0);
  acc.add(xt, far, -xt, 1.0);
  // -|x_0 - u|
  acc.add(near, x0, -x0, 1.0);
  acc.add(x0, far, x0, -1.0);
  acc.add(near, far, -(xt - x0), 0.0);
  for (std::size_t i = 1; i <= last; ++i) {
    double d = path.value(i) - path.value(i - 1);
    if (d != 0.0) acc.add(path.value(i - 1), far, 2.0 * d, 0.0);
  }
  ClassicalLocalTime out{acc.finish(), 0.0};
  auto j = j_pi(path, t, grid);
  for (std::size_t k = 0; k < grid.cells; ++k) {
    double v = out.field[k] - 2.0 * j[k];
    if (v < 0.0) {
      out.floored_mass -= v * grid.du;
      v = 0.0;
    }
    out.field[k] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distances and the Q statistic

// (sum |a-b|^p w du)^{1/p}; with a weight f, w is |f''| density at the centers and
// each atom adds |weight| |a-b|^p from the cell that contains it.
inline double lp_distance(const LevelFunction& a, const LevelFunction& b, double p, const DCFunction* weight = nullptr) {
  require_same_grid(a, b, "lp_distance");
  if (!(p >= 1.0)) throw std::invalid_argument("lp_distance: p must be at least 1");
  const auto& g = a.grid;
  double s = 0.0;
  if (!weight) {
    for (std::size_t k = 0; k < g.cells; ++k) s += std::pow(std::abs(a[k] - b[k]), p);
    return std::pow(s * g.du, 1.0 / p);
  }
  if (weight->f2.has_density())
    for (std::size_t k = 0; k < g.cells; ++k)
      s += std::pow(std::abs(a[k] - b[k]), p) * std::abs(weight->f2.density_at(g.center(k))) * g.du;
  for (const auto& at : weight->f2.atoms) {
    if (!g.contains(at.location)) continue;
    std::size_t k = g.cell_of(at.location);
    s += std::abs(at.weight) * std::pow(std::abs(a[k] - b[k]), p);
  }
  return std::pow(s, 1.0 / p);
}

// Q^{z,d}_t = d n^{z,d} - (1/d) int_{z-d/2}^{z+d/2} L_t(u) du at each center z.
inline LevelFunction q_field(const SampledCadlagPath& path, double t, double d, const LevelFunction& classical) {
  const auto& g = classical.grid;
  if (!(d > 0.0)) throw std::domain_error("q_statistic: d must be positive");
  if (d < 2.0 * g.du) throw std::domain_error("q_statistic: d below twice the grid spacing");
  auto n = crossing_count_field(path, d, t, g).total;
  LevelFunction q(g);
  for (std::size_t k = 0; k < g.cells; ++k) {
    double z = g.center(k);
    q[k] = d * n[k] - classical.integrate_over(z - 0.5 * d, z + 0.5 * d) / d;
  }
  return q;
}

// int |Q^{z,d}_t| dz over the grid window.
inline double q_statistic(const SampledCadlagPath& path, double t, double d, const LevelFunction& classical) {
  auto q = q_field(path, t, d, classical);
  double s = 0.0;
  for (double v : q.values) s += std::abs(v);
  return s * q.grid.du;
}

inline double q_statistic(const SampledCadlagPath& path, double t, double d, const LevelGrid& grid) {
  return q_statistic(path, t, d, classical_local_time(path, t, grid).field);
}

// ---------------------------------------------------------------------------
// Parallel runner

inline unsigned worker_count(unsigned requested = 0) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOCALTIME_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots; callers reduce in index order afterwards.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Convergence experiments

enum class Estimator { KPi, Occupation, IntervalCrossing, QStatistic };
enum class Distance { L1LevelGrid, LpF2Measure };

inline Estimator estimator_from_string(const std::string& s) {
  if (s == "K_pi") return Estimator::KPi;
  if (s == "occupation") return Estimator::Occupation;
  if (s == "interval_crossing") return Estimator::IntervalCrossing;
  if (s == "q_statistic") return Estimator::QStatistic;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}
inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::KPi: return "K_pi";
    case Estimator::Occupation: return "occupation";
    case Estimator::IntervalCrossing: return "interval_crossing";
    case Estimator::QStatistic: return "q_statistic";
  }
  return "K_pi";
}
inline Distance distance_from_string(const std::string& s) {
  if (s == "L1_levelgrid") return Distance::L1LevelGrid;
  if (s == "Lp_f2measure") return Distance::LpF2Measure;
  throw std::invalid_argument("unknown distance '" + s + "'");
}
inline const char* to_string(Distance d) { return d == Distance::L1LevelGrid ? "L1_levelgrid" : "Lp_f2measure"; }

struct ExperimentConfig {
  GeneratorSpec generator;
  Estimator estimator = Estimator::KPi;
  Distance distance = Distance::L1LevelGrid;
  double p = 1.0;
  DCFunction weight;  // used by Lp_f2measure
  // dyadic levels for K_pi, bandwidths for occupation, widths for the crossing estimators
  std::vector<double> ladder;
  std::size_t paths = 100;
  std::uint64_t seed = 1;
  double du = 1.0 / 32.0;
  double t = -1.0;  // evaluation time; negative means the horizon
  unsigned threads = 0;

  void validate() const {
    generator.validate();
    if (ladder.empty()) throw std::invalid_argument("experiment: empty ladder");
    if (paths < 2) throw std::invalid_argument("experiment: need at least two paths");
    if (!(du > 0.0)) throw std::invalid_argument("experiment: du must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("experiment: p must be at least 1");
    if (distance == Distance::LpF2Measure && !weight.f) throw std::invalid_argument("experiment: Lp_f2measure needs a weight");
    for (double v : ladder) {
      if (estimator == Estimator::KPi) {
        if (v < 0 || v > 62 || v != std::floor(v)) throw std::invalid_argument("experiment: K_pi ladder needs dyadic levels");
      } else if (!(v > 0.0)) {
        throw std::invalid_argument("experiment: ladder values must be positive");
      }
    }
    if (t > generator.horizon) throw std::invalid_argument("experiment: t beyond the horizon");
  }
};

struct ReportRow {
  double level = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double se = 0.0;
  double wall_ms = 0.0;
};

struct ExperimentReport {
  std::string estimator;
  std::string distance;
  std::vector<ReportRow> rows;
  std::vector<std::vector<double>> values;  // [level][path]
  std::size_t violations = 0;
  double floored_mass = 0.0;  // summed over paths
};

inline ReportRow summarize(double level, const std::vector<double>& v) {
  ReportRow r;
  r.level = level;
  r.samples = v.size();
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  r.mean = m;
  r.se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  return r;
}

// Per-path measurements of the configured estimator at every ladder level.
struct PathMeasurements {
  std::vector<double> values;
  std::vector<double> wall_ms;
  std::size_t violations = 0;
  double floored_mass = 0.0;
};

inline PathMeasurements measure_path(const ExperimentConfig& cfg, const SampledCadlagPath& path) {
  double t = cfg.t > 0.0 ? cfg.t : path.horizon();
  double top = *std::max_element(cfg.ladder.begin(), cfg.ladder.end());
  double margin = cfg.estimator == Estimator::KPi ? cfg.du : top + 2.0 * cfg.du;
  auto grid = LevelGrid::covering(path.min_value(), path.max_value(), cfg.du, margin);
  PathMeasurements out;
  auto classical = classical_local_time(path, t, grid);
  out.floored_mass = classical.floored_mass;
  double qv = 0.0;
  for (std::size_t i = 1; i <= path.index_at(t); ++i) {
    double d = path.value(i) - path.value(i - 1);
    qv += d * d;
  }
  if (classical.floored_mass > 1e-9 * (1.0 + qv)) ++out.violations;
  LevelFunction reference = classical.field;
  if (cfg.estimator == Estimator::KPi) {
    auto j = j_pi(path, t, grid);
    for (std::size_t k = 0; k < grid.cells; ++k) reference[k] = 0.5 * reference[k] + j[k];
  }
  auto dist = [&](const LevelFunction& a) {
    return lp_distance(a, reference, cfg.p, cfg.distance == Distance::LpF2Measure ? &cfg.weight : nullptr);
  };
  for (double level : cfg.ladder) {
    auto start = std::chrono::steady_clock::now();
    double v = 0.0;
    LevelFunction est;
    switch (cfg.estimator) {
      case Estimator::KPi: {
        auto scheme = PartitionScheme::dyadic(path, {static_cast<int>(level)});
        est = k_pi(path, scheme.level(0), t, grid);
        v = dist(est);
        break;
      }
      case Estimator::Occupation:
        est = occupation_local_time(path, t, level, grid);
        v = dist(est);
        break;
      case Estimator::IntervalCrossing:
        est = interval_crossing_local_time(path, t, {level}, grid).front();
        v = dist(est);
        break;
      case Estimator::QStatistic:
        v = q_statistic(path, t, level, classical.field);
        break;
    }
    double floor = -1e-12 * (1.0 + est.sup());  // cell averages may round a zero to -1e-17
    for (double e : est.values)
      if (e < floor || !std::isfinite(e)) {
        ++out.violations;
        break;
      }
    if (!std::isfinite(v) || v < 0.0) ++out.violations;
    out.values.push_back(v);
    out.wall_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return out;
}

inline GeneratorSpec path_spec(const ExperimentConfig& cfg, std::size_t index) {
  GeneratorSpec g = cfg.generator;
  g.seed = derive_seed(cfg.seed, index, 7);
  return g;
}

inline ExperimentReport run_convergence_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<PathMeasurements> slots(cfg.paths);
  parallel_for(cfg.paths, worker_count(cfg.threads),
               [&](std::size_t i) { slots[i] = measure_path(cfg, generate(path_spec(cfg, i))); });
  ExperimentReport rep;
  rep.estimator = to_string(cfg.estimator);
  rep.distance = cfg.estimator == Estimator::QStatistic ? "abs_integral" : to_string(cfg.distance);
  rep.values.assign(cfg.ladder.size(), std::vector<double>(cfg.paths));
  std::vector<double> wall(cfg.ladder.size(), 0.0);
  for (std::size_t i = 0; i < cfg.paths; ++i) {
    for (std::size_t l = 0; l < cfg.ladder.size(); ++l) {
      rep.values[l][i] = slots[i].values[l];
      wall[l] += slots[i].wall_ms[l];
    }
    rep.violations += slots[i].violations;
    rep.floored_mass += slots[i].floored_mass;
  }
  for (std::size_t l = 0; l < cfg.ladder.size(); ++l) {
    auto row = summarize(cfg.ladder[l], rep.values[l]);
    row.wall_ms = wall[l];
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace loctime
