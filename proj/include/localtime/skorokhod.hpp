#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dc_function.hpp"
#include "grid.hpp"
#include "path.hpp"

namespace loctime {

struct MonotoneSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  int direction = 0;  // +1, -1, or 0 for a flat path
};

// x = x^eps + phi with |phi| <= eps/2 and x^eps moving only while phi sits on a barrier.
struct SkorokhodSolution {
  double eps = 0.0;
  SampledCadlagPath regularized;
  std::vector<double> phi;
  std::vector<MonotoneSegment> segments;
};

// Sign runs of the increments; flat increments join the current run.
inline std::vector<MonotoneSegment> monotone_segments(const std::vector<double>& y) {
  std::vector<MonotoneSegment> segs;
  MonotoneSegment cur{0, 0, 0};
  for (std::size_t i = 1; i < y.size(); ++i) {
    double d = y[i] - y[i - 1];
    int dir = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (dir != 0 && cur.direction != 0 && dir != cur.direction) {
      segs.push_back(cur);
      cur = {i - 1, i - 1, dir};
    } else if (dir != 0) {
      cur.direction = dir;
    }
    cur.end = i;
  }
  segs.push_back(cur);
  return segs;
}

// Play operator: x^eps_i = clamp(x^eps_{i-1}, x_i - eps/2, x_i + eps/2), x^eps_0 = x_0.
inline SkorokhodSolution skorokhod_map(const SampledCadlagPath& path, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("skorokhod_map: eps must be positive");
  const auto& x = path.values();
  std::vector<double> y(x.size());
  double h = 0.5 * eps;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    double v = std::clamp(y[i - 1], x[i] - h, x[i] + h);
    // x - h may round so that |x - v| exceeds h by an ulp; step back inside the band
    for (int k = 0; k < 4 && std::abs(x[i] - v) > h; ++k) v = std::nextafter(v, x[i]);
    y[i] = v;
  }
  std::vector<JumpMark> marks;
  for (const auto& m : path.jumps()) marks.push_back({m.index, y[m.index - 1]});
  SkorokhodSolution sol;
  sol.eps = eps;
  sol.phi.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sol.phi[i] = x[i] - y[i];
  sol.segments = monotone_segments(y);
  sol.regularized = SampledCadlagPath(path.times(), std::move(y), std::move(marks));
  return sol;
}

struct CrossingTally {
  double z = 0.0;
  double eps = 0.0;
  bool strict = false;
  long up = 0;
  long down = 0;
  long total() const { return up + down; }
};

// Greedy scan realizing the supremum over alternating subsequences on [0, t].
// Non-strict: up arms at x <= z - eps/2 and fires at x >= z + eps/2, down the mirror.
// Strict: arming uses < and > instead.
inline CrossingTally count_crossings(const SampledCadlagPath& path, double z, double eps, double t, bool strict) {
  if (eps < 0.0) throw std::domain_error("count_crossings: eps must be non-negative");
  if (eps == 0.0 && !strict)
    throw std::domain_error("count_crossings: eps = 0 needs the strict count on a piecewise monotone path");
  double h = 0.5 * eps, lo = z - h, hi = z + h;
  std::size_t last = path.index_at(t);
  CrossingTally c{z, eps, strict, 0, 0};
  bool up_armed = false, down_armed = false;
  for (std::size_t i = 0; i <= last; ++i) {
    double x = path.value(i);
    if (up_armed && x >= hi) {
      ++c.up;
      up_armed = false;
    } else if (!up_armed && (strict ? x < lo : x <= lo)) {
      up_armed = true;
    }
    if (down_armed && x <= lo) {
      ++c.down;
      down_armed = false;
    } else if (!down_armed && (strict ? x > hi : x >= hi)) {
      down_armed = true;
    }
  }
  return c;
}

// Legs of the eps-zigzag: alternating extremes whose consecutive moves are at
// least eps, with every retracement inside a leg strictly below eps. A leg
// covers z iff min <= z - eps/2 and max >= z + eps/2, and the number of covering
// legs equals the crossing count at z.
struct ZigzagLeg {
  double min = 0.0;
  double max = 0.0;
  int direction = 0;
};

inline std::vector<ZigzagLeg> zigzag_legs(const SampledCadlagPath& path, double eps, double t) {
  std::size_t last = path.index_at(t);
  std::vector<ZigzagLeg> legs;
  double x0 = path.value(0);
  double mx = x0, mn = x0;
  int dir = 0;
  double start = x0, ext = x0;
  for (std::size_t i = 1; i <= last; ++i) {
    double x = path.value(i);
    if (dir == 0) {
      mx = std::max(mx, x);
      mn = std::min(mn, x);
      if (x == mx && x - mn >= eps) {
        dir = 1;
        start = mn;
        ext = x;
      } else if (x == mn && mx - x >= eps) {
        dir = -1;
        start = mx;
        ext = x;
      }
      continue;
    }
    if (dir == 1) {
      if (x >= ext) {
        ext = x;
      } else if (ext - x >= eps) {
        legs.push_back({start, ext, 1});
        dir = -1;
        start = ext;
        ext = x;
      }
    } else {
      if (x <= ext) {
        ext = x;
      } else if (x - ext >= eps) {
        legs.push_back({ext, start, -1});
        dir = 1;
        start = ext;
        ext = x;
      }
    }
  }
  if (dir == 1) legs.push_back({start, ext, 1});
  if (dir == -1) legs.push_back({ext, start, -1});
  return legs;
}

struct CrossingCountField {
  LevelFunction up;
  LevelFunction down;
  LevelFunction total;
};

// Non-strict counts n^{z,eps} at every cell center in one pass over the legs.
inline CrossingCountField crossing_count_field(const SampledCadlagPath& path, double eps, double t,
                                               const LevelGrid& grid) {
  if (!(eps > 0.0)) throw std::domain_error("crossing_count_field: eps must be positive");
  double h = 0.5 * eps;
  CenterRangeAccumulator up(grid), down(grid);
  for (const auto& leg : zigzag_legs(path, eps, t)) {
    auto below = [&](double c) { return !(leg.min <= c - h); };
    auto inside = [&](double c) { return leg.min <= c - h && leg.max >= c + h; };
    (leg.direction > 0 ? up : down).add(1.0, below, inside);
  }
  CrossingCountField f{up.finish(), down.finish(), LevelFunction(grid)};
  for (std::size_t k = 0; k < grid.cells; ++k) f.total[k] = f.up[k] + f.down[k];
  return f;
}

// c * n^{z,c}(x, [0,t]) at cell centers for each width.
inline std::vector<LevelFunction> interval_crossing_local_time(const SampledCadlagPath& path, double t,
                                                               const std::vector<double>& widths,
                                                               const LevelGrid& grid) {
  std::vector<LevelFunction> out;
  for (double c : widths) {
    auto f = crossing_count_field(path, c, t, grid).total;
    for (auto& v : f.values) v *= c;
    out.push_back(std::move(f));
  }
  return out;
}

// N^z(x^eps, [0,t]): segments of the piecewise monotone path whose range [lo, hi) holds z.
inline long banach_indicatrix(const SkorokhodSolution& sol, double z, double t) {
  const auto& y = sol.regularized;
  std::size_t last = y.index_at(t);
  long n = 0;
  for (const auto& s : sol.segments) {
    if (s.start >= last) break;
    std::size_t e = std::min(s.end, last);
    double lo = std::min(y.value(s.start), y.value(e)), hi = std::max(y.value(s.start), y.value(e));
    if (z >= lo && z < hi) ++n;
  }
  return n;
}

// Cell averages of N^z; integrates exactly to TV(x^eps) on the grid window.
inline LevelFunction banach_indicatrix_field(const SkorokhodSolution& sol, double t, const LevelGrid& grid) {
  const auto& y = sol.regularized;
  std::size_t last = y.index_at(t);
  CellAverageAccumulator acc(grid);
  for (const auto& s : sol.segments) {
    if (s.start >= last) break;
    std::size_t e = std::min(s.end, last);
    double lo = std::min(y.value(s.start), y.value(e)), hi = std::max(y.value(s.start), y.value(e));
    acc.add(lo, hi, 1.0, 0.0);
  }
  return acc.finish();
}

// int_0^t f'(x^eps_{s-}) dx_s for the step path: f'(x^eps_t) x_t - f'(x^eps_0) x_0 -
// sum x_{i-1} df'_i - sum dx_i df'_i over every sample increment.
inline double stieltjes_integral_fprime(const SampledCadlagPath& path, const SkorokhodSolution& sol,
                                        const DCFunction& f, double t) {
  const auto& y = sol.regularized;
  std::size_t last = path.index_at(t);
  double s = f.derivative(y.value(last)) * path.value(last) - f.derivative(y.value(0)) * path.value(0);
  double prev = f.derivative(y.value(0));
  for (std::size_t i = 1; i <= last; ++i) {
    double cur = f.derivative(y.value(i));
    double dfp = cur - prev;
    if (dfp != 0.0) s -= path.value(i - 1) * dfp + (path.value(i) - path.value(i - 1)) * dfp;
    prev = cur;
  }
  return s;
}

// Exact finite-eps identity for the step path:
//   f(x^eps_t) - f(x^eps_0) = int f'(x^eps_-) dx + (eps/2) int N^z f''(dz) + J^f(x^eps)
//                             - f'(x^eps_t) phi_t + f'(x^eps_0) phi_0,
// with J^f(x^eps) over every increment of x^eps, measure side. Returns left minus right.
inline double skorokhod_tanaka_residual(const SampledCadlagPath& path, const SkorokhodSolution& sol,
                                        const DCFunction& f, double t) {
  const auto& y = sol.regularized;
  std::size_t last = path.index_at(t);
  double lhs = f(y.value(last)) - f(y.value(0));
  double n_part = 0.0;
  for (const auto& s : sol.segments) {
    if (s.start >= last) break;
    std::size_t e = std::min(s.end, last);
    double lo = std::min(y.value(s.start), y.value(e)), hi = std::max(y.value(s.start), y.value(e));
    n_part += f.f2.mass(lo, hi);
  }
  double jf = 0.0;
  for (std::size_t i = 1; i <= last; ++i) jf += jf_measure_side(f, y.value(i - 1), y.value(i));
  double rhs = stieltjes_integral_fprime(path, sol, f, t) + 0.5 * sol.eps * n_part + jf -
               f.derivative(y.value(last)) * sol.phi[last] + f.derivative(y.value(0)) * sol.phi[0];
  return lhs - rhs;
}

// J_t(x^eps, u) from the jumps of x^eps at the marked jump instants of x.
inline LevelFunction j_of_regularized(const SkorokhodSolution& sol, double t, const LevelGrid& grid) {
  const auto& y = sol.regularized;
  std::size_t last = y.index_at(t);
  CellAverageAccumulator acc(grid);
  for (const auto& m : y.jumps()) {
    if (m.index > last) break;
    double a = m.pre_value, b = y.value(m.index);
    if (a < b)
      acc.add(a, b, b, -1.0);
    else if (b < a)
      acc.add(b, a, -b, 1.0);
  }
  return acc.finish();
}

// Levels where the strict counts may legitimately differ by more than 2: the
// shifted sample values x_i +- eps/2 and the values of x^eps.
inline bool exceptional_level(const SampledCadlagPath& path, const SkorokhodSolution& sol, double z,
                              double tol = 1e-12) {
  double h = 0.5 * sol.eps;
  for (std::size_t i = 0; i < path.size(); ++i) {
    double x = path.value(i);
    if (std::abs(z - (x - h)) <= tol || std::abs(z - (x + h)) <= tol) return true;
    if (std::abs(z - sol.regularized.value(i)) <= tol) return true;
  }
  return false;
}

}  // namespace loctime
