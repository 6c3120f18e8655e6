#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dc_function.hpp"
#include "follmer.hpp"
#include "grid.hpp"
#include "path.hpp"

namespace loctime {

namespace detail {

// Adds |b - u| on [[a, b[[ to a cell-average accumulator.
inline void add_bracket(CellAverageAccumulator& acc, double a, double b) {
  if (a < b)
    acc.add(a, b, b, -1.0);
  else if (b < a)
    acc.add(b, a, -b, 1.0);
}

inline double bracket_at(double a, double b, double u) {
  double lo = std::min(a, b), hi = std::max(a, b);
  return (u >= lo && u < hi) ? std::abs(b - u) : 0.0;
}

}  // namespace detail

// K^pi_t(u) = sum_j |x_{t_{j+1} ^ t} - u| 1_{[[x_{t_j ^ t}, x_{t_{j+1} ^ t}[[}(u), as cell averages.
inline LevelFunction k_pi(const SampledCadlagPath& path, const Partition& p, double t, const LevelGrid& grid) {
  Partition q = clip_partition(path, p, t);
  CellAverageAccumulator acc(grid);
  for (std::size_t j = 0; j + 1 < q.size(); ++j) detail::add_bracket(acc, path.value(q[j]), path.value(q[j + 1]));
  return acc.finish();
}

inline double k_pi_at(const SampledCadlagPath& path, const Partition& p, double t, double u) {
  Partition q = clip_partition(path, p, t);
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) s += detail::bracket_at(path.value(q[j]), path.value(q[j + 1]), u);
  return s;
}

// J_t(u) = sum over marked jumps s <= t of |x_s - u| 1_{[[x_{s-}, x_s[[}(u), as cell averages.
inline LevelFunction j_pi(const SampledCadlagPath& path, double t, const LevelGrid& grid) {
  std::size_t last = path.index_at(t);
  CellAverageAccumulator acc(grid);
  for (const auto& m : path.jumps()) {
    if (m.index > last) break;
    detail::add_bracket(acc, m.pre_value, path.value(m.index));
  }
  return acc.finish();
}

inline double j_at(const SampledCadlagPath& path, double t, double u) {
  std::size_t last = path.index_at(t);
  double s = 0.0;
  for (const auto& m : path.jumps()) {
    if (m.index > last) break;
    s += detail::bracket_at(m.pre_value, path.value(m.index), u);
  }
  return s;
}

inline LocalTimeField k_pi_field(const SampledCadlagPath& path, const Partition& p, const std::vector<double>& times,
                                 const LevelGrid& grid) {
  LocalTimeField field;
  field.grid = grid;
  field.kind = FieldKind::K;
  for (double t : times) field.push(t, k_pi(path, p, t, grid));
  return field;
}

inline LocalTimeField j_field(const SampledCadlagPath& path, const std::vector<double>& times, const LevelGrid& grid) {
  LocalTimeField field;
  field.grid = grid;
  field.kind = FieldKind::J;
  for (double t : times) field.push(t, j_pi(path, t, grid));
  return field;
}

// Left side minus right side of the discrete Tanaka-Meyer formula
//   f(x_t) - f(x_0) - sum_j f'(x_{t_j})(x_{t_{j+1} ^ t} - x_{t_j ^ t}) = int K^pi_t(u) f''(du),
// with the right side integrated interval by interval (atoms by exact membership).
inline double discrete_tanaka_residual(const SampledCadlagPath& path, const DCFunction& f, const Partition& p,
                                       double t) {
  Partition q = clip_partition(path, p, t);
  double lhs = f(path.value(q.back())) - f(path.value(0));
  double rhs = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) {
    double a = path.value(q[j]), b = path.value(q[j + 1]);
    lhs -= f.derivative(a) * (b - a);
    rhs += jf_measure_side(f, a, b);
  }
  return lhs - rhs;
}

// Same identity with the right side read from the binned K field.
inline double discrete_tanaka_residual_binned(const SampledCadlagPath& path, const DCFunction& f, const Partition& p,
                                              double t, const LevelGrid& grid,
                                              AtomPolicy policy = AtomPolicy::Error) {
  double lhs = f(path.value(path.index_at(t))) - f(path.value(0)) -
               riemann_integral(path, [&](double x) { return f.derivative(x); }, p, t);
  return lhs - integrate_against_f2(k_pi(path, p, t, grid), f, policy);
}

struct KcSplit {
  LevelFunction kc;
  LevelFunction l;  // 2 Kc
};

// Kc = (K - J)^+ levelwise; 2 Kc estimates the occupation local time.
inline KcSplit split_kc_kd(const LevelFunction& k, const LevelFunction& j) {
  require_same_grid(k, j, "split_kc_kd");
  KcSplit out{LevelFunction(k.grid), LevelFunction(k.grid)};
  for (std::size_t i = 0; i < k.size(); ++i) {
    out.kc[i] = std::max(k[i] - j[i], 0.0);
    out.l[i] = 2.0 * out.kc[i];
  }
  return out;
}

inline std::pair<LocalTimeField, LocalTimeField> split_kc_kd(const LocalTimeField& k, const LocalTimeField& j) {
  if (k.times != j.times) throw std::invalid_argument("split_kc_kd: time axes differ");
  LocalTimeField kc, l;
  kc.kind = FieldKind::Kc;
  l.kind = FieldKind::L_interval;
  kc.grid = l.grid = k.grid;
  for (std::size_t n = 0; n < k.times.size(); ++n) {
    auto s = split_kc_kd(k.slices[n], j.slices[n]);
    kc.push(k.times[n], std::move(s.kc));
    l.push(k.times[n], std::move(s.l));
  }
  return {std::move(kc), std::move(l)};
}

// (1/2eps) sum over unmarked increments with |x_{i-1} - u| <= eps of (increment)^2,
// evaluated at cell centers.
inline LevelFunction occupation_local_time(const SampledCadlagPath& path, double t, double eps,
                                           const LevelGrid& grid) {
  if (!(eps > 0.0)) throw std::domain_error("occupation_local_time: bandwidth must be positive");
  if (eps < grid.du) throw std::domain_error("occupation_local_time: bandwidth below the grid spacing");
  std::size_t last = path.index_at(t);
  CenterRangeAccumulator acc(grid);
  double scale = 1.0 / (2.0 * eps);
  for (std::size_t i = 1; i <= last; ++i) {
    if (path.is_jump(i)) continue;
    double x = path.value(i - 1), d = path.value(i) - x;
    if (d == 0.0) continue;
    acc.add(scale * d * d, [x, eps](double c) { return c < x && !(x - c <= eps); },
            [x, eps](double c) { return std::abs(x - c) <= eps; });
  }
  return acc.finish();
}

inline double occupation_local_time_at(const SampledCadlagPath& path, double t, double eps, double u) {
  std::size_t last = path.index_at(t);
  double s = 0.0;
  for (std::size_t i = 1; i <= last; ++i) {
    if (path.is_jump(i)) continue;
    double x = path.value(i - 1), d = path.value(i) - x;
    if (std::abs(x - u) <= eps) s += d * d;
  }
  return s / (2.0 * eps);
}

// Minkowski bound sum_j |increment|^{1+1/p} (p+1)^{-1/p} for ||K^pi_t||_{L^p}.
inline double k_pi_lp_bound(const SampledCadlagPath& path, const Partition& p, double t, double pw) {
  Partition q = clip_partition(path, p, t);
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j)
    s += std::pow(std::abs(path.value(q[j + 1]) - path.value(q[j])), 1.0 + 1.0 / pw);
  return s * std::pow(pw + 1.0, -1.0 / pw);
}

}  // namespace loctime
