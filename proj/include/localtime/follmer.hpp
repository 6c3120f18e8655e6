#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "dc_function.hpp"
#include "path.hpp"

namespace loctime {

// [x] along one partition level, reported at every sample instant.
struct QuadraticVariation {
  int level = 0;
  std::vector<double> times;
  std::vector<double> total;
  std::vector<double> continuous_part;
  std::vector<double> jump_part;
};

// total_t = sum_j (x_{t_{j+1} ^ t} - x_{t_j ^ t})^2, evaluated at each sample time.
inline QuadraticVariation quadratic_variation(const SampledCadlagPath& path, const Partition& p, int level = 0) {
  if (p.empty() || p.front() != 0 || p.back() != path.size() - 1)
    throw std::invalid_argument("quadratic_variation: partition must span the sample grid");
  QuadraticVariation qv;
  qv.level = level;
  qv.times = path.times();
  std::size_t n = path.size();
  qv.total.assign(n, 0.0);
  qv.jump_part.assign(n, 0.0);
  qv.continuous_part.assign(n, 0.0);
  double complete = 0.0;  // sum over intervals that ended at or before the current sample
  std::size_t j = 0;      // p[j] <= i < p[j+1]
  double jumps = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    while (j + 1 < p.size() && p[j + 1] <= i) {
      double d = path.value(p[j + 1]) - path.value(p[j]);
      complete += d * d;
      ++j;
    }
    double partial = path.value(i) - path.value(p[j]);
    qv.total[i] = complete + partial * partial;
    if (path.is_jump(i)) {
      double d = path.value(i) - path.value(i - 1);
      jumps += d * d;
    }
    qv.jump_part[i] = jumps;
    double c = qv.total[i] - jumps;
    qv.continuous_part[i] = i == 0 ? std::max(c, 0.0) : std::max(c, qv.continuous_part[i - 1]);
  }
  return qv;
}

// Left-point sum sum_j g_j (x_{t_{j+1} ^ t} - x_{t_j ^ t}); g is either a vector
// of per-sample integrand values or a callable applied to x_{t_j}.
template <class G>
double riemann_integral(const SampledCadlagPath& path, const G& g, const Partition& p, double t) {
  Partition q = clip_partition(path, p, t);
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) {
    double gj;
    if constexpr (std::is_invocable_r_v<double, const G&, double>)
      gj = g(path.value(q[j]));
    else
      gj = g.at(q[j]);
    s += gj * (path.value(q[j + 1]) - path.value(q[j]));
  }
  return s;
}

// J^f_t(x) = sum over marked jumps s <= t of f(x_s) - f(x_{s-}) - f'(x_{s-}) dx_s.
inline double jump_compensator(const SampledCadlagPath& path, const DCFunction& f, double t) {
  std::size_t last = path.index_at(t);
  double s = 0.0;
  for (const auto& m : path.jumps()) {
    if (m.index > last) break;
    s += jf_increment(f, m.pre_value, path.value(m.index));
  }
  return s;
}

// f(x_t) - f(x_0) - int f'(x_-) dx - 1/2 int f''(x) d[x]^c - J^f_t. The d[x]^c term
// runs over unmarked sample increments with f'' taken at the left sample.
inline double follmer_residual(const SampledCadlagPath& path, const DCFunction& f, const Partition& p, double t) {
  if (!f.atomless()) throw std::invalid_argument("follmer_residual: f'' must be absolutely continuous");
  std::size_t last = path.index_at(t);
  double lhs = f(path.value(last)) - f(path.value(0));
  double integral = riemann_integral(path, [&](double x) { return f.derivative(x); }, p, t);
  double ito = 0.0;
  for (std::size_t i = 1; i <= last; ++i) {
    if (path.is_jump(i)) continue;
    double d = path.value(i) - path.value(i - 1);
    ito += f.f2.density_at(path.value(i - 1)) * d * d;
  }
  return lhs - integral - 0.5 * ito - jump_compensator(path, f, t);
}

}  // namespace loctime
