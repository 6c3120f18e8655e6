#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace loctime {

// Uniform cells [u_min + k du, u_min + (k+1) du), k = 0 .. cells-1.
struct LevelGrid {
  double u_min = 0.0;
  double du = 1.0;
  std::size_t cells = 0;

  double edge(std::size_t k) const { return u_min + static_cast<double>(k) * du; }
  double center(std::size_t k) const { return u_min + (static_cast<double>(k) + 0.5) * du; }
  double u_max() const { return edge(cells); }

  // Cell containing u, clamped to [0, cells-1].
  std::size_t cell_of(double u) const {
    if (cells == 0) return 0;
    double r = std::floor((u - u_min) / du);
    if (r < 0.0) return 0;
    auto k = static_cast<std::size_t>(r);
    if (k >= cells) return cells - 1;
    // floor() can land one cell off near an edge; settle against the stored edges
    while (k > 0 && u < edge(k)) --k;
    while (k + 1 < cells && u >= edge(k + 1)) ++k;
    return k;
  }

  bool contains(double u) const { return u >= u_min && u < u_max(); }

  // Grid aligned to integer multiples of du that covers [lo - margin, hi + margin].
  static LevelGrid covering(double lo, double hi, double du, double margin) {
    if (!(du > 0.0)) throw std::invalid_argument("LevelGrid: spacing must be positive");
    if (!(margin >= 0.0)) throw std::invalid_argument("LevelGrid: margin must be non-negative");
    if (hi < lo) std::swap(lo, hi);
    LevelGrid g;
    g.du = du;
    double first = std::floor((lo - margin) / du);
    double last = std::ceil((hi + margin) / du);
    g.u_min = first * du;
    g.cells = static_cast<std::size_t>(std::max(1.0, last - first));
    while (g.u_min > lo - margin) {
      g.u_min -= du;
      ++g.cells;
    }
    while (g.u_max() < hi + margin) ++g.cells;
    return g;
  }

  friend bool operator==(const LevelGrid& a, const LevelGrid& b) {
    return a.u_min == b.u_min && a.du == b.du && a.cells == b.cells;
  }
};

// Values on a LevelGrid. Producers say whether values are cell averages or
// point values at cell centers; integrals treat both as piecewise constant.
struct LevelFunction {
  LevelGrid grid;
  std::vector<double> values;

  LevelFunction() = default;
  explicit LevelFunction(const LevelGrid& g) : grid(g), values(g.cells, 0.0) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }

  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.du;
  }
  double sup() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

  // (sum |v|^p du)^(1/p)
  double lp_norm(double p) const {
    double s = 0.0;
    for (double v : values) s += std::pow(std::abs(v), p);
    return std::pow(s * grid.du, 1.0 / p);
  }

  // Variation of the cell sequence; a lower bound for the variation of the underlying function.
  double variation() const {
    double s = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) s += std::abs(values[k] - values[k - 1]);
    if (!values.empty()) s += std::abs(values.front()) + std::abs(values.back());
    return s;
  }

  // Integral of the piecewise-constant reconstruction over [lo, hi].
  double integrate_over(double lo, double hi) const {
    if (hi <= lo || grid.cells == 0) return 0.0;
    lo = std::max(lo, grid.u_min);
    hi = std::min(hi, grid.u_max());
    if (hi <= lo) return 0.0;
    std::size_t a = grid.cell_of(lo), b = grid.cell_of(hi);
    if (a == b) return values[a] * (hi - lo);
    double s = values[a] * (grid.edge(a + 1) - lo);
    for (std::size_t k = a + 1; k < b; ++k) s += values[k] * grid.du;
    s += values[b] * (hi - grid.edge(b));
    return s;
  }
};

inline void require_same_grid(const LevelFunction& a, const LevelFunction& b, const char* what) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size())
    throw std::invalid_argument(std::string(what) + ": level grids differ");
}

enum class FieldKind { K, Kc, J, L_occupation, L_interval, L_classical, N_indicatrix, Other };

inline const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::K: return "K";
    case FieldKind::Kc: return "Kc";
    case FieldKind::J: return "J";
    case FieldKind::L_occupation: return "L_occupation";
    case FieldKind::L_interval: return "L_interval";
    case FieldKind::L_classical: return "L_classical";
    case FieldKind::N_indicatrix: return "N_indicatrix";
    case FieldKind::Other: return "other";
  }
  return "other";
}

// Level functions at a list of evaluation instants, all on one grid.
struct LocalTimeField {
  LevelGrid grid;
  FieldKind kind = FieldKind::Other;
  std::vector<double> times;
  std::vector<LevelFunction> slices;

  void push(double t, LevelFunction f) {
    if (!slices.empty()) require_same_grid(slices.front(), f, "LocalTimeField");
    if (slices.empty()) grid = f.grid;
    times.push_back(t);
    slices.push_back(std::move(f));
  }
};

// Accumulates piecewise-linear pieces (alpha + beta*u on [lo, hi)) into exact
// cell averages. Interior cells go through difference arrays, the (at most two)
// partial cells of each piece are integrated directly.
class CellAverageAccumulator {
 public:
  explicit CellAverageAccumulator(const LevelGrid& g)
      : grid_(g), alpha_(g.cells + 1, 0.0), beta_(g.cells + 1, 0.0), direct_(g.cells, 0.0) {}

  void add(double lo, double hi, double alpha, double beta) {
    if (grid_.cells == 0) return;
    lo = std::max(lo, grid_.u_min);
    hi = std::min(hi, grid_.u_max());
    if (!(hi > lo)) return;
    std::size_t a = grid_.cell_of(lo), b = grid_.cell_of(hi);
    if (hi <= grid_.edge(b) && b > a) --b;  // hi on an edge: the cell above gets nothing
    if (a == b) {
      direct_[a] += piece_integral(lo, hi, alpha, beta) / grid_.du;
      return;
    }
    direct_[a] += piece_integral(lo, grid_.edge(a + 1), alpha, beta) / grid_.du;
    direct_[b] += piece_integral(grid_.edge(b), hi, alpha, beta) / grid_.du;
    if (b > a + 1) {
      alpha_[a + 1] += alpha;
      alpha_[b] -= alpha;
      beta_[a + 1] += beta;
      beta_[b] -= beta;
    }
  }

  LevelFunction finish() const {
    LevelFunction out(grid_);
    double ca = 0.0, cb = 0.0;
    for (std::size_t k = 0; k < grid_.cells; ++k) {
      ca += alpha_[k];
      cb += beta_[k];
      out.values[k] = ca + cb * grid_.center(k) + direct_[k];
    }
    return out;
  }

 private:
  static double piece_integral(double lo, double hi, double alpha, double beta) {
    return alpha * (hi - lo) + 0.5 * beta * (hi - lo) * (hi + lo);
  }

  LevelGrid grid_;
  std::vector<double> alpha_, beta_, direct_;
};

// Adds constants to the point values at cell centers selected by a predicate
// that holds on one contiguous run of centers. Boundaries are located with the
// predicate itself, so the result matches a per-level loop exactly.
class CenterRangeAccumulator {
 public:
  explicit CenterRangeAccumulator(const LevelGrid& g) : grid_(g), diff_(g.cells + 1, 0.0) {}

  // `below(u)`: the center lies below the run; `inside(u)`: the center is in the run.
  template <class Below, class Inside>
  void add(double value, Below below, Inside inside) {
    std::size_t lo = first_index([&](std::size_t k) { return !below(grid_.center(k)); });
    std::size_t hi = first_index([&](std::size_t k) {
      double c = grid_.center(k);
      return !below(c) && !inside(c);
    });
    if (hi > lo) {
      diff_[lo] += value;
      diff_[hi] -= value;
    }
  }

  LevelFunction finish() const {
    LevelFunction out(grid_);
    double c = 0.0;
    for (std::size_t k = 0; k < grid_.cells; ++k) {
      c += diff_[k];
      out.values[k] = c;
    }
    return out;
  }

 private:
  template <class Pred>
  std::size_t first_index(Pred pred) const {
    std::size_t lo = 0, hi = grid_.cells;
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (pred(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  LevelGrid grid_;
  std::vector<double> diff_;
};

}  // namespace loctime
