#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "quadrature.hpp"

namespace loctime {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

// f'' as an absolutely continuous part plus point masses. The density is smooth
// between consecutive breakpoints and vanishes outside [support_lo, support_hi].
struct SecondDerivativeMeasure {
  std::function<double(double)> density;  // empty: no density
  std::vector<Atom> atoms;                // sorted, distinct locations
  std::vector<double> breakpoints;        // sorted
  double support_lo = -std::numeric_limits<double>::infinity();
  double support_hi = std::numeric_limits<double>::infinity();
  int panels = 1;  // quadrature panels per smooth piece; 1 suffices for polynomial pieces

  bool has_density() const { return static_cast<bool>(density); }
  double density_at(double u) const {
    if (!density || u < support_lo || u > support_hi) return 0.0;
    return density(u);
  }

  // Integral of g against the measure over [lo, hi). Atoms are included by
  // membership, the density by Gauss-Legendre on each smooth piece.
  template <class G>
  double integrate(G&& g, double lo, double hi) const {
    if (!(hi > lo)) return 0.0;
    double s = 0.0;
    for (const auto& a : atoms)
      if (a.location >= lo && a.location < hi) s += a.weight * g(a.location);
    if (!density) return s;
    double a = std::max(lo, support_lo), b = std::min(hi, support_hi);
    if (!(b > a)) return s;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), a);
    double left = a;
    auto fn = [&](double u) { return g(u) * density(u); };
    for (; it != breakpoints.end() && *it < b; ++it) {
      s += gauss_legendre(fn, left, *it, panels);
      left = *it;
    }
    s += gauss_legendre(fn, left, b, panels);
    return s;
  }

  double mass(double lo, double hi) const {
    return integrate([](double) { return 1.0; }, lo, hi);
  }
  double abs_mass(double lo, double hi) const;
};

// Difference-of-convex test function: f, its left derivative and f''.
struct DCFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  SecondDerivativeMeasure f2;

  double operator()(double x) const { return f(x); }
  double derivative(double x) const { return fprime(x); }
  bool atomless() const { return f2.atoms.empty(); }
};

inline double SecondDerivativeMeasure::abs_mass(double lo, double hi) const {
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.location >= lo && a.location < hi) s += std::abs(a.weight);
  if (density) {
    SecondDerivativeMeasure d = *this;
    d.atoms.clear();
    auto dens = density;
    d.density = [dens](double u) { return std::abs(dens(u)); };
    s += d.mass(lo, hi);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Builders

// scale * |x - u0|; f'' = 2 scale delta_{u0}. scale = 1/2 gives a unit atom.
inline DCFunction make_abs(double u0, double scale = 0.5) {
  DCFunction fn;
  fn.name = "abs";
  fn.f = [=](double x) { return scale * std::abs(x - u0); };
  fn.fprime = [=](double x) { return scale * lsign(x - u0); };
  fn.f2.atoms = {{u0, 2.0 * scale}};
  return fn;
}

// (x - u0)^+ with left derivative 1{x > u0}; f'' = delta_{u0}.
inline DCFunction make_relu(double u0) {
  DCFunction fn;
  fn.name = "relu";
  fn.f = [=](double x) { return std::max(x - u0, 0.0); };
  fn.fprime = [=](double x) { return x > u0 ? 1.0 : 0.0; };
  fn.f2.atoms = {{u0, 1.0}};
  return fn;
}

inline DCFunction make_square() {
  DCFunction fn;
  fn.name = "square";
  fn.f = [](double x) { return 0.5 * x * x; };
  fn.fprime = [](double x) { return x; };
  fn.f2.density = [](double) { return 1.0; };
  return fn;
}

inline DCFunction make_affine(double slope, double intercept) {
  DCFunction fn;
  fn.name = "affine";
  fn.f = [=](double x) { return slope * x + intercept; };
  fn.fprime = [=](double) { return slope; };
  return fn;
}

// C^2 function whose f'' is amp * (1 - s^2)^3, s = (u - center) / width, on |s| < 1.
inline DCFunction make_bump(double center, double width, double amp = 1.0) {
  if (!(width > 0.0)) throw std::invalid_argument("bump: width must be positive");
  constexpr double m = 16.0 / 35.0;  // integral of (1 - s^2)^3 over [0, 1]
  auto g1 = [](double s) {
    double s2 = s * s;
    return s * (1.0 - s2 + s2 * s2 * (0.6 - s2 / 7.0));
  };
  auto g2 = [](double s) {
    double s2 = s * s;
    return s2 * (0.5 - s2 / 4.0 + s2 * s2 * (0.1 - s2 / 56.0));
  };
  double g2_1 = g2(1.0);
  DCFunction fn;
  fn.name = "bump";
  fn.f = [=](double x) {
    double s = (x - center) / width;
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return amp * width * 2.0 * m * (width + (x - center - width));
    return amp * width * width * (g2(s) - g2_1 + m * (s + 1.0));
  };
  fn.fprime = [=](double x) {
    double s = (x - center) / width;
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return amp * width * 2.0 * m;
    return amp * width * (g1(s) + m);
  };
  fn.f2.density = [=](double u) {
    double s = (u - center) / width;
    if (s <= -1.0 || s >= 1.0) return 0.0;
    double r = 1.0 - s * s;
    return amp * r * r * r;
  };
  fn.f2.support_lo = center - width;
  fn.f2.support_hi = center + width;
  fn.f2.breakpoints = {center - width, center + width};
  return fn;
}

// sum_i c_i f_i
inline DCFunction combine(const std::vector<std::pair<double, DCFunction>>& terms, std::string name = "mix") {
  DCFunction fn;
  fn.name = std::move(name);
  auto parts = std::make_shared<std::vector<std::pair<double, DCFunction>>>(terms);
  fn.f = [parts](double x) {
    double s = 0.0;
    for (const auto& [c, g] : *parts) s += c * g.f(x);
    return s;
  };
  fn.fprime = [parts](double x) {
    double s = 0.0;
    for (const auto& [c, g] : *parts) s += c * g.fprime(x);
    return s;
  };
  std::vector<Atom> atoms;
  bool any_density = false;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [c, g] : terms) {
    for (const auto& a : g.f2.atoms) atoms.push_back({a.location, c * a.weight});
    if (g.f2.has_density() && c != 0.0) {
      any_density = true;
      lo = std::min(lo, g.f2.support_lo);
      hi = std::max(hi, g.f2.support_hi);
      fn.f2.breakpoints.insert(fn.f2.breakpoints.end(), g.f2.breakpoints.begin(), g.f2.breakpoints.end());
      if (std::isfinite(g.f2.support_lo)) fn.f2.breakpoints.push_back(g.f2.support_lo);
      if (std::isfinite(g.f2.support_hi)) fn.f2.breakpoints.push_back(g.f2.support_hi);
      fn.f2.panels = std::max(fn.f2.panels, g.f2.panels);
    }
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const auto& a : atoms) {
    if (!fn.f2.atoms.empty() && fn.f2.atoms.back().location == a.location)
      fn.f2.atoms.back().weight += a.weight;
    else
      fn.f2.atoms.push_back(a);
  }
  std::erase_if(fn.f2.atoms, [](const Atom& a) { return a.weight == 0.0; });
  auto& bp = fn.f2.breakpoints;
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  if (any_density) {
    fn.f2.support_lo = lo;
    fn.f2.support_hi = hi;
    fn.f2.density = [parts](double u) {
      double s = 0.0;
      for (const auto& [c, g] : *parts) s += c * g.f2.density_at(u);
      return s;
    };
  }
  return fn;
}

// Canonical test functions: pure atom (two kinds), pure density (global and
// compactly supported), and a kinked mixture with both parts.
inline std::vector<DCFunction> builtin_suite() {
  return {make_abs(0.1), make_relu(-0.2), make_square(), make_bump(0.0, 0.8),
          combine({{1.0, make_abs(0.25)}, {0.3, make_bump(-0.2, 0.5)}, {-0.4, make_relu(-0.6)}}, "mix")};
}

// ---------------------------------------------------------------------------

// f(b) - f(a) - f'(a)(b - a), from the evaluation handles.
inline double jf_increment(const DCFunction& f, double a, double b) {
  if (a == b) return 0.0;
  return f(b) - f(a) - f.derivative(a) * (b - a);
}

// int_{[[a,b[[} |b - u| f''(du), from the measure.
inline double jf_measure_side(const DCFunction& f, double a, double b) {
  if (a == b) return 0.0;
  double lo = std::min(a, b), hi = std::max(a, b);
  return f.f2.integrate([b](double u) { return std::abs(b - u); }, lo, hi);
}

enum class AtomPolicy { Error, ExtendWithZero };

// int g f''(du) for g sampled on a level grid: midpoint rule for the density,
// atoms read from the cell that contains them (the nearest cell to the left).
inline double integrate_against_f2(const LevelFunction& g, const DCFunction& f,
                                   AtomPolicy policy = AtomPolicy::Error) {
  const auto& grid = g.grid;
  double s = 0.0;
  if (f.f2.has_density())
    for (std::size_t k = 0; k < grid.cells; ++k)
      if (g.values[k] != 0.0) s += g.values[k] * f.f2.density_at(grid.center(k)) * grid.du;
  for (const auto& a : f.f2.atoms) {
    if (!grid.contains(a.location)) {
      if (policy == AtomPolicy::Error) throw std::domain_error("integrate_against_f2: atom outside the level grid");
      continue;
    }
    s += a.weight * g.values[grid.cell_of(a.location)];
  }
  return s;
}

// Same, for a closed-form g over the window [lo, hi).
template <class G>
double integrate_against_f2(G&& g, const DCFunction& f, double lo, double hi) {
  return f.f2.integrate(std::forward<G>(g), lo, hi);
}

// ---------------------------------------------------------------------------
// Mollification

class Mollifier {
 public:
  // Standard bump exp(-1/(1-s^2)) on [-1, 1]; the one-sided variant lives on [0, 1].
  explicit Mollifier(bool one_sided = false) : one_sided_(one_sided) {
    norm_ = 1.0 / gauss_legendre([](double s) { return raw(s); }, -1.0, 1.0, 256);
  }

  bool one_sided() const { return one_sided_; }
  double support_lo() const { return one_sided_ ? 0.0 : -1.0; }
  double support_hi() const { return 1.0; }

  double operator()(double s) const {
    if (one_sided_) return 2.0 * norm_ * raw(2.0 * s - 1.0);
    return norm_ * raw(s);
  }

 private:
  static double raw(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
  }

  bool one_sided_;
  double norm_ = 1.0;
};

// f_n = rho_n * f with rho_n(u) = n rho(n u). Handles are evaluated by
// quadrature over the mollifier support, split where f' or f'' kinks.
inline DCFunction mollify(const DCFunction& f, int n, const Mollifier& rho = Mollifier()) {
  if (n < 1) throw std::invalid_argument("mollify: n must be positive");
  constexpr int panels = 64;
  auto base = std::make_shared<DCFunction>(f);
  double nn = n;
  std::vector<double> kinks;
  for (const auto& a : f.f2.atoms) kinks.push_back(a.location);
  kinks.insert(kinks.end(), f.f2.breakpoints.begin(), f.f2.breakpoints.end());
  auto conv = [base, rho, nn, kinks](auto&& h, double x) {
    // integral of rho(s) h(x - s/n) ds, split at s = n (x - kink)
    std::vector<double> cuts{rho.support_lo(), rho.support_hi()};
    for (double k : kinks) {
      double s = nn * (x - k);
      if (s > rho.support_lo() && s < rho.support_hi()) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i)
      acc += gauss_legendre([&](double s) { return rho(s) * h(x - s / nn); }, cuts[i - 1], cuts[i], panels);
    return acc;
  };
  DCFunction out;
  out.name = f.name + "_mollified";
  out.f = [base, conv](double x) { return conv([&](double y) { return base->f(y); }, x); };
  out.fprime = [base, conv](double x) { return conv([&](double y) { return base->fprime(y); }, x); };
  out.f2.density = [base, conv, rho, nn](double u) {
    double s = 0.0;
    for (const auto& a : base->f2.atoms) s += a.weight * nn * rho(nn * (u - a.location));
    if (base->f2.has_density()) s += conv([&](double y) { return base->f2.density_at(y); }, u);
    return s;
  };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& a : f.f2.atoms) {
    lo = std::min(lo, a.location);
    hi = std::max(hi, a.location);
  }
  if (f.f2.has_density()) {
    lo = std::min(lo, f.f2.support_lo);
    hi = std::max(hi, f.f2.support_hi);
  }
  // rho_n * mu lives on supp(mu) - [lo_rho, hi_rho]/n
  out.f2.support_lo = lo - rho.support_hi() / nn;
  out.f2.support_hi = hi - rho.support_lo() / nn;
  for (double k : kinks) {
    out.f2.breakpoints.push_back(k - rho.support_hi() / nn);
    out.f2.breakpoints.push_back(k - rho.support_lo() / nn);
  }
  std::sort(out.f2.breakpoints.begin(), out.f2.breakpoints.end());
  out.f2.breakpoints.erase(std::unique(out.f2.breakpoints.begin(), out.f2.breakpoints.end()),
                           out.f2.breakpoints.end());
  out.f2.panels = 16;
  if (!(out.f2.support_hi > out.f2.support_lo)) out.f2.density = nullptr;  // affine input
  return out;
}

}  // namespace loctime
