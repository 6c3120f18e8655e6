#pragma once

#include <array>
#include <cstddef>

namespace loctime {

// Left-continuous sign: sign(0) = -1.
inline double lsign(double x) { return x > 0.0 ? 1.0 : -1.0; }

namespace detail {
// 8-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 15.
inline constexpr std::array<double, 4> gl_nodes{0.18343464249564978, 0.525532409916329, 0.7966664774136267,
                                                0.9602898564975362};
inline constexpr std::array<double, 4> gl_weights{0.36268378337836177, 0.31370664587788705, 0.22238103445337434,
                                                  0.10122853629037669};
}  // namespace detail

template <class Fn>
double gauss_legendre(Fn&& fn, double a, double b, int panels = 1) {
  if (!(b > a)) return 0.0;
  double h = (b - a) / panels, s = 0.0;
  for (int p = 0; p < panels; ++p) {
    double mid = a + (p + 0.5) * h, half = 0.5 * h, acc = 0.0;
    for (std::size_t k = 0; k < detail::gl_nodes.size(); ++k) {
      double d = half * detail::gl_nodes[k];
      acc += detail::gl_weights[k] * (fn(mid - d) + fn(mid + d));
    }
    s += acc * half;
  }
  return s;
}

}  // namespace loctime
