#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace esrk {

/// Forward-mode dual number with a fixed-capacity gradient.
///
/// Derivatives are taken with respect to at most kMaxDirections independent
/// variables, enough for every free parameter of a 32-stage reduced scheme.
/// Only the first `width` gradient slots are touched by arithmetic; `width`
/// is the max of the operands' widths.
struct Dual {
  static constexpr std::size_t kMaxDirections = 64;

  double v = 0.0;
  std::array<double, kMaxDirections> g{};
  std::size_t width = 0;

  Dual() = default;
  Dual(double value) : v(value) {} // NOLINT: implicit from constants

  static Dual variable(double value, std::size_t direction, std::size_t width) {
    Dual d(value);
    d.width = width;
    d.g[direction] = 1.0;
    return d;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    if (o.width > width) width = o.width;
    for (std::size_t k = 0; k < o.width; ++k) g[k] += o.g[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    if (o.width > width) width = o.width;
    for (std::size_t k = 0; k < o.width; ++k) g[k] -= o.g[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    const std::size_t w = width > o.width ? width : o.width;
    for (std::size_t k = 0; k < w; ++k) g[k] = g[k] * o.v + v * o.g[k];
    width = w;
    v *= o.v;
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator-(Dual a) {
    a.v = -a.v;
    for (std::size_t k = 0; k < a.width; ++k) a.g[k] = -a.g[k];
    return a;
  }
};

/// Integer power by repeated multiplication (exponents here are 1..6).
template <class T>
T ipow(const T& x, int p) {
  T r = x;
  for (int k = 1; k < p; ++k) r = r * x;
  return r;
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

} // namespace esrk
