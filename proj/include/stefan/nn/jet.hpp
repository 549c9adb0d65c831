#pragma once

#include <cmath>

namespace stefan::nn {

/// Second-order Taylor jet of a scalar field u(t, x): the value with
/// du/dt, du/dx and d2u/dx2. Arithmetic propagates all four exactly.
/// Mixed and second time derivatives are not tracked.
struct Jet2 {
  double v = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double dxx = 0.0;

  static constexpr Jet2 constant(double c) noexcept { return {c, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 time(double t) noexcept { return {t, 1.0, 0.0, 0.0}; }
  static constexpr Jet2 space(double x) noexcept { return {x, 0.0, 1.0, 0.0}; }

  Jet2& operator+=(const Jet2& o) noexcept {
    v += o.v;
    dt += o.dt;
    dx += o.dx;
    dxx += o.dxx;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) noexcept {
    v -= o.v;
    dt -= o.dt;
    dx -= o.dx;
    dxx -= o.dxx;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) noexcept { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) noexcept { return a -= b; }
inline Jet2 operator-(const Jet2& a) noexcept { return {-a.v, -a.dt, -a.dx, -a.dxx}; }

inline Jet2 operator+(Jet2 a, double c) noexcept {
  a.v += c;
  return a;
}
inline Jet2 operator+(double c, Jet2 a) noexcept { return a + c; }

inline Jet2 operator*(double c, const Jet2& a) noexcept {
  return {c * a.v, c * a.dt, c * a.dx, c * a.dxx};
}
inline Jet2 operator*(const Jet2& a, double c) noexcept { return c * a; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) noexcept {
  return {a.v * b.v, a.dt * b.v + a.v * b.dt, a.dx * b.v + a.v * b.dx,
          a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx};
}

/// Composition f(a) given f, f' and f'' at a.v.
inline Jet2 compose(const Jet2& a, double f, double f1, double f2) noexcept {
  return {f, f1 * a.dt, f1 * a.dx, f1 * a.dxx + f2 * a.dx * a.dx};
}

inline Jet2 tanh(const Jet2& a) noexcept {
  const double s = std::tanh(a.v);
  const double s1 = 1.0 - s * s;
  return compose(a, s, s1, -2.0 * s * s1);
}

inline double tanh(double a) noexcept { return std::tanh(a); }

}  // namespace stefan::nn
