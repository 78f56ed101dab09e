#pragma once

// Second-order forward-mode automatic differentiation in two variables.
//
// A Jet carries a value together with its gradient and Hessian with respect
// to (x, y). Manufactured solutions are written once as templates over the
// scalar type and evaluated with Jets to obtain exact derivatives.

#include <cmath>

#include "geometry.hpp"

namespace poroflow {

struct Jet {
  double v = 0.0;
  Vec2 g = Vec2::Zero();
  Mat2 h = Mat2::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Jet(double value, const Vec2& grad, const Mat2& hess) : v(value), g(grad), h(hess) {}

  static Jet variable(double value, int axis) {
    Jet j(value);
    j.g[axis] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
};

inline Jet operator-(const Jet& a) { return {-a.v, -a.g, -a.h}; }
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }

inline Jet operator*(const Jet& a, const Jet& b) {
  const Mat2 cross_term = a.g * b.g.transpose() + b.g * a.g.transpose();
  return {a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.h + b.v * a.h + cross_term};
}

// Applies a scalar function with derivatives d1 = f'(a), d2 = f''(a).
inline Jet chain(const Jet& a, double f, double d1, double d2) {
  return {f, d1 * a.g, d1 * a.h + d2 * a.g * a.g.transpose()};
}

inline Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet pow(const Jet& a, double e) {
  const double p = std::pow(a.v, e);
  return chain(a, p, e * p / a.v, e * (e - 1.0) * p / (a.v * a.v));
}

/// atan2(y, x) for jets: chain rule of the bivariate angle function.
inline Jet atan2(const Jet& y, const Jet& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double r4 = r2 * r2;
  const double fx = -y.v / r2, fy = x.v / r2;
  const double fxx = 2.0 * x.v * y.v / r4, fxy = (y.v * y.v - x.v * x.v) / r4, fyy = -fxx;
  Jet out;
  out.v = std::atan2(y.v, x.v);
  out.g = fx * x.g + fy * y.g;
  out.h = fx * x.h + fy * y.h + fxx * x.g * x.g.transpose() +
          fxy * (x.g * y.g.transpose() + y.g * x.g.transpose()) + fyy * y.g * y.g.transpose();
  return out;
}

using std::atan2;
using std::cos;
using std::exp;
using std::pow;
using std::sin;
using std::sqrt;

inline double value_of(double a) { return a; }
inline double value_of(const Jet& a) { return a.v; }

}  // namespace poroflow
