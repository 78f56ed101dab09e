#pragma once

#include <Eigen/Dense>

namespace poroflow {

using Index = int;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// 2D cross product (z-component).
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotation by +90 degrees: (n1, n2) -> (-n2, n1).
inline Vec2 rotate_ccw(const Vec2& n) { return {-n.y(), n.x()}; }

/// Tensor form of a 2D skew field with upper entry `r`.
inline Mat2 skew_tensor(double r) {
  Mat2 m;
  m << 0.0, r, -r, 0.0;
  return m;
}

}  // namespace poroflow
