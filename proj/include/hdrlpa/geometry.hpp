// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "hdrlpa/errors.hpp"

namespace hdrlpa {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// 2x3 affine map, row-major: (x, y) -> (m[0] x + m[1] y + m[2], m[3] x + m[4] y + m[5]).
/// Maps sensor pixel coordinates to virtual-grid coordinates.
struct Affine2 {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static Affine2 identity() noexcept { return {}; }
  static Affine2 translation(double tx, double ty) noexcept { return {{1.0, 0.0, tx, 0.0, 1.0, ty}}; }
  /// Rotation by `radians` about `center`.
  static Affine2 rotation(double radians, Point2 center = {}) noexcept {
    const double c = std::cos(radians), s = std::sin(radians);
    return {{c, -s, center.x - c * center.x + s * center.y, s, c, center.y - s * center.x - c * center.y}};
  }

  Point2 apply(double x, double y) const noexcept {
    return {m[0] * x + m[1] * y + m[2], m[3] * x + m[4] * y + m[5]};
  }
  Point2 operator()(Point2 p) const noexcept { return apply(p.x, p.y); }

  double det() const noexcept { return m[0] * m[4] - m[1] * m[3]; }
  bool invertible() const noexcept { return std::abs(det()) > 1e-9; }

  Affine2 inverse() const {
    const double d = det();
    if (!(std::abs(d) > 1e-9)) throw ConfigError("affine transform is not invertible");
    const double a = m[4] / d, b = -m[1] / d, c = -m[3] / d, e = m[0] / d;
    return {{a, b, -(a * m[2] + b * m[5]), c, e, -(c * m[2] + e * m[5])}};
  }

  /// this ∘ other: applies `other` first.
  Affine2 compose(const Affine2& o) const noexcept {
    return {{m[0] * o.m[0] + m[1] * o.m[3], m[0] * o.m[1] + m[1] * o.m[4], m[0] * o.m[2] + m[1] * o.m[5] + m[2],
             m[3] * o.m[0] + m[4] * o.m[3], m[3] * o.m[1] + m[4] * o.m[4], m[3] * o.m[2] + m[4] * o.m[5] + m[5]}};
  }

  bool is_pure_translation(double tol = 1e-12) const noexcept {
    return std::abs(m[0] - 1.0) <= tol && std::abs(m[1]) <= tol && std::abs(m[3]) <= tol &&
           std::abs(m[4] - 1.0) <= tol;
  }

  friend bool operator==(const Affine2&, const Affine2&) = default;
};

inline constexpr double degrees_to_radians(double deg) noexcept { return deg * std::numbers::pi / 180.0; }

}  // namespace hdrlpa
