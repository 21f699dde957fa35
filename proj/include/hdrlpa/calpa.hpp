// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Color-adaptive LPA: an isotropic pass estimates green gradients, a
// truncated SVD of windowed gradients gives a per-pixel steering matrix, and
// all three channels are refitted with windows elongated along edges.

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hdrlpa/lpa.hpp"

namespace hdrlpa {

struct AdaptiveParams {
  ReconstructionParams base;  ///< order must be >= 1
  double alpha = 0.005;       ///< structure sensitivity
  double lambda1 = 1.0;       ///< elongation regularizer
  double lambda2 = 0.001;     ///< scaling regularizer
  int gradient_window = 9;    ///< odd side length of the gradient analysis window
  double max_elongation = 50.0;
  bool per_channel_steering = false;
  /// Steer on ∇f / f (dimensionless, exposure invariant) rather than ∇f in
  /// e/s/px, so that λ₁ and λ₂ do not depend on the radiance scale.
  bool relative_gradients = true;

  void validate() const {
    base.validate();
    if (base.order < 1) throw ConfigError("adaptive reconstruction needs polynomial order >= 1");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 must be >= 0");
    if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be > 0");
    if (gradient_window < 3 || gradient_window % 2 == 0) throw ConfigError("gradient window must be odd and >= 3");
    if (!(max_elongation >= 1.0)) throw ConfigError("max_elongation must be >= 1");
  }
};

/// Local window shape: C = γ U_θ diag(σ, 1/σ) U_θᵀ with U_θ = [[cos θ, sin θ], [-sin θ, cos θ]].
/// C acts as the window's precision, so fits use H = h · C⁻¹.
struct Steering {
  double theta = 0.0;
  double sigma = 1.0;
  double gamma = 1.0;
  SmoothingMatrix C{1.0, 0.0, 1.0};
  int samples = 0;  ///< finite gradient rows in the analysis window

  static SmoothingMatrix shape(double theta, double sigma, double gamma) noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    // σ c² + s²/σ etc., arranged so σ = 1 gives exactly the identity.
    const double inv = 1.0 / sigma;
    const double diff = sigma - inv;
    return {gamma * (inv + diff * c * c), -gamma * diff * c * s, gamma * (inv + diff * s * s)};
  }

  /// h · C⁻¹ = (h/γ) U_θ diag(1/σ, σ) U_θᵀ.
  SmoothingMatrix smoothing(double h) const noexcept { return shape(theta, 1.0 / sigma, h / gamma); }
};

struct GradientField {
  Plane<double> gx;
  Plane<double> gy;
  Plane<double> value;  ///< C₀ of the same pass
};

/// Gradient planes (C₁) of an isotropic LPA pass of `channel` with order >= 1.
inline GradientField gradient_field(const SampleIndex& index, const OutputGrid& grid, const ReconstructionParams& base,
                                    ColorChannel channel = ColorChannel::G) {
  if (base.order < 1) throw ConfigError("gradient estimation needs polynomial order >= 1");
  auto rec = reconstruct_channel(index, channel, grid, base, true);
  return {std::move(rec.grad_x), std::move(rec.grad_y), std::move(rec.value)};
}

/// One weighted gradient observation for the steering SVD.
struct GradientSample {
  double gx = 0.0;
  double gy = 0.0;
  double weight = 1.0;
};

/// θ, σ, γ and C from the SVD of the matrix with rows √w·(gx, gy).
/// Non-finite rows are skipped; with none left the steering is the identity.
inline Steering steering_from_samples(std::span<const GradientSample> rows, const AdaptiveParams& params) {
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (!std::isfinite(r.gx) || !std::isfinite(r.gy) || !(r.weight > 0.0)) continue;
    sxx += r.weight * r.gx * r.gx;
    sxy += r.weight * r.gx * r.gy;
    syy += r.weight * r.gy * r.gy;
    ++count;
  }
  Steering st;
  st.samples = count;
  if (count == 0) return st;

  // Eigen-decomposition of GᵀG gives V and S² of G = U S Vᵀ.
  const double mean = 0.5 * (sxx + syy);
  const double rad = std::hypot(0.5 * (sxx - syy), sxy);
  const double l1 = mean + rad;
  const double l2 = std::max(mean - rad, 0.0);
  const double s1 = std::sqrt(std::max(l1, 0.0));
  const double s2 = std::sqrt(l2);

  // Dominant right-singular vector; its orthogonal complement is V's second column.
  double d1x, d1y;
  if (rad == 0.0) {
    d1x = 1.0;
    d1y = 0.0;
  } else if (sxx >= syy) {
    d1x = l1 - syy;
    d1y = sxy;
  } else {
    d1x = sxy;
    d1y = l1 - sxx;
  }
  const double v1 = -d1y, v2 = d1x;
  double theta = std::atan2(v1, v2);
  if (theta > std::numbers::pi / 2) theta -= std::numbers::pi;
  if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;

  st.theta = theta;
  st.sigma = std::min((s1 + params.lambda1) / (s2 + params.lambda1), params.max_elongation);
  st.gamma = std::pow((s1 * s2 + params.lambda2) / static_cast<double>(count), params.alpha);
  st.C = Steering::shape(st.theta, st.sigma, st.gamma);
  return st;
}

/// Steering at output pixel (x, y) from the gradient window around it.
/// Window weights are Gaussian with std = window / 4. With relative
/// gradients, pixels whose radiance is not positive are skipped.
inline Steering steering_from_gradients(const GradientField& field, int x, int y, const AdaptiveParams& params) {
  if (params.relative_gradients && !field.value.same_shape(field.gx))
    throw ShapeError("relative gradients need the radiance plane of the gradient pass");
  const int half = params.gradient_window / 2;
  const double sd = params.gradient_window / 4.0;
  std::vector<GradientSample> rows;
  rows.reserve(static_cast<std::size_t>(params.gradient_window * params.gradient_window));
  for (int dy = -half; dy <= half; ++dy) {
    const int yy = y + dy;
    if (yy < 0 || yy >= field.gx.height) continue;
    for (int dx = -half; dx <= half; ++dx) {
      const int xx = x + dx;
      if (xx < 0 || xx >= field.gx.width) continue;
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sd * sd));
      double gx = field.gx(xx, yy), gy = field.gy(xx, yy);
      if (params.relative_gradients) {
        const double f = field.value(xx, yy);
        if (!(f > 0.0)) continue;
        gx /= f;
        gy /= f;
      }
      rows.push_back({gx, gy, w});
    }
  }
  return steering_from_samples(rows, params);
}

using SteeringField = Plane<Steering>;

inline SteeringField steering_field(const GradientField& field, const AdaptiveParams& params) {
  SteeringField out(field.gx.width, field.gx.height);
  parallel_for_rows(out.height, params.base.threads, [&](int y) {
    for (int x = 0; x < out.width; ++x) out(x, y) = steering_from_gradients(field, x, y, params);
  });
  return out;
}

/// Refits one channel with per-pixel windows H_j = h · C_j⁻¹. A pixel whose
/// steered system stays rank-deficient after radius growth falls back to the
/// full isotropic sequence.
inline Plane<double> reconstruct_channel_steered(const SampleIndex& index, ColorChannel channel,
                                                 const OutputGrid& grid, const SteeringField& steering,
                                                 const ReconstructionParams& base) {
  const double h = base.scale_for(channel);
  const auto iso = SmoothingMatrix::isotropic(h);
  const FitOptions opts{base.condition_threshold, base.weights};
  Plane<double> out(grid.width, grid.height, std::numeric_limits<double>::quiet_NaN());
  parallel_for_rows(grid.height, base.threads, [&](int y) {
    for (int x = 0; x < grid.width; ++x) {
      const auto center = grid.center(x, y);
      const auto H = steering(x, y).smoothing(h);
      auto fit = fit_pixel(index, channel, center, H, base.order, base.max_support_radius, opts, base.order);
      if (fit.order < 0) fit = fit_pixel(index, channel, center, iso, base.order, base.max_support_radius, opts);
      out(x, y) = fit.value;
    }
  });
  return out;
}

/// Green gradients -> shared steering -> steered fits of R, G and B.
inline HDRImage calpa_reconstruct(const SampleIndex& index, const OutputGrid& grid, const AdaptiveParams& params) {
  params.validate();
  HDRImage img;
  img.width = grid.width;
  img.height = grid.height;
  if (params.per_channel_steering) {
    for (auto c : kAllChannels) {
      const auto field = steering_field(gradient_field(index, grid, params.base, c), params);
      img.plane(c) = reconstruct_channel_steered(index, c, grid, field, params.base);
    }
    return img;
  }
  const auto field = steering_field(gradient_field(index, grid, params.base, ColorChannel::G), params);
  for (auto c : kAllChannels) img.plane(c) = reconstruct_channel_steered(index, c, grid, field, params.base);
  return img;
}

inline HDRImage calpa_reconstruct(std::span<const RadianceSample> samples, const OutputGrid& grid,
                                  const AdaptiveParams& params) {
  return calpa_reconstruct(SampleIndex(samples), grid, params);
}

}  // namespace hdrlpa
