// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Poisson + Gaussian-readout sensor model: conversion of digital values to
// radiant power (photo-electrons per second) with per-sample variances.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/geometry.hpp"
#include "hdrlpa/image.hpp"

namespace hdrlpa {

/// Per-sensor acquisition settings and geometry.
struct SensorConfig {
  int id = 0;
  double exposure_time = 1.0;     ///< t_s, seconds
  double gain = 1.0;              ///< g_s, DV per electron
  double exposure_scaling = 1.0;  ///< n_s, fraction of incident light
  Affine2 transform;              ///< sensor px -> virtual px
  double saturation_level = 65535.0;
  double black_level_epsilon = 0.0;  ///< DV margin above black for tent weights
  int bit_depth = 16;
  BayerPattern pattern = BayerPattern::RGGB;
  std::vector<std::size_t> defective_pixels;  ///< linear indices, excluded like saturated pixels

  void validate() const {
    const auto who = "sensor " + std::to_string(id) + ": ";
    if (!(exposure_time > 0.0)) throw ConfigError(who + "exposure_time must be > 0");
    if (!(gain > 0.0)) throw ConfigError(who + "gain must be > 0");
    if (!(exposure_scaling > 0.0 && exposure_scaling <= 1.0))
      throw ConfigError(who + "exposure_scaling must be in (0, 1]");
    if (bit_depth < 8 || bit_depth > 16) throw ConfigError(who + "bit_depth must be in [8, 16]");
    if (!(saturation_level > 0.0) || saturation_level > static_cast<double>((1u << bit_depth) - 1u))
      throw ConfigError(who + "saturation_level must be in (0, 2^bit_depth - 1]");
    if (!transform.invertible()) throw ConfigError(who + "transform is not invertible");
    if (!(black_level_epsilon >= 0.0)) throw ConfigError(who + "black_level_epsilon must be >= 0");
  }
};

/// Per-pixel calibration frames of one sensor.
struct NoiseCalibration {
  FloatFrame bias;              ///< b_i, DV
  FloatFrame readout_variance;  ///< Var[r_i], DV^2
  FloatFrame nonuniformity;     ///< a_i, unitless, mean ~1
  double gain_estimate = 0.0;   ///< DV/e, informational

  static NoiseCalibration uniform(int w, int h, double bias_dv, double readout_variance_dv2,
                                  double nonuniformity = 1.0) {
    NoiseCalibration cal;
    cal.bias = FloatFrame(w, h, bias_dv);
    cal.readout_variance = FloatFrame(w, h, readout_variance_dv2);
    cal.nonuniformity = FloatFrame(w, h, nonuniformity);
    return cal;
  }

  void validate(int w, int h) const {
    if (!bias.same_shape(w, h) || !readout_variance.same_shape(w, h) || !nonuniformity.same_shape(w, h))
      throw ShapeError("calibration frames do not match sensor dimensions " + std::to_string(w) + "x" +
                       std::to_string(h));
    for (double v : readout_variance.data)
      if (!(v >= 0.0)) throw ConfigError("readout variance must be >= 0 everywhere");
    for (double a : nonuniformity.data)
      if (!(a > 0.0)) throw ConfigError("non-uniformity must be > 0 everywhere");
  }
};

/// One unsaturated observation placed on the virtual grid.
struct RadianceSample {
  double x = 0.0;  ///< virtual-grid position
  double y = 0.0;
  ColorChannel channel = ColorChannel::G;
  double value = 0.0;  ///< f̂, e/s
  double sigma = 1.0;  ///< standard deviation of f̂, e/s
  int sensor = 0;
};

namespace detail {

inline double radiometric_scale(std::size_t i, const SensorConfig& cfg, const NoiseCalibration& cal) {
  const double d = cfg.gain * cfg.exposure_time * cal.nonuniformity.data[i] * cfg.exposure_scaling;
  if (!(d > 0.0) || !std::isfinite(d))
    throw ConfigError("non-positive radiometric denominator g*t*a*n at pixel " + std::to_string(i));
  return d;
}

}  // namespace detail

/// f̂ = (y - b_i) / (g t a_i n). Negative results for dark pixels are kept.
inline double estimate_radiance(double y, std::size_t i, const SensorConfig& cfg, const NoiseCalibration& cal) {
  return (y - cal.bias.data[i]) / detail::radiometric_scale(i, cfg, cal);
}

/// Approximate Var[f̂] = (g^2 t a n f̂ + Var[r]) / (g t a n)^2, with the
/// shot-noise term computed from the noisy f̂ and clamped at zero.
inline double estimate_variance(double fhat, std::size_t i, const SensorConfig& cfg, const NoiseCalibration& cal) {
  const double scale = detail::radiometric_scale(i, cfg, cal);  // g t a n
  const double shot = cfg.gain * scale * std::max(fhat, 0.0);   // g^2 t a n f̂
  return (shot + cal.readout_variance.data[i]) / (scale * scale);
}

/// 1 where y >= saturation level.
inline Mask saturation_mask(const CFAImage& img, const SensorConfig& cfg) {
  Mask m(img.width, img.height, 0);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    m.data[i] = static_cast<double>(img.data[i]) >= cfg.saturation_level ? 1 : 0;
  return m;
}

/// Saturated or listed-defective pixels.
inline Mask exclusion_mask(const CFAImage& img, const SensorConfig& cfg) {
  Mask m = saturation_mask(img, cfg);
  for (auto i : cfg.defective_pixels) {
    if (i >= m.data.size()) throw ShapeError("defective pixel index out of range");
    m.data[i] = 1;
  }
  return m;
}

/// Radiance and variance of every pixel in sensor coordinates.
struct RadianceFrame {
  FloatFrame value;     ///< f̂
  FloatFrame variance;  ///< σ̂², floored at the quantization variance
  Mask excluded;        ///< saturated or defective
};

/// Variance floor used when the model variance vanishes (noise-free
/// calibration and f̂ <= 0): uniform quantization noise of 1/12 DV^2.
inline double quantization_variance(std::size_t i, const SensorConfig& cfg, const NoiseCalibration& cal) {
  const double s = detail::radiometric_scale(i, cfg, cal);
  return (1.0 / 12.0) / (s * s);
}

inline RadianceFrame convert_frame(const CFAImage& img, const SensorConfig& cfg, const NoiseCalibration& cal) {
  cal.validate(img.width, img.height);
  RadianceFrame out{FloatFrame(img.width, img.height), FloatFrame(img.width, img.height),
                    exclusion_mask(img, cfg)};
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double f = estimate_radiance(img.data[i], i, cfg, cal);
    out.value.data[i] = f;
    out.variance.data[i] = std::max(estimate_variance(f, i, cfg, cal), quantization_variance(i, cfg, cal));
  }
  return out;
}

/// One sample per unexcluded pixel, positioned at T_s(pixel center).
/// Pixel centers sit at integer coordinates.
inline std::vector<RadianceSample> frame_to_samples(const CFAImage& img, const SensorConfig& cfg,
                                                    const NoiseCalibration& cal) {
  const auto rf = convert_frame(img, cfg, cal);
  std::vector<RadianceSample> out;
  out.reserve(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto i = img.index(x, y);
      if (rf.excluded.data[i]) continue;
      const auto p = cfg.transform.apply(x, y);
      out.push_back({p.x, p.y, channel_at(cfg.pattern, x, y), rf.value.data[i], std::sqrt(rf.variance.data[i]),
                     cfg.id});
    }
  }
  return out;
}

}  // namespace hdrlpa
