// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Forward camera model used as the test bed: scene sampling through T_s,
// Poisson shot noise, Gaussian readout noise, gain, quantization, clipping.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/image.hpp"
#include "hdrlpa/parallel.hpp"
#include "hdrlpa/radiometry.hpp"
#include "hdrlpa/random.hpp"

namespace hdrlpa {

/// Ground-truth noise parameters of one simulated sensor.
struct NoiseTruth {
  double bias_dv = 0.0;               ///< mean black level
  double readout_variance_dv2 = 0.0;  ///< Var[r]
  double prnu_std = 0.0;              ///< std of a Gaussian non-uniformity field (mean 1)
  FloatFrame nonuniformity;           ///< explicit a-field; overrides prnu_std when non-empty

  /// Profile from readout statistics quoted in electrons.
  static NoiseTruth from_electrons(double gain, double readout_mean_e, double readout_std_e) {
    return {gain * readout_mean_e, (gain * readout_std_e) * (gain * readout_std_e), 0.0, {}};
  }
};

/// Canon 5D: g = 0.23 DV/e, Var[r] = 6.5 DV^2.
inline constexpr double kCanon5DGain = 0.23;
inline constexpr double kCanon5DReadoutVariance = 6.5;
/// Canon 40D at ISO 400: g = 1.24 DV/e, Var[r] = 64.2 DV^2, 14-bit.
inline constexpr double kCanon40DGain = 1.24;
inline constexpr double kCanon40DReadoutVariance = 64.2;
/// Kodak KAI-04050: g = 0.27 DV/e, readout mean 72 e, std 11.8 e, 12-bit.
inline constexpr double kKodakGain = 0.27;
inline constexpr double kKodakReadoutMeanE = 72.0;
inline constexpr double kKodakReadoutStdE = 11.8;

struct SensorSpec {
  SensorConfig config;
  NoiseTruth noise;
  int width = 0;
  int height = 0;
};

struct RigSpec {
  std::vector<SensorSpec> sensors;
  std::uint64_t seed = 1;
  bool zero_noise = false;  ///< Poisson replaced by its mean, readout noise off
  double gt_scale = 1.0;    ///< ground-truth pixels per virtual pixel

  void validate() const {
    if (sensors.empty()) throw ConfigError("rig needs at least one sensor");
    if (!(gt_scale > 0.0)) throw ConfigError("gt_scale must be > 0");
    for (const auto& s : sensors) {
      s.config.validate();
      if (s.width <= 0 || s.height <= 0) throw ConfigError("sensor dimensions must be positive");
      if (s.config.id < 0 || s.config.id > 255) throw ConfigError("sensor id must be in [0, 255]");
    }
  }
};

namespace detail {

enum class StreamPurpose : std::uint32_t { Exposure = 1, Nonuniformity = 2 };

inline std::uint32_t stream_id(StreamPurpose purpose, int sensor, int frame) noexcept {
  return (static_cast<std::uint32_t>(purpose) << 24) | ((static_cast<std::uint32_t>(sensor) & 0xFFu) << 16) |
         (static_cast<std::uint32_t>(frame) & 0xFFFFu);
}

}  // namespace detail

/// Non-uniformity field a_i of a sensor: the explicit field, or 1 + prnu_std·N(0,1)
/// drawn from the rig seed. Values are floored at 0.05 to stay positive.
inline FloatFrame nonuniformity_field(const NoiseTruth& noise, int width, int height, std::uint64_t seed, int sensor) {
  if (!noise.nonuniformity.empty()) {
    if (!noise.nonuniformity.same_shape(width, height)) throw ShapeError("non-uniformity field does not match sensor");
    return noise.nonuniformity;
  }
  FloatFrame a(width, height, 1.0);
  if (noise.prnu_std > 0.0) {
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      RandomStream rng(seed, detail::stream_id(detail::StreamPurpose::Nonuniformity, sensor, 0), i);
      a.data[i] = std::max(0.05, 1.0 + noise.prnu_std * rng.normal());
    }
  }
  return a;
}

/// Exact calibration frames corresponding to a noise truth.
inline NoiseCalibration true_calibration(const SensorSpec& s, std::uint64_t seed) {
  NoiseCalibration cal = NoiseCalibration::uniform(s.width, s.height, s.noise.bias_dv, s.noise.readout_variance_dv2);
  cal.nonuniformity = nonuniformity_field(s.noise, s.width, s.height, seed, s.config.id);
  cal.gain_estimate = s.config.gain;
  return cal;
}

/// Bilinear sample of a ground-truth channel at T(x, y), edge-clamped.
inline double sample_scene(const HDRImage& gt, const Affine2& T, double x, double y, ColorChannel c,
                           double gt_scale = 1.0) {
  const auto p = T.apply(x, y);
  const auto& plane = gt.plane(c);
  const double u = std::clamp(p.x * gt_scale, 0.0, static_cast<double>(plane.width - 1));
  const double v = std::clamp(p.y * gt_scale, 0.0, static_cast<double>(plane.height - 1));
  const int x0 = std::min(static_cast<int>(std::floor(u)), plane.width - 1);
  const int y0 = std::min(static_cast<int>(std::floor(v)), plane.height - 1);
  const int x1 = std::min(x0 + 1, plane.width - 1);
  const int y1 = std::min(y0 + 1, plane.height - 1);
  const double fx = u - x0, fy = v - y0;
  const double top = plane(x0, y0) + fx * (plane(x1, y0) - plane(x0, y0));
  const double bottom = plane(x0, y1) + fx * (plane(x1, y1) - plane(x0, y1));
  return top + fy * (bottom - top);
}

/// One digital value: e ~ Poisson(t a n f), y = round(g e + r), r ~ N(bias, Var[r]),
/// clipped to [0, saturation_level]. Rounding is half-up.
inline std::uint16_t expose(double f, double nonuniformity, const SensorConfig& cfg, const NoiseTruth& noise,
                            RandomStream& rng, bool zero_noise = false) {
  const double mean_e = cfg.exposure_time * nonuniformity * cfg.exposure_scaling * std::max(f, 0.0);
  double signal;
  double readout;
  if (zero_noise) {
    signal = cfg.gain * mean_e;
    readout = noise.bias_dv;
  } else {
    signal = cfg.gain * static_cast<double>(rng.poisson(mean_e));
    readout = noise.bias_dv + std::sqrt(noise.readout_variance_dv2) * rng.normal();
  }
  const double y = std::floor(signal + readout + 0.5);
  return static_cast<std::uint16_t>(std::clamp(y, 0.0, std::floor(cfg.saturation_level)));
}

/// Renders one raw CFA frame. `frame` distinguishes repeated captures.
inline CFAImage simulate_sensor(const HDRImage& gt, const SensorSpec& spec, std::uint64_t seed, bool zero_noise = false,
                                double gt_scale = 1.0, int frame = 0, int threads = 0) {
  const auto& cfg = spec.config;
  CFAImage img(spec.width, spec.height, cfg.bit_depth, cfg.pattern);
  const auto a = nonuniformity_field(spec.noise, spec.width, spec.height, seed, cfg.id);
  const auto stream = detail::stream_id(detail::StreamPurpose::Exposure, cfg.id, frame);
  parallel_for_rows(spec.height, threads, [&](int y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto i = img.index(x, y);
      RandomStream rng(seed, stream, i);
      const double f = sample_scene(gt, cfg.transform, x, y, channel_at(cfg.pattern, x, y), gt_scale);
      img.data[i] = expose(f, a.data[i], cfg, spec.noise, rng, zero_noise);
    }
  });
  return img;
}

/// Frames of a spatially uniform scene of radiance f (f = 0 gives black frames).
inline std::vector<CFAImage> simulate_uniform_stack(const SensorSpec& spec, double f, int frames, std::uint64_t seed,
                                                    int first_frame = 0, int threads = 0) {
  HDRImage flat(1, 1, f);
  std::vector<CFAImage> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k) out.push_back(simulate_sensor(flat, spec, seed, false, 1.0, first_frame + k, threads));
  return out;
}

struct SimulationResult {
  std::vector<CFAImage> frames;
  std::vector<SensorConfig> configs;
  std::vector<NoiseCalibration> calibrations;  ///< ground truth
};

/// Independent noise streams per sensor, keyed by (seed, sensor id).
inline SimulationResult simulate_rig(const HDRImage& gt, const RigSpec& rig, int threads = 0) {
  rig.validate();
  SimulationResult out;
  for (const auto& s : rig.sensors) {
    out.frames.push_back(simulate_sensor(gt, s, rig.seed, rig.zero_noise, rig.gt_scale, 0, threads));
    out.configs.push_back(s.config);
    out.calibrations.push_back(true_calibration(s, rig.seed));
  }
  return out;
}

}  // namespace hdrlpa
