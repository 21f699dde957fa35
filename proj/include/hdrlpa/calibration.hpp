// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Noise-model calibration from stacks of black frames and flat fields:
// bias frame, readout variance, gain (photon transfer), exposure scalings
// and per-pixel non-uniformity.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/image.hpp"
#include "hdrlpa/radiometry.hpp"

namespace hdrlpa {

enum class StackKind { Black, FlatField };

struct FrameStack {
  std::vector<CFAImage> frames;
  StackKind kind = StackKind::Black;

  int width() const noexcept { return frames.empty() ? 0 : frames.front().width; }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height; }

  void validate(StackKind expected) const {
    if (kind != expected)
      throw InputError(expected == StackKind::Black ? "expected a stack of black frames"
                                                    : "expected a stack of flat-field frames");
    if (frames.size() < 2) throw InputError("a frame stack needs at least 2 frames");
    for (const auto& f : frames) {
      if (f.width != frames.front().width || f.height != frames.front().height)
        throw ShapeError("dimension mismatch inside frame stack");
    }
  }
};

namespace detail {

inline FloatFrame stack_mean(const FrameStack& stack) {
  FloatFrame mean(stack.width(), stack.height(), 0.0);
  for (const auto& f : stack.frames)
    for (std::size_t i = 0; i < mean.data.size(); ++i) mean.data[i] += f.data[i];
  const double n = static_cast<double>(stack.frames.size());
  for (auto& v : mean.data) v /= n;
  return mean;
}

/// Two-pass unbiased variance (divisor N - 1).
inline FloatFrame stack_variance(const FrameStack& stack, const FloatFrame& mean) {
  FloatFrame var(stack.width(), stack.height(), 0.0);
  for (const auto& f : stack.frames) {
    for (std::size_t i = 0; i < var.data.size(); ++i) {
      const double d = f.data[i] - mean.data[i];
      var.data[i] += d * d;
    }
  }
  const double n1 = static_cast<double>(stack.frames.size() - 1);
  for (auto& v : var.data) v /= n1;
  return var;
}

inline double trimmed_mean(std::vector<double> v, double keep = 0.9) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  // The small offset keeps exact products such as 0.05 * 20 from rounding down.
  const auto drop =
      static_cast<std::size_t>(std::floor(0.5 * (1.0 - keep) * static_cast<double>(v.size()) + 1e-9));
  const auto first = v.begin() + static_cast<std::ptrdiff_t>(drop);
  const auto last = v.end() - static_cast<std::ptrdiff_t>(drop);
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

}  // namespace detail

/// Per-pixel mean of a black stack, DV.
inline FloatFrame compute_bias_frame(const FrameStack& black) {
  black.validate(StackKind::Black);
  return detail::stack_mean(black);
}

/// Per-pixel unbiased sample variance of a black stack, DV^2.
inline FloatFrame compute_readout_variance(const FrameStack& black) {
  black.validate(StackKind::Black);
  return detail::stack_variance(black, detail::stack_mean(black));
}

/// Flat pixel usable for photon-transfer statistics:
/// bias + 10 σ_read < mean < 0.9 saturation.
inline bool well_exposed(double flat_mean, double bias, double readout_variance, double saturation_level) noexcept {
  return flat_mean > bias + 10.0 * std::sqrt(readout_variance) && flat_mean < 0.9 * saturation_level;
}

struct GainEstimate {
  double gain = 0.0;          ///< spatial mean of per-pixel estimates, DV/e
  double spatial_std = 0.0;   ///< spatial standard deviation of per-pixel estimates
  std::size_t valid_pixels = 0;
  bool degenerate = false;    ///< zero photon-transfer signal (e.g. noise-free data)
  std::array<double, 3> per_channel{};  ///< R, G, B means (NaN if a channel has no valid pixel)
};

/// g = (Var[y] - Var[b]) / (E[y] - E[b]) per pixel, averaged over well-exposed pixels.
inline GainEstimate estimate_gain(const FrameStack& flat, const FrameStack& black, double saturation_level) {
  flat.validate(StackKind::FlatField);
  black.validate(StackKind::Black);
  if (flat.width() != black.width() || flat.height() != black.height())
    throw ShapeError("flat and black stacks differ in dimensions");

  const auto flat_mean = detail::stack_mean(flat);
  const auto flat_var = detail::stack_variance(flat, flat_mean);
  const auto bias = detail::stack_mean(black);
  const auto black_var = detail::stack_variance(black, bias);

  const std::size_t n = flat_mean.data.size();
  std::size_t non_positive = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!(flat_mean.data[i] - bias.data[i] > 0.0)) ++non_positive;
  if (2 * non_positive > n) throw NumericError("flat field too dark: mean at or below black level at most pixels");

  const auto pattern = flat.frames.front().pattern;
  const int w = flat.width();
  GainEstimate est;
  double sum = 0.0, sum2 = 0.0;
  std::array<double, 3> ch_sum{};
  std::array<std::size_t, 3> ch_n{};
  bool any_signal = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!well_exposed(flat_mean.data[i], bias.data[i], black_var.data[i], saturation_level)) continue;
    const double g = (flat_var.data[i] - black_var.data[i]) / (flat_mean.data[i] - bias.data[i]);
    any_signal = any_signal || flat_var.data[i] != 0.0 || black_var.data[i] != 0.0;
    sum += g;
    sum2 += g * g;
    const auto c = channel_index(channel_at(pattern, static_cast<int>(i % static_cast<std::size_t>(w)),
                                            static_cast<int>(i / static_cast<std::size_t>(w))));
    ch_sum[c] += g;
    ++ch_n[c];
    ++est.valid_pixels;
  }
  if (est.valid_pixels == 0) throw NumericError("no well-exposed flat-field pixels for gain estimation");
  const double m = static_cast<double>(est.valid_pixels);
  est.gain = sum / m;
  est.spatial_std = std::sqrt(std::max(0.0, sum2 / m - est.gain * est.gain));
  for (std::size_t c = 0; c < 3; ++c)
    est.per_channel[c] = ch_n[c] ? ch_sum[c] / static_cast<double>(ch_n[c]) : std::numeric_limits<double>::quiet_NaN();
  est.degenerate = !any_signal || est.gain == 0.0;
  return est;
}

/// Exposure scalings relative to `reference` (which gets exactly 1). Each
/// sensor's flat mean is converted with provisional n = 1 and a = 1; the
/// scaling is the central-90% trimmed mean of the pixel-wise ratio to the
/// reference. Sensors must share pixel dimensions.
inline std::vector<double> estimate_exposure_scaling(std::span<const FrameStack> flats, std::size_t reference,
                                                     std::span<const SensorConfig> configs,
                                                     std::span<const NoiseCalibration> cals) {
  const auto ns = flats.size();
  if (ns == 0 || configs.size() != ns || cals.size() != ns)
    throw ShapeError("flat stacks, configs and calibrations must have one entry per sensor");
  if (reference >= ns) throw InputError("reference sensor index out of range");
  for (const auto& f : flats) {
    f.validate(StackKind::FlatField);
    if (f.width() != flats[reference].width() || f.height() != flats[reference].height())
      throw ShapeError("flat stacks of different sensors differ in dimensions");
  }

  struct Provisional {
    std::vector<double> f;
    std::vector<char> valid;
  };
  std::vector<Provisional> prov(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    cals[s].validate(flats[s].width(), flats[s].height());
    const auto mean = detail::stack_mean(flats[s]);
    const auto& cfg = configs[s];
    const double scale = cfg.gain * cfg.exposure_time;
    if (!(scale > 0.0)) throw ConfigError("non-positive gain * exposure time");
    prov[s].f.resize(mean.data.size());
    prov[s].valid.resize(mean.data.size());
    std::size_t valid = 0;
    for (std::size_t i = 0; i < mean.data.size(); ++i) {
      prov[s].f[i] = (mean.data[i] - cals[s].bias.data[i]) / scale;
      const bool ok = well_exposed(mean.data[i], cals[s].bias.data[i], cals[s].readout_variance.data[i],
                                   cfg.saturation_level);
      prov[s].valid[i] = ok ? 1 : 0;
      valid += ok ? 1 : 0;
    }
    if (2 * valid < mean.data.size())
      throw NumericError("sensor " + std::to_string(cfg.id) + ": flat field saturated or too dark for scaling");
  }

  std::vector<double> n(ns, 1.0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (s == reference) continue;
    std::vector<double> ratios;
    ratios.reserve(prov[s].f.size());
    for (std::size_t i = 0; i < prov[s].f.size(); ++i)
      if (prov[s].valid[i] && prov[reference].valid[i]) ratios.push_back(prov[s].f[i] / prov[reference].f[i]);
    if (ratios.empty()) throw NumericError("no pixel is well exposed in both flats");
    n[s] = detail::trimmed_mean(std::move(ratios));
  }
  return n;
}

/// a_i from the bias-subtracted flat mean divided by g t n, normalized to
/// unit spatial mean over well-exposed pixels. Pixels that are not well
/// exposed get 1.
inline FloatFrame estimate_nonuniformity(const FrameStack& flat, double exposure_scaling, const SensorConfig& cfg,
                                         const NoiseCalibration& cal) {
  flat.validate(StackKind::FlatField);
  cal.validate(flat.width(), flat.height());
  if (!(exposure_scaling > 0.0)) throw ConfigError("exposure scaling must be > 0");
  const auto mean = detail::stack_mean(flat);
  const double scale = cfg.gain * cfg.exposure_time * exposure_scaling;
  FloatFrame a(flat.width(), flat.height(), 1.0);
  std::vector<char> valid(a.data.size(), 0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (!well_exposed(mean.data[i], cal.bias.data[i], cal.readout_variance.data[i], cfg.saturation_level)) continue;
    a.data[i] = (mean.data[i] - cal.bias.data[i]) / scale;
    valid[i] = 1;
    sum += a.data[i];
    ++count;
  }
  if (count == 0 || !(sum > 0.0)) throw NumericError("flat signal too small to estimate non-uniformity");
  const double mean_radiance = sum / static_cast<double>(count);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (valid[i]) a.data[i] /= mean_radiance;
  return a;
}

struct SensorCalibrationResult {
  NoiseCalibration calibration;
  GainEstimate gain;
};

/// Bias, readout variance and gain of one sensor; non-uniformity is filled
/// in once the exposure scalings are known.
inline SensorCalibrationResult calibrate_noise(const FrameStack& black, const FrameStack& flat,
                                               const SensorConfig& cfg) {
  SensorCalibrationResult out;
  out.calibration.bias = compute_bias_frame(black);
  out.calibration.readout_variance = compute_readout_variance(black);
  out.calibration.nonuniformity = FloatFrame(black.width(), black.height(), 1.0);
  out.gain = estimate_gain(flat, black, cfg.saturation_level);
  out.calibration.gain_estimate = out.gain.gain;
  return out;
}

}  // namespace hdrlpa
