// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scene generators and helpers shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hdrlpa/hdrlpa.hpp"

namespace hdrlpa::testing {

inline HDRImage constant_scene(int w, int h, double f) { return HDRImage(w, h, f); }

/// f_c(x, y) = scale_c · (a + bx·x + by·y), with channel scales R 1, G 1.25, B 0.8.
inline HDRImage planar_scene(int w, int h, double a, double bx, double by) {
  HDRImage img(w, h);
  const double scale[3] = {1.0, 1.25, 0.8};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (auto c : kAllChannels) img.at(c, x, y) = scale[channel_index(c)] * (a + bx * x + by * y);
  return img;
}

/// Left half f_lo, right half f_hi; the step sits between columns w/2 - 1 and w/2.
inline HDRImage vertical_edge_scene(int w, int h, double f_lo, double f_hi) {
  HDRImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (auto c : kAllChannels) img.at(c, x, y) = x < w / 2 ? f_lo : f_hi;
  return img;
}

/// High-dynamic-range test chart: a smooth log-domain background spanning
/// about 12 stops, anti-aliased disks and bars of varying contrast, a star
/// of radial spokes, and a few bright highlights. Radiance in e/s.
inline HDRImage hdr_chart(int w, int h, double base = 2.0e3) {
  constexpr int kSuper = 4;
  auto shade = [&](double x, double y, int c) {
    const double u = x / w, v = y / h;
    double stops = 12.0 * u + 1.5 * std::sin(3.0 * v * std::numbers::pi);
    double f = base * std::exp2(stops);
    // Tinted disks.
    struct Disk {
      double cx, cy, r, gain;
    };
    const Disk disks[] = {{0.18, 0.30, 0.10, 6.0}, {0.45, 0.70, 0.12, 0.15}, {0.72, 0.28, 0.08, 4.0},
                          {0.88, 0.75, 0.07, 0.25}};
    for (const auto& d : disks) {
      const double dx = (u - d.cx) * w, dy = (v - d.cy) * h;
      if (dx * dx + dy * dy < (d.r * h) * (d.r * h)) f *= d.gain * (c == 0 ? 1.2 : c == 2 ? 0.8 : 1.0);
    }
    // Vertical bars of period 8 px in a band.
    if (v > 0.05 && v < 0.18 && u > 0.30 && u < 0.62 && std::fmod(x, 8.0) < 4.0) f *= 3.0;
    // Radial spokes.
    const double sx = x - 0.60 * w, sy = y - 0.50 * h;
    const double rr = std::hypot(sx, sy);
    if (rr < 0.16 * h && rr > 2.0 && std::sin(12.0 * std::atan2(sy, sx)) > 0.0) f *= 0.3;
    // Highlights.
    const double hx = x - 0.95 * w, hy = y - 0.12 * h;
    if (hx * hx + hy * hy < 9.0) f *= 20.0;
    const double channel_tint[3] = {1.0, 1.1, 0.85};
    return f * channel_tint[c];
  };
  HDRImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = 0; j < kSuper; ++j)
          for (int i = 0; i < kSuper; ++i)
            acc += shade(x - 0.5 + (i + 0.5) / kSuper, y - 0.5 + (j + 0.5) / kSuper, c);
        img.planes[static_cast<std::size_t>(c)](x, y) = acc / (kSuper * kSuper);
      }
    }
  }
  return img;
}

/// Sensor spec with the given scaling; saturation at full scale of `bit_depth`.
inline SensorSpec make_sensor(int id, int w, int h, double gain, double readout_variance, double exposure_time,
                              double scaling, int bit_depth = 12, Affine2 transform = {}, double bias = 0.0) {
  SensorSpec s;
  s.config.id = id;
  s.config.exposure_time = exposure_time;
  s.config.gain = gain;
  s.config.exposure_scaling = scaling;
  s.config.bit_depth = bit_depth;
  s.config.saturation_level = static_cast<double>((1u << bit_depth) - 1u);
  s.config.transform = transform;
  s.noise.bias_dv = bias;
  s.noise.readout_variance_dv2 = readout_variance;
  s.width = w;
  s.height = h;
  return s;
}

/// All samples of a simulated rig, using the true calibration.
inline std::vector<RadianceSample> rig_samples(const SimulationResult& sim) {
  std::vector<RadianceSample> out;
  for (std::size_t s = 0; s < sim.frames.size(); ++s) {
    auto part = frame_to_samples(sim.frames[s], sim.configs[s], sim.calibrations[s]);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

/// FNV-1a over the bit patterns of all planes.
inline std::uint64_t image_hash(const HDRImage& img) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xFFu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(img.width));
  mix(static_cast<std::uint64_t>(img.height));
  for (const auto& p : img.planes)
    for (double v : p.data) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

/// Irregular positions: jittered samples in a disk of radius `r` about the origin.
inline std::vector<Point2> irregular_positions(std::mt19937_64& rng, int n, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<Point2> out;
  while (static_cast<int>(out.size()) < n) {
    Point2 p{u(rng), u(rng)};
    if (p.x * p.x + p.y * p.y <= r * r) out.push_back(p);
  }
  return out;
}

}  // namespace hdrlpa::testing
