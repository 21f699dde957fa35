// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conventional pipelines for comparison: bilinear demosaicing, fusion after
// demosaicing (tent weights) and fusion before demosaicing (inverse-variance
// weights, aligned rigs only).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/image.hpp"
#include "hdrlpa/lpa.hpp"
#include "hdrlpa/radiometry.hpp"

namespace hdrlpa {

namespace detail {

/// Mirror without repeating the edge sample (-1 -> 1, n -> n - 2); keeps Bayer phase.
inline int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

inline double finite_mean(std::initializer_list<double> taps) noexcept {
  double sum = 0.0;
  int n = 0;
  for (double t : taps) {
    if (std::isfinite(t)) {
      sum += t;
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Bilinear demosaic of a real-valued mosaic. Missing values average the
/// nearest same-channel taps (2 or 4); borders mirror; non-finite taps are
/// skipped.
inline HDRImage debayer_bilinear(const Plane<double>& mosaic, BayerPattern pattern) {
  const int w = mosaic.width, h = mosaic.height;
  HDRImage out(w, h);
  auto at = [&](int x, int y) { return mosaic(detail::reflect101(x, w), detail::reflect101(y, h)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto site = channel_at(pattern, x, y);
      for (auto c : kAllChannels) {
        double v;
        if (c == site) {
          v = mosaic(x, y);
        } else if (c == ColorChannel::G) {
          v = detail::finite_mean({at(x - 1, y), at(x + 1, y), at(x, y - 1), at(x, y + 1)});
        } else if (site == ColorChannel::G) {
          v = channel_at(pattern, x + 1, y) == c ? detail::finite_mean({at(x - 1, y), at(x + 1, y)})
                                                 : detail::finite_mean({at(x, y - 1), at(x, y + 1)});
        } else {
          v = detail::finite_mean({at(x - 1, y - 1), at(x + 1, y - 1), at(x - 1, y + 1), at(x + 1, y + 1)});
        }
        out.at(c, x, y) = v;
      }
    }
  }
  return out;
}

inline HDRImage debayer_bilinear(const CFAImage& img) {
  Plane<double> mosaic(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) mosaic.data[i] = img.data[i];
  return debayer_bilinear(mosaic, img.pattern);
}

/// Tent weight min(y - black, sat - y), clamped at 0.
inline double tent_weight(double y, double black, double saturation) noexcept {
  return std::max(0.0, std::min(y - black, saturation - y));
}

/// Demosaic each sensor's radiance mosaic, resample to the output grid
/// through T_s⁻¹ (bilinear), and average with tent weights. The weight of a
/// sensor at a point is the smallest tent weight over the 3x3 demosaic
/// stencil around the nearest native pixel, so clipped samples that fed the
/// interpolation are rejected.
inline HDRImage fuse_debayer_first(std::span<const CFAImage> frames, std::span<const SensorConfig> configs,
                                   std::span<const NoiseCalibration> cals, const OutputGrid& grid) {
  if (frames.size() != configs.size() || frames.size() != cals.size() || frames.empty())
    throw ShapeError("frames, configs and calibrations must have one entry per sensor");
  HDRImage acc(grid.width, grid.height, 0.0);
  Plane<double> wsum(grid.width, grid.height, 0.0);
  for (std::size_t s = 0; s < frames.size(); ++s) {
    const auto& img = frames[s];
    const auto& cfg = configs[s];
    const auto rf = convert_frame(img, cfg, cals[s]);
    const auto planes = debayer_bilinear(rf.value, cfg.pattern);
    const int w = img.width, h = img.height;
    Plane<double> tent(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double t = std::numeric_limits<double>::infinity();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = detail::reflect101(x + dx, w), yy = detail::reflect101(y + dy, h);
            const auto i = img.index(xx, yy);
            const double tw = rf.excluded.data[i] ? 0.0
                                                  : tent_weight(img.data[i], cals[s].bias.data[i] + cfg.black_level_epsilon,
                                                                cfg.saturation_level);
            t = std::min(t, tw);
          }
        }
        tent(x, y) = t;
      }
    }
    const auto inv = cfg.transform.inverse();
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        const auto p = inv(grid.center(x, y));
        if (!(p.x >= -0.5 && p.y >= -0.5 && p.x <= w - 0.5 && p.y <= h - 0.5)) continue;
        const int nx = std::clamp(static_cast<int>(std::lround(p.x)), 0, w - 1);
        const int ny = std::clamp(static_cast<int>(std::lround(p.y)), 0, h - 1);
        const double weight = tent(nx, ny);
        if (!(weight > 0.0)) continue;
        const double u = std::clamp(p.x, 0.0, w - 1.0), v = std::clamp(p.y, 0.0, h - 1.0);
        const int x0 = std::min(static_cast<int>(u), w - 1), y0 = std::min(static_cast<int>(v), h - 1);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double fx = u - x0, fy = v - y0;
        for (auto c : kAllChannels) {
          const auto& pl = planes.plane(c);
          const double top = pl(x0, y0) + fx * (pl(x1, y0) - pl(x0, y0));
          const double bot = pl(x0, y1) + fx * (pl(x1, y1) - pl(x0, y1));
          acc.at(c, x, y) += weight * (top + fy * (bot - top));
        }
        wsum(x, y) += weight;
      }
    }
  }
  for (auto c : kAllChannels) {
    auto& pl = acc.plane(c);
    for (std::size_t i = 0; i < pl.data.size(); ++i)
      pl.data[i] = wsum.data[i] > 0.0 ? pl.data[i] / wsum.data[i] : std::numeric_limits<double>::quiet_NaN();
  }
  return acc;
}

/// Integer offset of a sensor whose transform is a pure integer translation.
inline bool integer_translation(const Affine2& T, int& tx, int& ty) noexcept {
  if (!T.is_pure_translation(1e-9)) return false;
  const double rx = std::round(T.m[2]), ry = std::round(T.m[5]);
  if (std::abs(T.m[2] - rx) > 1e-9 || std::abs(T.m[5] - ry) > 1e-9) return false;
  tx = static_cast<int>(rx);
  ty = static_cast<int>(ry);
  return true;
}

/// Inverse-variance fusion of co-sited CFA samples, then bilinear demosaic.
/// The output covers virtual pixels [0, width) x [0, height). Every sensor
/// must map onto that lattice by an integer translation that preserves the
/// Bayer phase; anything else throws AlignmentError.
inline HDRImage fuse_debayer_last(std::span<const CFAImage> frames, std::span<const SensorConfig> configs,
                                  std::span<const NoiseCalibration> cals, int width, int height) {
  if (frames.size() != configs.size() || frames.size() != cals.size() || frames.empty())
    throw ShapeError("frames, configs and calibrations must have one entry per sensor");
  std::vector<std::array<int, 2>> offsets(frames.size());
  for (std::size_t s = 0; s < frames.size(); ++s) {
    if (!integer_translation(configs[s].transform, offsets[s][0], offsets[s][1]))
      throw AlignmentError("baseline requires alignment: sensor " + std::to_string(configs[s].id) +
                           " is not related to the output grid by an integer translation");
  }
  // Virtual mosaic phase follows the first sensor.
  const auto ref_pattern = configs[0].pattern;
  auto virtual_channel = [&](int X, int Y) { return channel_at(ref_pattern, X - offsets[0][0], Y - offsets[0][1]); };
  for (std::size_t s = 1; s < frames.size(); ++s) {
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x)
        if (channel_at(configs[s].pattern, x, y) != virtual_channel(x + offsets[s][0], y + offsets[s][1]))
          throw AlignmentError("baseline requires alignment: Bayer phases of sensors do not coincide");
  }

  std::vector<RadianceFrame> rfs;
  rfs.reserve(frames.size());
  for (std::size_t s = 0; s < frames.size(); ++s) rfs.push_back(convert_frame(frames[s], configs[s], cals[s]));

  Plane<double> fused(width, height, std::numeric_limits<double>::quiet_NaN());
  for (int Y = 0; Y < height; ++Y) {
    for (int X = 0; X < width; ++X) {
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < frames.size(); ++s) {
        const int x = X - offsets[s][0], y = Y - offsets[s][1];
        if (x < 0 || y < 0 || x >= frames[s].width || y >= frames[s].height) continue;
        const auto i = frames[s].index(x, y);
        if (rfs[s].excluded.data[i]) continue;
        const double w = 1.0 / rfs[s].variance.data[i];
        num += w * rfs[s].value.data[i];
        den += w;
      }
      if (den > 0.0) fused(X, Y) = num / den;
    }
  }
  // Demosaic on the virtual lattice: shift so that (0, 0) has the reference phase.
  const auto phase_x = ((offsets[0][0] % 2) + 2) % 2, phase_y = ((offsets[0][1] % 2) + 2) % 2;
  BayerPattern virtual_pattern = ref_pattern;
  for (auto p : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
    bool match = true;
    for (int y = 0; y < 2 && match; ++y)
      for (int x = 0; x < 2 && match; ++x) match = channel_at(p, x, y) == channel_at(ref_pattern, x - phase_x, y - phase_y);
    if (match) virtual_pattern = p;
  }
  return debayer_bilinear(fused, virtual_pattern);
}

}  // namespace hdrlpa
