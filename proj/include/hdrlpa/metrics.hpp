// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/image.hpp"

namespace hdrlpa {

namespace detail {

template <class PixelOp>
std::size_t for_each_masked(const HDRImage& a, const HDRImage& b, const Mask* mask, PixelOp&& op) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("metric inputs differ in dimensions");
  if (mask && !mask->same_shape(a.width, a.height)) throw ShapeError("mask differs in dimensions");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.planes[0].data.size(); ++i) {
    if (mask && !mask->data[i]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double va = a.planes[c].data[i], vb = b.planes[c].data[i];
      if (!std::isfinite(va) || !std::isfinite(vb)) continue;
      op(va, vb);
      ++n;
    }
  }
  return n;
}

}  // namespace detail

/// Peak signal-to-noise ratio in dB over masked finite pixels; peak is the
/// maximum of `b` there. Identical inputs give +infinity.
inline double psnr(const HDRImage& a, const HDRImage& b, const Mask* mask = nullptr) {
  double peak = -std::numeric_limits<double>::infinity();
  double se = 0.0;
  const auto n = detail::for_each_masked(a, b, mask, [&](double va, double vb) {
    peak = std::max(peak, vb);
    se += (va - vb) * (va - vb);
  });
  if (n == 0) throw InputError("empty mask: no finite pixels to compare");
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (se / static_cast<double>(n)));
}

/// RMSE of log2(1 + x) over masked finite pixels.
inline double rmse_log(const HDRImage& a, const HDRImage& b, const Mask* mask = nullptr) {
  double se = 0.0;
  const auto n = detail::for_each_masked(a, b, mask, [&](double va, double vb) {
    const double d = std::log2(1.0 + std::max(va, 0.0)) - std::log2(1.0 + std::max(vb, 0.0));
    se += d * d;
  });
  if (n == 0) throw InputError("empty mask: no finite pixels to compare");
  return std::sqrt(se / static_cast<double>(n));
}

/// Disjoint masks over the pixels where the reference is finite.
struct RegionMasks {
  Mask flat;
  Mask edge;
  Mask saturation_transition;
};

/// Edge: log2-luminance gradient above `edge_threshold` stops/px, dilated by
/// one pixel. Saturation transition: within `band` px of where the reference
/// luminance crosses `saturation_radiance`. Transition wins over edge, edge
/// over flat.
inline RegionMasks make_region_masks(const HDRImage& reference, double edge_threshold = 0.25,
                                     std::optional<double> saturation_radiance = std::nullopt, int band = 5) {
  const int w = reference.width, h = reference.height;
  Plane<double> lum(w, h);
  Mask valid(w, h, 0);
  for (std::size_t i = 0; i < lum.data.size(); ++i) {
    const double r = reference.planes[0].data[i], g = reference.planes[1].data[i], b = reference.planes[2].data[i];
    const double l = 0.25 * (r + 2.0 * g + b);
    lum.data[i] = l;
    valid.data[i] = std::isfinite(l) ? 1 : 0;
  }
  auto loglum = [&](int x, int y) {
    return std::log2(1.0 + std::max(0.0, lum(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1))));
  };
  Mask strong(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (loglum(x + 1, y) - loglum(x - 1, y));
      const double gy = 0.5 * (loglum(x, y + 1) - loglum(x, y - 1));
      strong(x, y) = std::hypot(gx, gy) > edge_threshold ? 1 : 0;
    }
  }
  Mask crossing(w, h, 0);
  if (saturation_radiance) {
    const double s = *saturation_radiance;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool above = lum(x, y) >= s;
        if ((x + 1 < w && (lum(x + 1, y) >= s) != above) || (y + 1 < h && (lum(x, y + 1) >= s) != above))
          crossing(x, y) = 1;
      }
    }
  }
  auto dilate = [&](const Mask& m, int r) {
    Mask out(w, h, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!m(x, y)) continue;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < w && yy < h) out(xx, yy) = 1;
          }
      }
    return out;
  };
  const auto edge = dilate(strong, 1);
  const auto trans = dilate(crossing, band);
  RegionMasks masks{Mask(w, h, 0), Mask(w, h, 0), Mask(w, h, 0)};
  for (std::size_t i = 0; i < valid.data.size(); ++i) {
    if (!valid.data[i]) continue;
    if (trans.data[i]) masks.saturation_transition.data[i] = 1;
    else if (edge.data[i]) masks.edge.data[i] = 1;
    else masks.flat.data[i] = 1;
  }
  return masks;
}

struct RegionScore {
  double psnr = 0.0;
  double rmse_log = 0.0;
  std::size_t pixels = 0;
};

struct MetricsReport {
  double psnr = 0.0;
  double rmse_log = 0.0;
  std::map<std::string, RegionScore> regions;
};

inline std::size_t count_set(const Mask& m) noexcept {
  std::size_t n = 0;
  for (auto v : m.data) n += v ? 1 : 0;
  return n;
}

/// Overall and per-region scores of `a` against reference `b`. Empty regions are omitted.
inline MetricsReport evaluate(const HDRImage& a, const HDRImage& b, const Mask* mask = nullptr,
                              const RegionMasks* regions = nullptr) {
  MetricsReport r;
  r.psnr = psnr(a, b, mask);
  r.rmse_log = rmse_log(a, b, mask);
  if (regions) {
    auto add = [&](const char* name, const Mask& m) {
      Mask combined = m;
      if (mask)
        for (std::size_t i = 0; i < combined.data.size(); ++i) combined.data[i] = combined.data[i] && mask->data[i];
      const auto n = count_set(combined);
      if (n == 0) return;
      try {
        r.regions[name] = {psnr(a, b, &combined), rmse_log(a, b, &combined), n};
      } catch (const InputError&) {
        // No finite pixel pairs in this region.
      }
    };
    add("flat", regions->flat);
    add("edge", regions->edge);
    add("saturation_transition", regions->saturation_transition);
  }
  return r;
}

}  // namespace hdrlpa
