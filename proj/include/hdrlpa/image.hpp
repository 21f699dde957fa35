// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdrlpa/errors.hpp"

namespace hdrlpa {

enum class ColorChannel : std::uint8_t { R = 0, G = 1, B = 2 };

inline constexpr std::array<ColorChannel, 3> kAllChannels{ColorChannel::R, ColorChannel::G,
                                                          ColorChannel::B};

constexpr std::size_t channel_index(ColorChannel c) noexcept { return static_cast<std::size_t>(c); }

constexpr char channel_name(ColorChannel c) noexcept {
  switch (c) {
    case ColorChannel::R: return 'R';
    case ColorChannel::G: return 'G';
    case ColorChannel::B: return 'B';
  }
  return '?';
}

/// Phase of the 2x2 Bayer tile, named by reading the tile row-major from (0, 0).
enum class BayerPattern : std::uint8_t { RGGB, BGGR, GRBG, GBRG };

/// Color sampled at sensor pixel (x, y). The tiling is 2-periodic in both axes.
constexpr ColorChannel channel_at(BayerPattern pattern, std::int64_t x, std::int64_t y) noexcept {
  using C = ColorChannel;
  // Tiles listed as {(0,0), (1,0), (0,1), (1,1)}.
  constexpr C kTiles[4][4] = {
      {C::R, C::G, C::G, C::B},  // RGGB
      {C::B, C::G, C::G, C::R},  // BGGR
      {C::G, C::R, C::B, C::G},  // GRBG
      {C::G, C::B, C::R, C::G},  // GBRG
  };
  const auto px = static_cast<int>(x & 1);
  const auto py = static_cast<int>(y & 1);
  return kTiles[static_cast<int>(pattern)][py * 2 + px];
}

inline std::string_view to_string(BayerPattern p) noexcept {
  switch (p) {
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "RGGB";
}

inline std::optional<BayerPattern> parse_bayer_pattern(std::string_view s) noexcept {
  for (auto p : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

/// Dense single-channel raster, row-major.
template <class T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int w, int h, T fill = T{}) : width(w), height(h), data(checked_size(w, h), fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  T& operator()(int x, int y) noexcept { return data[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data[index(x, y)]; }
  bool same_shape(int w, int h) const noexcept { return width == w && height == h; }
  template <class U>
  bool same_shape(const Plane<U>& o) const noexcept {
    return width == o.width && height == o.height;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw ShapeError("negative plane dimensions");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// Real-valued single plane: bias (DV), readout variance (DV^2), non-uniformity.
using FloatFrame = Plane<double>;
using Mask = Plane<std::uint8_t>;

/// One sensor's raw mosaiced frame.
struct CFAImage {
  int width = 0;
  int height = 0;
  int bit_depth = 16;
  BayerPattern pattern = BayerPattern::RGGB;
  std::vector<std::uint16_t> data;

  CFAImage() = default;
  CFAImage(int w, int h, int bits, BayerPattern p, std::uint16_t fill = 0)
      : width(w), height(h), bit_depth(bits), pattern(p),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 0 || h < 0) throw ShapeError("negative image dimensions");
    if (bits < 8 || bits > 16) throw ConfigError("bit depth must be in [8, 16]");
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  std::uint16_t& operator()(int x, int y) noexcept { return data[index(x, y)]; }
  std::uint16_t operator()(int x, int y) const noexcept { return data[index(x, y)]; }
  ColorChannel channel(int x, int y) const noexcept { return channel_at(pattern, x, y); }
  std::uint32_t max_value() const noexcept { return (1u << bit_depth) - 1u; }

  /// Throws if the data length or any value breaks the container invariants.
  void validate() const {
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw ShapeError("CFA data length does not match width x height");
    const auto maxv = max_value();
    for (auto v : data) {
      if (v > maxv) throw InputError("CFA value exceeds 2^bit_depth - 1");
    }
  }

  friend bool operator==(const CFAImage&, const CFAImage&) = default;
};

/// Reconstructed RGB radiance (electrons/second). NaN marks "no data".
struct HDRImage {
  int width = 0;
  int height = 0;
  std::array<Plane<double>, 3> planes;

  HDRImage() = default;
  HDRImage(int w, int h, double fill = 0.0)
      : width(w), height(h), planes{Plane<double>(w, h, fill), Plane<double>(w, h, fill),
                                    Plane<double>(w, h, fill)} {}

  Plane<double>& plane(ColorChannel c) noexcept { return planes[channel_index(c)]; }
  const Plane<double>& plane(ColorChannel c) const noexcept { return planes[channel_index(c)]; }
  double& at(ColorChannel c, int x, int y) noexcept { return plane(c)(x, y); }
  double at(ColorChannel c, int x, int y) const noexcept { return plane(c)(x, y); }

  std::size_t nan_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : planes)
      for (double v : p.data) n += std::isnan(v) ? 1 : 0;
    return n;
  }

  friend bool operator==(const HDRImage&, const HDRImage&) = default;
};

/// Bitwise equality, treating NaNs with equal payloads as equal.
inline bool bit_identical(const HDRImage& a, const HDRImage& b) noexcept {
  if (a.width != b.width || a.height != b.height) return false;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& pa = a.planes[c].data;
    const auto& pb = b.planes[c].data;
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(pa[i]) != std::bit_cast<std::uint64_t>(pb[i])) return false;
    }
  }
  return true;
}

}  // namespace hdrlpa
