// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011). A draw is
// a pure function of (key, counter), so simulated frames do not depend on
// thread scheduling.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hdrlpa {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Sequential stream of variates for one (seed, stream, item) triple; the
/// fourth counter word advances with every block of four 32-bit outputs.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t item) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(item), static_cast<std::uint32_t>(item >> 32), stream, 0u} {}

  std::uint32_t next_u32() noexcept {
    if (used_ == 4) {
      block_ = Philox4x32::generate(ctr_, key_);
      ++ctr_[3];
      used_ = 0;
    }
    return block_[used_++];
  }

  /// Uniform in (0, 1) with 53 random bits.
  double uniform() noexcept {
    const std::uint64_t a = next_u32() >> 5;  // 27 bits
    const std::uint64_t b = next_u32() >> 6;  // 26 bits
    return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one variate per call; the pair's
  /// second half is cached).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Poisson(mean). Exact inversion below 10, Hörmann's PTRS transformed
  /// rejection up to `normal_above`, moment-matched normal beyond it.
  std::int64_t poisson(double mean, double normal_above = 1000.0) noexcept {
    if (!(mean > 0.0)) return 0;
    if (mean > normal_above) {
      const double v = std::floor(mean + std::sqrt(mean) * normal() + 0.5);
      return v < 0.0 ? 0 : static_cast<std::int64_t>(v);
    }
    if (mean < 10.0) {
      // Sequential inversion of the CDF.
      double u = uniform();
      std::int64_t k = 0;
      double p = std::exp(-mean);
      double cdf = p;
      while (u > cdf && k < 1000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
      }
      return k;
    }
    // PTRS (Hörmann 1993).
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
          -mean + k * loglam - std::lgamma(k + 1.0))
        return static_cast<std::int64_t>(k);
    }
  }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hdrlpa
