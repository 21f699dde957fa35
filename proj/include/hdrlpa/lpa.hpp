// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Local polynomial approximation (LPA) of irregular, heteroscedastic radiance
// samples. Every output pixel fits a polynomial of order M <= 2 to the nearby
// samples of one color channel by weighted least squares and reads off the
// constant term (radiance) and, for M >= 1, the linear terms (gradient).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/geometry.hpp"
#include "hdrlpa/image.hpp"
#include "hdrlpa/parallel.hpp"
#include "hdrlpa/radiometry.hpp"

namespace hdrlpa {

/// How a sample's noise level enters its least-squares weight.
enum class WeightConvention : std::uint8_t {
  InverseVariance,  ///< W_H / σ̂², the Gaussian-likelihood weight (default)
  InverseSigma,     ///< W_H / σ̂, the literal printed form, kept for comparison
};

struct ReconstructionParams {
  int order = 1;                  ///< polynomial order M in {0, 1, 2}
  double h = 0.7;                 ///< scale for R and B, px^2
  bool per_channel_scale = true;  ///< use h_G = h / sqrt(2) for green
  double max_support_radius = 8.0;
  double condition_threshold = 1e8;
  WeightConvention weights = WeightConvention::InverseVariance;
  int threads = 0;  ///< 0 selects default_thread_count()

  void validate() const {
    if (order < 0 || order > 2) throw ConfigError("polynomial order must be 0, 1 or 2");
    if (!(h > 0.0)) throw ConfigError("scale h must be > 0");
    if (!(max_support_radius >= std::sqrt(h))) throw ConfigError("max_support_radius must be >= sqrt(h)");
    if (!(condition_threshold > 1.0)) throw ConfigError("condition_threshold must be > 1");
  }

  double scale_for(ColorChannel c) const noexcept {
    return per_channel_scale && c == ColorChannel::G ? h / std::numbers::sqrt2 : h;
  }
};

/// Symmetric positive-definite 2x2 matrix [[xx, xy], [xy, yy]] shaping the window.
struct SmoothingMatrix {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  static SmoothingMatrix isotropic(double h) noexcept { return {h, 0.0, h}; }

  double det() const noexcept { return xx * yy - xy * xy; }
  bool is_spd() const noexcept { return xx > 0.0 && det() > 0.0; }

  SmoothingMatrix inverse() const {
    const double d = det();
    if (!(d > 0.0) || !(xx > 0.0)) throw NumericError("smoothing matrix is not positive definite");
    return {yy / d, -xy / d, xx / d};
  }

  double max_eigenvalue() const noexcept {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return m + r;
  }

  SmoothingMatrix scaled(double s) const noexcept { return {xx * s, xy * s, yy * s}; }
};

constexpr int coefficient_count(int order) noexcept { return (order + 1) * (order + 2) / 2; }

/// Taylor basis at offset (dx, dy): [1, dx, dy, dx^2, dx dy, dy^2], truncated to order M.
struct BasisRow {
  std::array<double, 6> values{};
  int size = 0;

  std::span<const double> span() const noexcept { return {values.data(), static_cast<std::size_t>(size)}; }
  double operator[](int k) const noexcept { return values[static_cast<std::size_t>(k)]; }
};

inline BasisRow basis_row(double dx, double dy, int order) {
  if (order < 0 || order > 2) throw ConfigError("unsupported polynomial order " + std::to_string(order));
  BasisRow row;
  row.size = coefficient_count(order);
  row.values[0] = 1.0;
  if (order >= 1) {
    row.values[1] = dx;
    row.values[2] = dy;
  }
  if (order >= 2) {
    row.values[3] = dx * dx;
    row.values[4] = dx * dy;
    row.values[5] = dy * dy;
  }
  return row;
}

/// Gaussian window 1/(2π det H) · exp(-Δᵀ H⁻¹ Δ), with no 1/2 in the exponent.
inline double window_weight(double dx, double dy, const SmoothingMatrix& H) {
  const auto inv = H.inverse();
  const double q = dx * (inv.xx * dx + inv.xy * dy) + dy * (inv.xy * dx + inv.yy * dy);
  return std::exp(-q) / (2.0 * std::numbers::pi * H.det());
}

/// Fitted coefficients at the window center.
struct PolyFit {
  int order = 0;
  std::array<double, 6> coefficients{};

  double radiance() const noexcept { return coefficients[0]; }
  Point2 gradient() const noexcept {
    if (order < 1) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return {coefficients[1], coefficients[2]};
  }
  std::span<const double> span() const noexcept {
    return {coefficients.data(), static_cast<std::size_t>(coefficient_count(order))};
  }
};

struct FitOptions {
  double condition_threshold = 1e8;
  WeightConvention weights = WeightConvention::InverseVariance;
};

enum class FitStatus : std::uint8_t { Ok, TooFewSamples, RankDeficient };

struct FitResult {
  FitStatus status = FitStatus::TooFewSamples;
  PolyFit fit;
  double condition = std::numeric_limits<double>::infinity();  ///< pivot-ratio estimate
  int samples = 0;                                             ///< samples with non-zero weight

  bool ok() const noexcept { return status == FitStatus::Ok; }
  explicit operator bool() const noexcept { return ok(); }
};

/// Accumulates ΦᵀWΦ and ΦᵀW f̄ for one window and solves them.
class NormalEquations {
 public:
  NormalEquations(int order, Point2 center, const SmoothingMatrix& H, const FitOptions& opts)
      : order_(order), n_(coefficient_count(order)), center_(center), opts_(opts) {
    if (order < 0 || order > 2) throw ConfigError("unsupported polynomial order " + std::to_string(order));
    const auto inv = H.inverse();
    ixx_ = inv.xx;
    ixy_ = inv.xy;
    iyy_ = inv.yy;
    norm_ = 1.0 / (2.0 * std::numbers::pi * H.det());
  }

  void add(const RadianceSample& s) noexcept {
    const double dx = s.x - center_.x;
    const double dy = s.y - center_.y;
    const double q = dx * (ixx_ * dx + ixy_ * dy) + dy * (ixy_ * dx + iyy_ * dy);
    const double window = std::exp(-q) * norm_;
    const double noise = opts_.weights == WeightConvention::InverseVariance ? s.sigma * s.sigma : s.sigma;
    const double w = window / noise;
    if (!(w > 0.0)) return;
    ++count_;
    double phi[6] = {1.0, dx, dy, dx * dx, dx * dy, dy * dy};
    for (int r = 0; r < n_; ++r) {
      const double wr = w * phi[r];
      rhs_[r] += wr * s.value;
      for (int c = r; c < n_; ++c) a_[r][c] += wr * phi[c];
    }
  }

  int samples() const noexcept { return count_; }

  FitResult solve() const {
    FitResult res;
    res.samples = count_;
    res.fit.order = order_;
    if (count_ < n_) return res;

    // Jacobi equilibration, then LDLᵀ on the unit-diagonal matrix. The pivot
    // ratio bounds the condition number from below and exposes rank loss.
    double d[6];
    for (int k = 0; k < n_; ++k) {
      if (!(a_[k][k] > 0.0)) {
        res.status = FitStatus::RankDeficient;
        return res;
      }
      d[k] = 1.0 / std::sqrt(a_[k][k]);
    }
    double m[6][6];
    double b[6];
    for (int r = 0; r < n_; ++r) {
      b[r] = rhs_[r] * d[r];
      for (int c = r; c < n_; ++c) m[r][c] = m[c][r] = a_[r][c] * d[r] * d[c];
    }
    double pivot_max = 0.0, pivot_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_; ++k) {
      double p = m[k][k];
      for (int j = 0; j < k; ++j) p -= m[k][j] * m[k][j] * m[j][j];
      if (!(p > 0.0) || !std::isfinite(p)) {
        res.status = FitStatus::RankDeficient;
        return res;
      }
      m[k][k] = p;
      for (int i = k + 1; i < n_; ++i) {
        double v = m[i][k];
        for (int j = 0; j < k; ++j) v -= m[i][j] * m[k][j] * m[j][j];
        m[i][k] = v / p;
      }
      pivot_max = std::max(pivot_max, p);
      pivot_min = std::min(pivot_min, p);
    }
    res.condition = pivot_max / pivot_min;
    if (!(res.condition <= opts_.condition_threshold)) {
      res.status = FitStatus::RankDeficient;
      return res;
    }
    // L z = b, D y = z, Lᵀ x = y.
    double z[6] = {};
    for (int i = 0; i < n_; ++i) {
      double v = b[i];
      for (int j = 0; j < i; ++j) v -= m[i][j] * z[j];
      z[i] = v;
    }
    for (int i = 0; i < n_; ++i) z[i] /= m[i][i];
    for (int i = n_ - 1; i >= 0; --i) {
      double v = z[i];
      for (int j = i + 1; j < n_; ++j) v -= m[j][i] * z[j];
      z[i] = v;
    }
    for (int k = 0; k < n_; ++k) res.fit.coefficients[static_cast<std::size_t>(k)] = z[k] * d[k];
    res.status = FitStatus::Ok;
    return res;
  }

 private:
  int order_;
  int n_;
  Point2 center_;
  FitOptions opts_;
  double ixx_, ixy_, iyy_, norm_;
  int count_ = 0;
  double a_[6][6] = {};
  double rhs_[6] = {};
};

/// Weighted least-squares fit (ΦᵀWΦ)⁻¹ΦᵀW f̄ of a neighborhood around `center`.
/// Returns a non-ok status instead of a fit when the normal matrix is
/// rank-deficient, ill-conditioned, or has fewer samples than coefficients.
inline FitResult wls_fit(std::span<const RadianceSample> neighborhood, Point2 center, int order,
                         const SmoothingMatrix& H, const FitOptions& opts = {}) {
  NormalEquations eq(order, center, H, opts);
  for (const auto& s : neighborhood) eq.add(s);
  return eq.solve();
}

/// Bucketed spatial index over samples from every sensor, one grid per channel.
/// Iteration order inside a query is fixed by the build, which keeps every
/// per-pixel fit deterministic.
class SampleIndex {
 public:
  SampleIndex() = default;
  explicit SampleIndex(std::span<const RadianceSample> samples, double cell_size = 2.0) {
    build(samples, cell_size);
  }

  std::size_t size(ColorChannel c) const noexcept { return grids_[channel_index(c)].samples.size(); }
  std::size_t size() const noexcept { return size(ColorChannel::R) + size(ColorChannel::G) + size(ColorChannel::B); }

  template <class Visitor>
  void for_each_within(ColorChannel c, Point2 center, double radius, Visitor&& visit) const {
    const auto& g = grids_[channel_index(c)];
    if (g.samples.empty() || !(radius >= 0.0)) return;
    const int cx0 = std::max(0, g.cell_of(center.x - radius, g.x0, g.nx));
    const int cx1 = std::min(g.nx - 1, g.cell_of(center.x + radius, g.x0, g.nx));
    const int cy0 = std::max(0, g.cell_of(center.y - radius, g.y0, g.ny));
    const int cy1 = std::min(g.ny - 1, g.cell_of(center.y + radius, g.y0, g.ny));
    const double r2 = radius * radius;
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        const auto cell = static_cast<std::size_t>(cy) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(cx);
        for (auto k = g.start[cell]; k < g.start[cell + 1]; ++k) {
          const auto& s = g.samples[k];
          const double dx = s.x - center.x, dy = s.y - center.y;
          if (dx * dx + dy * dy <= r2) visit(s);
        }
      }
    }
  }

 private:
  struct Grid {
    double x0 = 0.0, y0 = 0.0, inv_cell = 1.0;
    int nx = 0, ny = 0;
    std::vector<std::size_t> start;
    std::vector<RadianceSample> samples;

    int cell_of(double v, double origin, int n) const noexcept {
      const double c = std::floor((v - origin) * inv_cell);
      if (c < 0.0) return -1;
      if (c >= static_cast<double>(n)) return n;
      return static_cast<int>(c);
    }
  };

  void build(std::span<const RadianceSample> samples, double cell_size) {
    if (!(cell_size > 0.0)) throw ConfigError("cell size must be > 0");
    for (auto c : kAllChannels) {
      Grid& g = grids_[channel_index(c)];
      double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
      double xmax = -xmin, ymax = -xmin;
      std::size_t n = 0;
      for (const auto& s : samples) {
        if (s.channel != c) continue;
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw NumericError("sample position is not finite");
        xmin = std::min(xmin, s.x);
        xmax = std::max(xmax, s.x);
        ymin = std::min(ymin, s.y);
        ymax = std::max(ymax, s.y);
        ++n;
      }
      if (n == 0) continue;
      g.x0 = xmin;
      g.y0 = ymin;
      g.inv_cell = 1.0 / cell_size;
      g.nx = static_cast<int>(std::floor((xmax - xmin) * g.inv_cell)) + 1;
      g.ny = static_cast<int>(std::floor((ymax - ymin) * g.inv_cell)) + 1;
      const auto cells = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);
      std::vector<std::size_t> cell_id;
      cell_id.reserve(n);
      g.start.assign(cells + 1, 0);
      for (const auto& s : samples) {
        if (s.channel != c) continue;
        const auto cx = std::min(g.nx - 1, g.cell_of(s.x, g.x0, g.nx));
        const auto cy = std::min(g.ny - 1, g.cell_of(s.y, g.y0, g.ny));
        const auto id = static_cast<std::size_t>(cy) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(cx);
        cell_id.push_back(id);
        ++g.start[id + 1];
      }
      for (std::size_t k = 0; k < cells; ++k) g.start[k + 1] += g.start[k];
      g.samples.resize(n);
      std::vector<std::size_t> fill(g.start.begin(), g.start.end() - 1);
      std::size_t j = 0;
      for (const auto& s : samples) {
        if (s.channel != c) continue;
        g.samples[fill[cell_id[j++]]++] = s;
      }
    }
  }

  std::array<Grid, 3> grids_;
};

/// Every sample of `channel` within `radius` of `center`, from all sensors.
inline std::vector<RadianceSample> gather(const SampleIndex& index, Point2 center, double radius, ColorChannel channel) {
  std::vector<RadianceSample> out;
  index.for_each_within(channel, center, radius, [&](const RadianceSample& s) { out.push_back(s); });
  return out;
}

/// Output lattice. Pixel (i, j) sits at to_virtual(i, j) in sample coordinates.
struct OutputGrid {
  int width = 0;
  int height = 0;
  Affine2 to_virtual;

  Point2 center(int x, int y) const noexcept { return to_virtual.apply(x, y); }

  /// Grid of `width` x `height` covering the same area as a `ref_w` x `ref_h`
  /// virtual frame, pixel areas aligned.
  static OutputGrid resampled(int width, int height, int ref_w, int ref_h) {
    if (width <= 0 || height <= 0) throw ConfigError("output dimensions must be positive");
    const double sx = static_cast<double>(ref_w) / width;
    const double sy = static_cast<double>(ref_h) / height;
    return {width, height, Affine2{{sx, 0.0, 0.5 * sx - 0.5, 0.0, sy, 0.5 * sy - 0.5}}};
  }
};

/// One pixel's outcome after the radius/order fallback sequence.
struct PixelFit {
  double value = std::numeric_limits<double>::quiet_NaN();
  Point2 gradient{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  int order = -1;  ///< order actually used; -1 when no fit was possible
  double radius = 0.0;
};

/// Fits one pixel. The support starts at 3·sqrt(λ_max(H)); on rank deficiency
/// it grows by 1.5x up to max_support_radius, then the order drops by one and
/// the radius sequence restarts, down to `min_order`. With min_order = 0 only
/// an empty support yields NaN.
inline PixelFit fit_pixel(const SampleIndex& index, ColorChannel channel, Point2 center, const SmoothingMatrix& H,
                          int order, double max_radius, const FitOptions& opts, int min_order = 0) {
  const double start = std::min(3.0 * std::sqrt(H.max_eigenvalue()), max_radius);
  for (int m = order; m >= min_order; --m) {
    double radius = start;
    for (;;) {
      NormalEquations eq(m, center, H, opts);
      index.for_each_within(channel, center, radius, [&](const RadianceSample& s) { eq.add(s); });
      const auto res = eq.solve();
      if (res.ok()) {
        PixelFit out;
        out.value = res.fit.radiance();
        out.gradient = res.fit.gradient();
        out.order = m;
        out.radius = radius;
        return out;
      }
      if (radius >= max_radius) break;
      radius = std::min(radius * 1.5, max_radius);
    }
  }
  return {};
}

struct ChannelReconstruction {
  Plane<double> value;
  Plane<double> grad_x;  ///< empty unless gradients were requested
  Plane<double> grad_y;
  Plane<std::int8_t> order_used;
};

/// Isotropic LPA (H = hI) of one channel over the output grid.
inline ChannelReconstruction reconstruct_channel(const SampleIndex& index, ColorChannel channel, const OutputGrid& grid,
                                                 const ReconstructionParams& params, bool want_gradients = false) {
  params.validate();
  const auto H = SmoothingMatrix::isotropic(params.scale_for(channel));
  const FitOptions opts{params.condition_threshold, params.weights};
  ChannelReconstruction out;
  out.value = Plane<double>(grid.width, grid.height, std::numeric_limits<double>::quiet_NaN());
  out.order_used = Plane<std::int8_t>(grid.width, grid.height, -1);
  if (want_gradients) {
    out.grad_x = Plane<double>(grid.width, grid.height, std::numeric_limits<double>::quiet_NaN());
    out.grad_y = out.grad_x;
  }
  parallel_for_rows(grid.height, params.threads, [&](int y) {
    for (int x = 0; x < grid.width; ++x) {
      const auto fit = fit_pixel(index, channel, grid.center(x, y), H, params.order, params.max_support_radius, opts);
      out.value(x, y) = fit.value;
      out.order_used(x, y) = static_cast<std::int8_t>(fit.order);
      if (want_gradients) {
        out.grad_x(x, y) = fit.gradient.x;
        out.grad_y(x, y) = fit.gradient.y;
      }
    }
  });
  return out;
}

/// Reconstructs R, G and B; green uses h/sqrt(2) when per_channel_scale is set.
inline HDRImage reconstruct_frame(const SampleIndex& index, const OutputGrid& grid, const ReconstructionParams& params) {
  HDRImage img;
  img.width = grid.width;
  img.height = grid.height;
  for (auto c : kAllChannels) img.plane(c) = reconstruct_channel(index, c, grid, params).value;
  return img;
}

inline HDRImage reconstruct_frame(std::span<const RadianceSample> samples, const OutputGrid& grid,
                                  const ReconstructionParams& params) {
  return reconstruct_frame(SampleIndex(samples), grid, params);
}

}  // namespace hdrlpa
