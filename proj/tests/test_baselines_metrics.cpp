// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"

using namespace hdrlpa;
using hdrlpa::testing::make_sensor;

namespace {

SensorConfig unit_config(int id = 0) {
  SensorConfig c;
  c.id = id;
  c.gain = 1.0;
  c.exposure_time = 1.0;
  c.bit_depth = 12;
  c.saturation_level = 4095.0;
  return c;
}

}  // namespace

TEST(DebayerBilinear, ConstantFrame) {
  CFAImage img(6, 4, 12, BayerPattern::GBRG, 777);
  const auto out = debayer_bilinear(img);
  for (const auto& p : out.planes)
    for (double v : p.data) EXPECT_EQ(v, 777.0);
}

TEST(DebayerBilinear, CornerGreenFromTwoNeighbors) {
  Plane<double> m(4, 4, 0.0);
  m(1, 0) = 10.0;  // G
  m(0, 1) = 30.0;  // G
  m(0, 0) = 5.0;   // R
  const auto out = debayer_bilinear(m, BayerPattern::RGGB);
  // Mirrored borders repeat each neighbor, so the 4-tap mean is the 2-tap mean.
  EXPECT_DOUBLE_EQ(out.at(ColorChannel::G, 0, 0), 20.0);
  EXPECT_DOUBLE_EQ(out.at(ColorChannel::R, 0, 0), 5.0);
}

TEST(DebayerBilinear, HorizontalRampReproducedInInterior) {
  Plane<double> m(10, 8, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 10; ++x) m(x, y) = 100.0 + 7.0 * x;
  const auto out = debayer_bilinear(m, BayerPattern::RGGB);
  for (auto c : kAllChannels)
    for (int y = 1; y < 7; ++y)
      for (int x = 1; x < 9; ++x) EXPECT_DOUBLE_EQ(out.at(c, x, y), 100.0 + 7.0 * x);
}

TEST(DebayerBilinear, SkipsNonFiniteTaps) {
  Plane<double> m(4, 4, 8.0);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto out = debayer_bilinear(m, BayerPattern::RGGB);
  EXPECT_EQ(out.at(ColorChannel::G, 0, 0), 8.0);
}

TEST(TentWeight, Shape) {
  EXPECT_EQ(tent_weight(0.0, 0.0, 4095.0), 0.0);
  EXPECT_EQ(tent_weight(100.0, 0.0, 4095.0), 100.0);
  EXPECT_EQ(tent_weight(4000.0, 0.0, 4095.0), 95.0);
  EXPECT_EQ(tent_weight(4095.0, 0.0, 4095.0), 0.0);
  EXPECT_EQ(tent_weight(10.0, 20.0, 4095.0), 0.0);
}

TEST(FuseDebayerFirst, SingleSensorEqualsItsRadiance) {
  const auto cfg = unit_config();
  CFAImage img(6, 6, 12, BayerPattern::RGGB, 1000);
  const auto cal = NoiseCalibration::uniform(6, 6, 0.0, 1.0);
  const std::vector<CFAImage> frames{img};
  const std::vector<SensorConfig> cfgs{cfg};
  const std::vector<NoiseCalibration> cals{cal};
  const auto out = fuse_debayer_first(frames, cfgs, cals, OutputGrid::resampled(6, 6, 6, 6));
  for (const auto& p : out.planes)
    for (double v : p.data) EXPECT_DOUBLE_EQ(v, 1000.0);
}

TEST(FuseDebayerFirst, SaturatedSensorGetsZeroWeight) {
  auto bright = unit_config(0);
  auto dark = unit_config(1);
  dark.exposure_scaling = 0.25;
  const std::vector<CFAImage> frames{CFAImage(6, 6, 12, BayerPattern::RGGB, 4095),
                                     CFAImage(6, 6, 12, BayerPattern::RGGB, 1500)};
  const std::vector<SensorConfig> cfgs{bright, dark};
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(6, 6, 0.0, 1.0),
                                           NoiseCalibration::uniform(6, 6, 0.0, 1.0)};
  const auto out = fuse_debayer_first(frames, cfgs, cals, OutputGrid::resampled(6, 6, 6, 6));
  for (const auto& p : out.planes)
    for (double v : p.data) EXPECT_DOUBLE_EQ(v, 6000.0);
}

TEST(FuseDebayerFirst, SymmetricPairIsArithmeticMean) {
  const std::vector<CFAImage> frames{CFAImage(6, 6, 12, BayerPattern::RGGB, 1000),
                                     CFAImage(6, 6, 12, BayerPattern::RGGB, 3095)};
  auto second = unit_config(1);
  second.exposure_time = 1.0;
  const std::vector<SensorConfig> cfgs{unit_config(0), second};
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(6, 6, 0.0, 1.0),
                                           NoiseCalibration::uniform(6, 6, 0.0, 1.0)};
  // Tent weights min(1000, 3095) = 1000 and min(3095, 1000) = 1000.
  const auto out = fuse_debayer_first(frames, cfgs, cals, OutputGrid::resampled(6, 6, 6, 6));
  EXPECT_DOUBLE_EQ(out.at(ColorChannel::G, 2, 3), 2047.5);
}

TEST(FuseDebayerFirst, AllZeroWeightsGiveNan) {
  const std::vector<CFAImage> frames{CFAImage(4, 4, 12, BayerPattern::RGGB, 4095)};
  const std::vector<SensorConfig> cfgs{unit_config()};
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(4, 4, 0.0, 1.0)};
  EXPECT_EQ(fuse_debayer_first(frames, cfgs, cals, OutputGrid::resampled(4, 4, 4, 4)).nan_count(), 48u);
}

TEST(FuseDebayerLast, EqualVariancesAverage) {
  const std::vector<CFAImage> frames{CFAImage(4, 4, 12, BayerPattern::RGGB, 1000),
                                     CFAImage(4, 4, 12, BayerPattern::RGGB, 2000)};
  const std::vector<SensorConfig> cfgs{unit_config(0), unit_config(1)};
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(4, 4, 0.0, 1e6),
                                           NoiseCalibration::uniform(4, 4, 1000.0, 1e6)};
  // Radiances 1000 and 1000 with shot terms 1000 and 1000: equal weights.
  for (const auto& p : fuse_debayer_last(frames, cfgs, cals, 4, 4).planes)
    for (double v : p.data) EXPECT_DOUBLE_EQ(v, 1000.0);
}

TEST(FuseDebayerLast, InverseVarianceRatio) {
  const std::vector<CFAImage> frames{CFAImage(4, 4, 12, BayerPattern::RGGB, 100),
                                     CFAImage(4, 4, 12, BayerPattern::RGGB, 200)};
  const std::vector<SensorConfig> cfgs{unit_config(0), unit_config(1)};
  // Shot noise is negligible next to readout variances 1e6 and 1e8.
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(4, 4, 0.0, 1e6),
                                           NoiseCalibration::uniform(4, 4, 0.0, 1e8)};
  const double w0 = 1.0 / (1e6 + 100.0), w1 = 1.0 / (1e8 + 200.0);
  EXPECT_NEAR(w1 / w0, 0.01, 1e-4);
  const double expect = (w0 * 100.0 + w1 * 200.0) / (w0 + w1);
  EXPECT_NEAR(fuse_debayer_last(frames, cfgs, cals, 4, 4).at(ColorChannel::R, 2, 2), expect, 1e-9);
}

TEST(FuseDebayerLast, RefusesMisalignedRigs) {
  const std::vector<CFAImage> frames{CFAImage(4, 4, 12, BayerPattern::RGGB, 100),
                                     CFAImage(4, 4, 12, BayerPattern::RGGB, 100)};
  const std::vector<NoiseCalibration> cals{NoiseCalibration::uniform(4, 4, 0.0, 1.0),
                                           NoiseCalibration::uniform(4, 4, 0.0, 1.0)};
  auto rotated = unit_config(1);
  rotated.transform = Affine2::rotation(degrees_to_radians(6.0), {1.5, 1.5});
  std::vector<SensorConfig> cfgs{unit_config(0), rotated};
  try {
    fuse_debayer_last(frames, cfgs, cals, 4, 4);
    FAIL() << "expected AlignmentError";
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("baseline requires alignment"), std::string::npos);
  }
  cfgs[1].transform = Affine2::translation(1.0, 0.0);  // breaks the Bayer phase
  EXPECT_THROW(fuse_debayer_last(frames, cfgs, cals, 4, 4), AlignmentError);
  cfgs[1].transform = Affine2::translation(2.0, 0.0);
  EXPECT_NO_THROW(fuse_debayer_last(frames, cfgs, cals, 4, 4));
}

TEST(Psnr, IdenticalAndConstantOffset) {
  const auto b = hdrlpa::testing::hdr_chart(20, 14);
  EXPECT_EQ(psnr(b, b), std::numeric_limits<double>::infinity());
  EXPECT_EQ(rmse_log(b, b), 0.0);
  double peak = 0.0;
  for (const auto& p : b.planes)
    for (double v : p.data) peak = std::max(peak, v);
  auto a = b;
  for (auto& p : a.planes)
    for (double& v : p.data) v += peak / 100.0;
  EXPECT_NEAR(psnr(a, b), 40.0, 1e-9);
}

TEST(Psnr, MaskAndShapeErrors) {
  HDRImage a(4, 4, 1.0), b(4, 4, 2.0);
  Mask none(4, 4, 0);
  EXPECT_THROW(psnr(a, b, &none), InputError);
  EXPECT_THROW(psnr(a, HDRImage(3, 4, 1.0)), ShapeError);
  Mask wrong(2, 2, 1);
  EXPECT_THROW(rmse_log(a, b, &wrong), ShapeError);
}

TEST(RmseLog, SymmetricUnderSwap) {
  const auto a = hdrlpa::testing::hdr_chart(20, 14);
  auto b = a;
  for (auto& p : b.planes)
    for (double& v : p.data) v *= 1.3;
  EXPECT_DOUBLE_EQ(rmse_log(a, b), rmse_log(b, a));
  EXPECT_GT(rmse_log(a, b), 0.0);
}

TEST(RegionMasks, PartitionTheValidArea) {
  auto ref = hdrlpa::testing::hdr_chart(64, 43);
  ref.at(ColorChannel::R, 3, 3) = std::numeric_limits<double>::quiet_NaN();
  const auto m = make_region_masks(ref, 0.25, 1.0e5);
  std::size_t edge = 0, trans = 0;
  for (std::size_t i = 0; i < m.flat.data.size(); ++i) {
    const int sum = m.flat.data[i] + m.edge.data[i] + m.saturation_transition.data[i];
    EXPECT_EQ(sum, i == 3 * 64 + 3 ? 0 : 1);
    edge += m.edge.data[i];
    trans += m.saturation_transition.data[i];
  }
  EXPECT_GT(edge, 0u);
  EXPECT_GT(trans, 0u);
}

TEST(Evaluate, ReportsRegions) {
  const auto b = hdrlpa::testing::hdr_chart(128, 96);
  auto a = b;
  a.at(ColorChannel::G, 5, 5) *= 1.1;
  const auto masks = make_region_masks(b);
  const auto r = evaluate(a, b, nullptr, &masks);
  EXPECT_TRUE(std::isfinite(r.psnr));
  EXPECT_TRUE(r.regions.count("flat"));
  EXPECT_FALSE(r.regions.count("saturation_transition"));
}

TEST(Ranking, LpaBeatsDebayerFirstOnEdgesOfAlignedCanonRig) {
  // Three aligned Canon 5D sensors with scalings 1, 2^-4 and 2^-8.
  constexpr int W = 256, H = 171;
  const auto gt = hdrlpa::testing::hdr_chart(W, H);
  RigSpec rig;
  rig.seed = 505;
  const double n[3] = {1.0, std::exp2(-4.0), std::exp2(-8.0)};
  for (int s = 0; s < 3; ++s)
    rig.sensors.push_back(make_sensor(s, W, H, kCanon5DGain, kCanon5DReadoutVariance, 0.01, n[s]));
  const auto sim = simulate_rig(gt, rig);
  const auto grid = OutputGrid::resampled(W, H, W, H);
  ReconstructionParams p;
  const auto lpa = reconstruct_frame(hdrlpa::testing::rig_samples(sim), grid, p);
  const auto dbf = fuse_debayer_first(sim.frames, sim.configs, sim.calibrations, grid);
  const auto masks = make_region_masks(gt);
  EXPECT_GT(psnr(lpa, gt, &masks.edge), psnr(dbf, gt, &masks.edge));
}
