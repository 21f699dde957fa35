// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hdrlpa/hdrlpa.hpp"

namespace fs = std::filesystem;
using namespace hdrlpa;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "schema_version": 1,
    "sensors": [
      {"id": 0, "width": 8, "height": 6, "exposure_time_s": 0.01, "gain_dv_per_e": 0.23, "bit_depth": 12,
       "noise_truth": {"bias_dv": 64, "readout_variance_dv2": 6.5}},
      {"id": 1, "width": 8, "height": 6, "exposure_time_s": 0.01, "gain_dv_per_e": 0.23, "bit_depth": 12,
       "exposure_scaling": 0.0625, "transform": [1, 0, 0.4, 0, 1, 0.45], "bayer_phase": "GRBG",
       "bias": 64, "readvar": 6.5}
    ],
    "reconstruction": {"order": 2, "h": 0.4, "calpa": true},
    "simulation": {"seed": 9, "zero_noise": true}
  })");
}

std::string config_error(const json& j) {
  try {
    parse_rig_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(RigConfig, ParsesMinimalConfig) {
  const auto cfg = parse_rig_config(minimal());
  ASSERT_EQ(cfg.sensors.size(), 2u);
  const auto& s1 = cfg.sensors[1].config;
  EXPECT_EQ(s1.saturation_level, 4095.0);
  EXPECT_EQ(s1.exposure_scaling, 0.0625);
  EXPECT_EQ(s1.transform, Affine2::translation(0.4, 0.45));
  EXPECT_EQ(s1.pattern, BayerPattern::GRBG);
  EXPECT_EQ(std::get<double>(cfg.sensors[1].bias), 64.0);
  EXPECT_EQ(cfg.reconstruction.order, 2);
  EXPECT_EQ(cfg.reconstruction.h, 0.4);
  EXPECT_TRUE(cfg.reconstruction.calpa);
  EXPECT_EQ(cfg.simulation.seed, 9u);
  EXPECT_TRUE(cfg.simulation.zero_noise);
  EXPECT_EQ(cfg.sensors[0].noise_truth->bias_dv, 64.0);
}

TEST(RigConfig, RejectsUnknownKeysWithTheirPath) {
  auto j = minimal();
  j["sensors"][1]["gain"] = 0.2;
  EXPECT_NE(config_error(j).find("sensors[1].gain: unknown key"), std::string::npos);
  j = minimal();
  j["extra"] = 1;
  EXPECT_NE(config_error(j).find("extra: unknown key"), std::string::npos);
  j = minimal();
  j["sensors"][0]["noise_truth"]["prnu"] = 0.1;
  EXPECT_NE(config_error(j).find("sensors[0].noise_truth.prnu: unknown key"), std::string::npos);
}

TEST(RigConfig, RejectsMissingAndMistypedValues) {
  auto j = minimal();
  j["sensors"][0].erase("gain_dv_per_e");
  EXPECT_NE(config_error(j).find("sensors[0].gain_dv_per_e: missing required key"), std::string::npos);
  j = minimal();
  j["sensors"][0]["bit_depth"] = "twelve";
  EXPECT_NE(config_error(j).find("bit_depth"), std::string::npos);
  j = minimal();
  j["sensors"][0]["transform"] = json::array({1, 0, 0, 2, 0, 0});
  EXPECT_NE(config_error(j).find("not invertible"), std::string::npos);
  j = minimal();
  j["schema_version"] = 2;
  EXPECT_NE(config_error(j).find("schema_version"), std::string::npos);
  j = minimal();
  j["sensors"] = json::array();
  EXPECT_NE(config_error(j).find("sensors"), std::string::npos);
}

TEST(RigConfig, SaveLoadRoundTripWithRelativePaths) {
  const auto dir = fs::temp_directory_path() / "hdrlpa_test_rig_round_trip";
  fs::remove_all(dir);
  fs::create_directories(dir / "cal");
  FloatFrame bias(8, 6, 64.0);
  write_pfm(bias, dir / "cal" / "bias.pfm");
  auto cfg = parse_rig_config(minimal(), dir);
  cfg.sensors[0].bias = dir / "cal" / "bias.pfm";
  save_rig_config(cfg, dir / "rig.cfg");
  const auto text = detail::read_file_bytes(dir / "rig.cfg");
  EXPECT_NE(text.find("\"cal/bias.pfm\""), std::string::npos);
  const auto back = load_rig_config(dir / "rig.cfg");
  EXPECT_EQ(std::get<fs::path>(back.sensors[0].bias), dir / "cal" / "bias.pfm");
  const auto cal = load_calibration(back.sensors[0], 8, 6);
  EXPECT_EQ(cal.bias.data, bias.data);
  EXPECT_EQ(cal.readout_variance.data, FloatFrame(8, 6, 0.0).data);
  EXPECT_EQ(cal.nonuniformity.data, FloatFrame(8, 6, 1.0).data);
  EXPECT_THROW(load_calibration(back.sensors[0], 7, 6), ShapeError);
}

TEST(RigConfig, MissingCalibrationFileIsInputError) {
  auto j = minimal();
  j["sensors"][0]["bias"] = "does/not/exist.pfm";
  const auto cfg = parse_rig_config(j, fs::temp_directory_path());
  EXPECT_THROW(load_calibration(cfg.sensors[0], 8, 6), InputError);
}

TEST(RigConfig, MalformedJsonIsConfigError) {
  const auto path = fs::temp_directory_path() / "hdrlpa_test_bad.cfg";
  std::ofstream(path) << "{ \"schema_version\": 1, ";
  EXPECT_THROW(load_rig_config(path), ConfigError);
  EXPECT_THROW(load_rig_config(fs::temp_directory_path() / "hdrlpa_no_such.cfg"), InputError);
}

TEST(RigConfig, RigSpecNeedsDimensionsAndNoiseTruth) {
  auto cfg = parse_rig_config(minimal());
  EXPECT_THROW(rig_spec_from_config(cfg), ConfigError);
  cfg.sensors[1].noise_truth = NoiseTruth{64.0, 6.5, 0.0, {}};
  const auto rig = rig_spec_from_config(cfg);
  EXPECT_EQ(rig.seed, 9u);
  EXPECT_TRUE(rig.zero_noise);
  EXPECT_EQ(rig.sensors[1].width, 8);
}
