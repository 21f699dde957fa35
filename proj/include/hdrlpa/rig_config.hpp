// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rig configuration file: per-sensor acquisition settings, geometry,
// calibration sources, reconstruction defaults and simulation settings.
// JSON, parsed strictly: unknown keys are errors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hdrlpa/errors.hpp"
#include "hdrlpa/netpbm.hpp"
#include "hdrlpa/radiometry.hpp"
#include "hdrlpa/simulator.hpp"

namespace hdrlpa {

inline constexpr int kRigSchemaVersion = 1;

/// A calibration frame given by file, by a constant, or not at all.
using FrameSource = std::variant<std::monostate, double, std::filesystem::path>;

struct SensorEntry {
  SensorConfig config;
  int width = 0;  ///< 0 when not stated
  int height = 0;
  FrameSource bias;
  FrameSource readvar;
  FrameSource nonuniformity;
  std::optional<NoiseTruth> noise_truth;  ///< simulation ground truth
};

struct ReconstructionDefaults {
  int order = 1;
  double h = 0.7;
  double alpha = 0.005;
  double max_radius = 8.0;
  double cond_threshold = 1e8;
  int grad_window = 9;
  bool calpa = false;
};

struct SimulationSettings {
  std::uint64_t seed = 1;
  bool zero_noise = false;
  double gt_scale = 1.0;
};

struct RigConfig {
  int schema_version = kRigSchemaVersion;
  std::vector<SensorEntry> sensors;
  ReconstructionDefaults reconstruction;
  SimulationSettings simulation;
  std::filesystem::path base_dir;  ///< relative paths resolve against this

  std::vector<SensorConfig> sensor_configs() const {
    std::vector<SensorConfig> out;
    for (const auto& s : sensors) out.push_back(s.config);
    return out;
  }
};

namespace detail {

using nlohmann::json;

class JsonReader {
 public:
  JsonReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key) const {
    const auto& v = required(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const auto& v = required(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key) const {
    const auto& v = required(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

 private:
  const json& required(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required key");
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
};

inline FrameSource parse_frame_source(const JsonReader& r, const char* key, const std::filesystem::path& base) {
  if (!r.has(key)) return std::monostate{};
  const auto& v = r.raw(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative()) p = base / p;
    return p;
  }
  throw ConfigError(r.where(key) + ": expected a PFM path or a number");
}

inline json frame_source_to_json(const FrameSource& src, const std::filesystem::path& base) {
  if (const auto* d = std::get_if<double>(&src)) return *d;
  if (const auto* p = std::get_if<std::filesystem::path>(&src)) {
    std::error_code ec;
    auto rel = base.empty() ? *p : std::filesystem::relative(*p, base, ec);
    return (ec || rel.empty() ? *p : rel).generic_string();
  }
  return nullptr;
}

}  // namespace detail

inline RigConfig parse_rig_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::JsonReader;
  JsonReader top(j, "");
  top.allow({"schema_version", "sensors", "reconstruction", "simulation"});
  RigConfig cfg;
  cfg.base_dir = base_dir;
  cfg.schema_version = static_cast<int>(top.integer("schema_version"));
  if (cfg.schema_version != kRigSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(cfg.schema_version));
  if (!top.has("sensors") || !top.raw("sensors").is_array() || top.raw("sensors").empty())
    throw ConfigError("sensors: expected a non-empty array");

  const auto& sensors = top.raw("sensors");
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    JsonReader s(sensors[k], "sensors[" + std::to_string(k) + "]");
    s.allow({"id", "width", "height", "exposure_time_s", "gain_dv_per_e", "exposure_scaling", "transform",
             "saturation_level", "black_level_epsilon", "bit_depth", "bayer_phase", "defective_pixels", "bias",
             "readvar", "nonuniformity", "noise_truth"});
    SensorEntry e;
    auto& c = e.config;
    c.id = static_cast<int>(s.integer("id", static_cast<std::int64_t>(k)));
    e.width = static_cast<int>(s.integer("width", 0));
    e.height = static_cast<int>(s.integer("height", 0));
    c.exposure_time = s.number("exposure_time_s");
    c.gain = s.number("gain_dv_per_e");
    c.exposure_scaling = s.number("exposure_scaling", 1.0);
    c.bit_depth = static_cast<int>(s.integer("bit_depth"));
    c.saturation_level = s.number("saturation_level", static_cast<double>((1u << std::clamp(c.bit_depth, 1, 16)) - 1u));
    c.black_level_epsilon = s.number("black_level_epsilon", 0.0);
    if (s.has("transform")) {
      const auto& t = s.raw("transform");
      if (!t.is_array() || t.size() != 6) throw ConfigError(s.where("transform") + ": expected 6 numbers");
      for (std::size_t i = 0; i < 6; ++i) {
        if (!t[i].is_number()) throw ConfigError(s.where("transform") + ": expected 6 numbers");
        c.transform.m[i] = t[i].get<double>();
      }
    }
    if (s.has("bayer_phase")) {
      const auto name = s.string("bayer_phase");
      const auto p = parse_bayer_pattern(name);
      if (!p) throw ConfigError(s.where("bayer_phase") + ": unknown phase '" + name + "'");
      c.pattern = *p;
    }
    if (s.has("defective_pixels")) {
      const auto& d = s.raw("defective_pixels");
      if (!d.is_array()) throw ConfigError(s.where("defective_pixels") + ": expected an array of pixel indices");
      for (const auto& v : d) {
        if (!v.is_number_unsigned()) throw ConfigError(s.where("defective_pixels") + ": expected non-negative integers");
        c.defective_pixels.push_back(v.get<std::size_t>());
      }
    }
    e.bias = detail::parse_frame_source(s, "bias", base_dir);
    e.readvar = detail::parse_frame_source(s, "readvar", base_dir);
    e.nonuniformity = detail::parse_frame_source(s, "nonuniformity", base_dir);
    if (s.has("noise_truth")) {
      JsonReader n(s.raw("noise_truth"), s.where("noise_truth"));
      n.allow({"bias_dv", "readout_variance_dv2", "prnu_std"});
      NoiseTruth t;
      t.bias_dv = n.number("bias_dv", 0.0);
      t.readout_variance_dv2 = n.number("readout_variance_dv2", 0.0);
      t.prnu_std = n.number("prnu_std", 0.0);
      if (t.readout_variance_dv2 < 0.0) throw ConfigError(n.where("readout_variance_dv2") + ": must be >= 0");
      if (t.prnu_std < 0.0) throw ConfigError(n.where("prnu_std") + ": must be >= 0");
      e.noise_truth = t;
    }
    try {
      c.validate();
    } catch (const ConfigError& err) {
      throw ConfigError(s.where("") + " " + err.what());
    }
    cfg.sensors.push_back(std::move(e));
  }

  if (top.has("reconstruction")) {
    JsonReader r(top.raw("reconstruction"), "reconstruction");
    r.allow({"order", "h", "alpha", "max_radius", "cond_threshold", "grad_window", "calpa"});
    auto& d = cfg.reconstruction;
    d.order = static_cast<int>(r.integer("order", d.order));
    d.h = r.number("h", d.h);
    d.alpha = r.number("alpha", d.alpha);
    d.max_radius = r.number("max_radius", d.max_radius);
    d.cond_threshold = r.number("cond_threshold", d.cond_threshold);
    d.grad_window = static_cast<int>(r.integer("grad_window", d.grad_window));
    d.calpa = r.boolean("calpa", d.calpa);
  }
  if (top.has("simulation")) {
    JsonReader r(top.raw("simulation"), "simulation");
    r.allow({"seed", "zero_noise", "gt_scale"});
    cfg.simulation.seed = r.unsigned_integer("seed", cfg.simulation.seed);
    cfg.simulation.zero_noise = r.boolean("zero_noise", cfg.simulation.zero_noise);
    cfg.simulation.gt_scale = r.number("gt_scale", cfg.simulation.gt_scale);
  }
  return cfg;
}

inline RigConfig load_rig_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_rig_config(j, path.parent_path());
}

inline nlohmann::json to_json(const RigConfig& cfg, const std::filesystem::path& base_dir = {}) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["sensors"] = nlohmann::json::array();
  for (const auto& e : cfg.sensors) {
    const auto& c = e.config;
    nlohmann::json s;
    s["id"] = c.id;
    if (e.width > 0) s["width"] = e.width;
    if (e.height > 0) s["height"] = e.height;
    s["exposure_time_s"] = c.exposure_time;
    s["gain_dv_per_e"] = c.gain;
    s["exposure_scaling"] = c.exposure_scaling;
    s["transform"] = c.transform.m;
    s["saturation_level"] = c.saturation_level;
    s["black_level_epsilon"] = c.black_level_epsilon;
    s["bit_depth"] = c.bit_depth;
    s["bayer_phase"] = std::string(to_string(c.pattern));
    if (!c.defective_pixels.empty()) s["defective_pixels"] = c.defective_pixels;
    for (auto [key, src] : {std::pair{"bias", &e.bias}, std::pair{"readvar", &e.readvar},
                            std::pair{"nonuniformity", &e.nonuniformity}}) {
      auto v = detail::frame_source_to_json(*src, base_dir);
      if (!v.is_null()) s[key] = v;
    }
    if (e.noise_truth) {
      s["noise_truth"] = {{"bias_dv", e.noise_truth->bias_dv},
                          {"readout_variance_dv2", e.noise_truth->readout_variance_dv2},
                          {"prnu_std", e.noise_truth->prnu_std}};
    }
    j["sensors"].push_back(std::move(s));
  }
  const auto& d = cfg.reconstruction;
  j["reconstruction"] = {{"order", d.order},         {"h", d.h},
                         {"alpha", d.alpha},         {"max_radius", d.max_radius},
                         {"cond_threshold", d.cond_threshold}, {"grad_window", d.grad_window},
                         {"calpa", d.calpa}};
  j["simulation"] = {{"seed", cfg.simulation.seed},
                     {"zero_noise", cfg.simulation.zero_noise},
                     {"gt_scale", cfg.simulation.gt_scale}};
  return j;
}

inline void save_rig_config(const RigConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write config '" + path.string() + "'");
  out << to_json(cfg, path.parent_path()).dump(2) << "\n";
}

/// Materializes a sensor's calibration frames at width x height. Missing
/// sources default to bias 0, readout variance 0, non-uniformity 1.
inline NoiseCalibration load_calibration(const SensorEntry& e, int width, int height) {
  auto frame = [&](const FrameSource& src, double fallback, const char* what) {
    if (const auto* d = std::get_if<double>(&src)) return FloatFrame(width, height, *d);
    if (const auto* p = std::get_if<std::filesystem::path>(&src)) {
      if (!std::filesystem::exists(*p))
        throw InputError("sensor " + std::to_string(e.config.id) + ": " + what + " file '" + p->string() +
                         "' does not exist");
      auto f = read_pfm_frame(*p);
      if (!f.same_shape(width, height))
        throw ShapeError("sensor " + std::to_string(e.config.id) + ": " + what + " frame is " +
                         std::to_string(f.width) + "x" + std::to_string(f.height) + ", expected " +
                         std::to_string(width) + "x" + std::to_string(height));
      return f;
    }
    return FloatFrame(width, height, fallback);
  };
  NoiseCalibration cal;
  cal.bias = frame(e.bias, 0.0, "bias");
  cal.readout_variance = frame(e.readvar, 0.0, "readvar");
  cal.nonuniformity = frame(e.nonuniformity, 1.0, "nonuniformity");
  cal.gain_estimate = e.config.gain;
  cal.validate(width, height);
  return cal;
}

/// Simulation spec from a config whose sensors all carry width, height and noise_truth.
inline RigSpec rig_spec_from_config(const RigConfig& cfg) {
  RigSpec rig;
  rig.seed = cfg.simulation.seed;
  rig.zero_noise = cfg.simulation.zero_noise;
  rig.gt_scale = cfg.simulation.gt_scale;
  for (std::size_t k = 0; k < cfg.sensors.size(); ++k) {
    const auto& e = cfg.sensors[k];
    const auto where = "sensors[" + std::to_string(k) + "]";
    if (e.width <= 0 || e.height <= 0) throw ConfigError(where + ".width: simulation needs sensor width and height");
    if (!e.noise_truth) throw ConfigError(where + ".noise_truth: simulation needs a noise_truth block");
    rig.sensors.push_back({e.config, *e.noise_truth, e.width, e.height});
  }
  rig.validate();
  return rig;
}

}  // namespace hdrlpa
