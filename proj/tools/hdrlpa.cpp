// Copyright 2026 The hdrlpa Authors
// SPDX-License-Identifier: Apache-2.0
//
// hdrlpa: calibrate, simulate, reconstruct and score multi-sensor HDR rigs.
//
// Exit codes: 0 success, 2 usage or input error, 3 data-shape error,
// 4 numeric failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdrlpa/hdrlpa.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitShape = 3;
constexpr int kExitNumeric = 4;
constexpr const char* kFlatTimeFile = "exposure_time_s";

std::vector<fs::path> list_pgm(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw hdrlpa::InputError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw hdrlpa::InputError("no .pgm frames in '" + dir.string() + "'");
  return out;
}

hdrlpa::FrameStack load_stack(const fs::path& dir, hdrlpa::StackKind kind, hdrlpa::BayerPattern pattern) {
  hdrlpa::FrameStack stack;
  stack.kind = kind;
  for (const auto& p : list_pgm(dir)) stack.frames.push_back(hdrlpa::read_pgm16(p, pattern));
  return stack;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw hdrlpa::InputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// A flat directory may carry its own exposure time in a file named
// `exposure_time_s`; without it the sensor's configured time applies.
double flat_exposure_time(const fs::path& dir, double fallback) {
  const auto file = dir / kFlatTimeFile;
  if (!fs::exists(file)) return fallback;
  std::istringstream in(hdrlpa::detail::read_file_bytes(file));
  double t = 0.0;
  if (!(in >> t) || !(t > 0.0)) throw hdrlpa::InputError("'" + file.string() + "': expected a positive exposure time");
  return t;
}

// calibrate ------------------------------------------------------------------

struct CalibrateArgs {
  fs::path config;
  std::vector<fs::path> black;
  std::vector<fs::path> flat;
  fs::path out;
  std::size_t reference = 0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  auto rig = hdrlpa::load_rig_config(a.config);
  const auto ns = rig.sensors.size();
  if (a.black.size() != ns || a.flat.size() != ns)
    throw hdrlpa::InputError("expected one --black and one --flat directory per sensor (" + std::to_string(ns) + ")");
  ensure_dir(a.out);

  std::vector<hdrlpa::FrameStack> blacks, flats;
  std::vector<hdrlpa::SensorCalibrationResult> results;
  std::vector<hdrlpa::SensorConfig> configs;
  std::vector<hdrlpa::NoiseCalibration> cals;
  for (std::size_t s = 0; s < ns; ++s) {
    auto& cfg = rig.sensors[s].config;
    blacks.push_back(load_stack(a.black[s], hdrlpa::StackKind::Black, cfg.pattern));
    flats.push_back(load_stack(a.flat[s], hdrlpa::StackKind::FlatField, cfg.pattern));
    blacks.back().validate(hdrlpa::StackKind::Black);
    flats.back().validate(hdrlpa::StackKind::FlatField);
    results.push_back(hdrlpa::calibrate_noise(blacks.back(), flats.back(), cfg));
    if (!results.back().gain.degenerate) cfg.gain = results.back().gain.gain;
    configs.push_back(cfg);
    configs.back().exposure_time = flat_exposure_time(a.flat[s], cfg.exposure_time);
    cals.push_back(results.back().calibration);
  }
  const auto scalings = hdrlpa::estimate_exposure_scaling(flats, a.reference, configs, cals);

  json summary;
  summary["reference_sensor"] = a.reference;
  summary["sensors"] = json::array();
  for (std::size_t s = 0; s < ns; ++s) {
    auto& entry = rig.sensors[s];
    entry.config.exposure_scaling = scalings[s];
    auto& cal = results[s].calibration;
    cal.nonuniformity = hdrlpa::estimate_nonuniformity(flats[s], scalings[s], configs[s], cal);

    const auto dir = a.out / ("sensor_" + std::to_string(entry.config.id));
    ensure_dir(dir);
    hdrlpa::write_pfm(cal.bias, dir / "bias.pfm");
    hdrlpa::write_pfm(cal.readout_variance, dir / "readvar.pfm");
    hdrlpa::write_pfm(cal.nonuniformity, dir / "nonuniformity.pfm");
    entry.bias = dir / "bias.pfm";
    entry.readvar = dir / "readvar.pfm";
    entry.nonuniformity = dir / "nonuniformity.pfm";
    entry.width = blacks[s].width();
    entry.height = blacks[s].height();

    double mean_var = 0.0;
    for (double v : cal.readout_variance.data) mean_var += v;
    mean_var /= static_cast<double>(cal.readout_variance.data.size());
    const auto& g = results[s].gain;
    json j{{"id", entry.config.id},
           {"gain_dv_per_e", g.gain},
           {"gain_spatial_std", g.spatial_std},
           {"gain_per_channel", g.per_channel},
           {"gain_degenerate", g.degenerate},
           {"gain_valid_pixels", g.valid_pixels},
           {"exposure_scaling", scalings[s]},
           {"mean_readout_variance_dv2", mean_var}};
    summary["sensors"].push_back(j);

    std::ofstream txt(dir / "calibration.txt");
    txt << "id " << entry.config.id << "\n"
        << "gain_dv_per_e " << g.gain << "\n"
        << "gain_degenerate " << (g.degenerate ? 1 : 0) << "\n"
        << "exposure_scaling " << scalings[s] << "\n"
        << "mean_readout_variance_dv2 " << mean_var << "\n";
  }
  hdrlpa::detail::write_file_bytes(a.out / "calibration.json", summary.dump(2) + "\n");
  hdrlpa::save_rig_config(rig, a.out / "rig.cfg");
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  fs::path gt;
  fs::path config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  bool zero_noise = false;
  int black_frames = 0;
  int flat_frames = 0;
  double flat_radiance = 0.0;
  int threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  auto rig_cfg = hdrlpa::load_rig_config(a.config);
  if (a.seed) rig_cfg.simulation.seed = *a.seed;
  if (a.zero_noise) rig_cfg.simulation.zero_noise = true;
  const auto rig = hdrlpa::rig_spec_from_config(rig_cfg);
  const auto gt = hdrlpa::read_pfm_rgb(a.gt);
  ensure_dir(a.out);

  const auto sim = hdrlpa::simulate_rig(gt, rig, a.threads);
  // One flat radiance for all sensors. Each sensor's flat exposure time is
  // stretched by the inverse of its relative sensitivity so every flat sits
  // near the same fraction of full scale; 40% by default.
  auto full_scale_fraction = [](const hdrlpa::SensorConfig& c) {
    return c.gain * c.exposure_time * c.exposure_scaling / c.saturation_level;
  };
  double flat_f = a.flat_radiance;
  double k_max = 0.0;
  for (const auto& spec : rig.sensors) k_max = std::max(k_max, full_scale_fraction(spec.config));
  if (!(flat_f > 0.0)) flat_f = 0.4 / k_max;
  for (std::size_t s = 0; s < rig.sensors.size(); ++s) {
    const auto& spec = rig.sensors[s];
    const auto id = std::to_string(spec.config.id);
    hdrlpa::write_pgm16(sim.frames[s], a.out / ("sensor_" + id + ".pgm"));
    const auto dir = a.out / ("sensor_" + id);
    ensure_dir(dir);
    const auto& cal = sim.calibrations[s];
    hdrlpa::write_pfm(cal.bias, dir / "bias.pfm");
    hdrlpa::write_pfm(cal.readout_variance, dir / "readvar.pfm");
    hdrlpa::write_pfm(cal.nonuniformity, dir / "nonuniformity.pfm");
    auto& entry = rig_cfg.sensors[s];
    entry.bias = dir / "bias.pfm";
    entry.readvar = dir / "readvar.pfm";
    entry.nonuniformity = dir / "nonuniformity.pfm";

    // Calibration stacks use frame indices after the scene frame.
    auto write_stack = [&](const hdrlpa::SensorSpec& stack_spec, const char* name, double f, int count, int first) {
      if (count <= 0) return;
      const auto sdir = dir / name;
      ensure_dir(sdir);
      const auto frames = hdrlpa::simulate_uniform_stack(stack_spec, f, count, rig.seed, first, a.threads);
      for (int k = 0; k < count; ++k) {
        char file[32];
        std::snprintf(file, sizeof file, "frame_%04d.pgm", k);
        hdrlpa::write_pgm16(frames[static_cast<std::size_t>(k)], sdir / file);
      }
    };
    write_stack(spec, "black", 0.0, a.black_frames, 1);
    if (a.flat_frames > 0) {
      auto flat_spec = spec;
      flat_spec.config.exposure_time *= k_max / full_scale_fraction(spec.config);
      write_stack(flat_spec, "flat", flat_f, a.flat_frames, 1 + a.black_frames);
      std::ostringstream t;
      t << std::setprecision(17) << flat_spec.config.exposure_time << "\n";
      hdrlpa::detail::write_file_bytes(dir / "flat" / kFlatTimeFile, t.str());
    }
  }
  hdrlpa::save_rig_config(rig_cfg, a.out / "rig.cfg");
  std::cout << "wrote " << rig.sensors.size() << " sensor frames to " << a.out.string() << "\n";
  return kExitOk;
}

// reconstruct ----------------------------------------------------------------

struct ReconstructArgs {
  std::vector<fs::path> frames;
  fs::path config;
  fs::path out;
  std::optional<int> order;
  std::optional<double> h;
  bool calpa = false;
  std::optional<double> alpha;
  std::optional<int> grad_window;
  std::optional<double> max_radius;
  std::optional<double> cond_threshold;
  int width = 0;
  int height = 0;
  int threads = 0;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rig = hdrlpa::load_rig_config(a.config);
  if (a.frames.size() != rig.sensors.size())
    throw hdrlpa::ShapeError("got " + std::to_string(a.frames.size()) + " frames for " +
                             std::to_string(rig.sensors.size()) + " configured sensors");
  const auto& d = rig.reconstruction;
  hdrlpa::AdaptiveParams params;
  params.base.order = a.order.value_or(d.order);
  params.base.h = a.h.value_or(d.h);
  params.base.max_support_radius = a.max_radius.value_or(d.max_radius);
  params.base.condition_threshold = a.cond_threshold.value_or(d.cond_threshold);
  params.base.threads = a.threads;
  params.alpha = a.alpha.value_or(d.alpha);
  params.gradient_window = a.grad_window.value_or(d.grad_window);
  const bool calpa = a.calpa || d.calpa;
  if (calpa) params.validate();
  else params.base.validate();

  std::vector<hdrlpa::RadianceSample> samples;
  int ref_w = 0, ref_h = 0;
  for (std::size_t s = 0; s < a.frames.size(); ++s) {
    const auto& entry = rig.sensors[s];
    auto img = hdrlpa::read_pgm16(a.frames[s], entry.config.pattern);
    img.pattern = entry.config.pattern;
    if ((entry.width > 0 && img.width != entry.width) || (entry.height > 0 && img.height != entry.height))
      throw hdrlpa::ShapeError("frame '" + a.frames[s].string() + "' does not match configured sensor dimensions");
    if (s == 0) {
      ref_w = img.width;
      ref_h = img.height;
    }
    const auto cal = hdrlpa::load_calibration(entry, img.width, img.height);
    auto part = hdrlpa::frame_to_samples(img, entry.config, cal);
    samples.insert(samples.end(), part.begin(), part.end());
  }
  const int w = a.width > 0 ? a.width : ref_w;
  const int h = a.height > 0 ? a.height : ref_h;
  const auto grid = hdrlpa::OutputGrid::resampled(w, h, ref_w, ref_h);
  const hdrlpa::SampleIndex index(samples);
  const auto img = calpa ? hdrlpa::calpa_reconstruct(index, grid, params)
                         : hdrlpa::reconstruct_frame(index, grid, params.base);
  hdrlpa::write_pfm(img, a.out);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json frames = json::array();
  for (const auto& f : a.frames) frames.push_back(fs::absolute(f).string());
  json manifest{{"tool", "hdrlpa"},
                {"version", HDRLPA_VERSION_STRING},
                {"command", "reconstruct"},
                {"created", iso_now()},
                {"config", fs::absolute(a.config).string()},
                {"frames", frames},
                {"output", fs::absolute(a.out).string()},
                {"width", w},
                {"height", h},
                {"method", calpa ? "calpa" : "lpa"},
                {"M", params.base.order},
                {"h", params.base.h},
                {"h_green", params.base.scale_for(hdrlpa::ColorChannel::G)},
                {"max_radius", params.base.max_support_radius},
                {"cond_threshold", params.base.condition_threshold},
                {"threads", a.threads > 0 ? a.threads : hdrlpa::default_thread_count()},
                {"nan_pixels", img.nan_count()},
                {"seconds", seconds}};
  if (calpa) {
    manifest["alpha"] = params.alpha;
    manifest["grad_window"] = params.gradient_window;
    manifest["lambda1"] = params.lambda1;
    manifest["lambda2"] = params.lambda2;
  }
  auto manifest_path = a.out;
  manifest_path += ".json";
  hdrlpa::detail::write_file_bytes(manifest_path, manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << "\n";
  return kExitOk;
}

// metrics --------------------------------------------------------------------

struct MetricsArgs {
  fs::path a;
  fs::path b;
  std::optional<fs::path> mask;
  bool json_out = false;
  bool regions = false;
  std::optional<double> saturation_radiance;
};

json score_json(double psnr, double rmse) {
  json j;
  j["psnr_db"] = std::isfinite(psnr) ? json(psnr) : json("inf");
  j["rmse_log2"] = rmse;
  return j;
}

int cmd_metrics(const MetricsArgs& a) {
  const auto img_a = hdrlpa::read_pfm_rgb(a.a);
  const auto img_b = hdrlpa::read_pfm_rgb(a.b);
  std::optional<hdrlpa::Mask> mask;
  if (a.mask) {
    const auto m = hdrlpa::read_pfm_frame(*a.mask);
    mask = hdrlpa::Mask(m.width, m.height, 0);
    for (std::size_t i = 0; i < m.data.size(); ++i) mask->data[i] = m.data[i] != 0.0 ? 1 : 0;
  }
  std::optional<hdrlpa::RegionMasks> regions;
  if (a.regions) regions = hdrlpa::make_region_masks(img_b, 0.25, a.saturation_radiance);
  const auto report = hdrlpa::evaluate(img_a, img_b, mask ? &*mask : nullptr, regions ? &*regions : nullptr);

  if (a.json_out) {
    json j = score_json(report.psnr, report.rmse_log);
    j["schema"] = "hdrlpa.metrics/1";
    j["regions"] = json::object();
    for (const auto& [name, r] : report.regions) {
      auto rj = score_json(r.psnr, r.rmse_log);
      rj["pixels"] = r.pixels;
      j["regions"][name] = rj;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "psnr_db " << report.psnr << "\nrmse_log2 " << report.rmse_log << "\n";
    for (const auto& [name, r] : report.regions)
      std::cout << name << " psnr_db " << r.psnr << " rmse_log2 " << r.rmse_log << " pixels " << r.pixels << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-sensor HDR video reconstruction"};
  app.set_version_flag("--version", std::string("hdrlpa ") + HDRLPA_VERSION_STRING);
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: HDRLPA_THREADS or hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate bias, readout variance, gain, scalings, non-uniformity");
  calibrate->add_option("--config", cal.config, "Rig config")->required();
  calibrate->add_option("--black", cal.black, "Black-frame directory per sensor, in config order")->required();
  calibrate->add_option("--flat", cal.flat, "Flat-field directory per sensor, in config order")->required();
  calibrate->add_option("-o,--out", cal.out, "Output directory")->required();
  calibrate->add_option("--reference", cal.reference, "Sensor index with exposure scaling 1");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Render raw sensor frames from a ground-truth PFM");
  simulate->add_option("gt", sim.gt, "Ground-truth RGB PFM")->required();
  simulate->add_option("config", sim.config, "Rig config with noise_truth blocks")->required();
  simulate->add_option("out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Noise seed (overrides the config)");
  simulate->add_flag("--zero-noise", sim.zero_noise, "Disable shot and readout noise");
  simulate->add_option("--black-frames", sim.black_frames, "Also write this many black frames per sensor");
  simulate->add_option("--flat-frames", sim.flat_frames, "Also write this many flat-field frames per sensor");
  simulate->add_option("--flat-radiance", sim.flat_radiance, "Flat-field radiance shared by all sensors (default: 40% of full scale on the most sensitive)");

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an HDR image from raw frames");
  reconstruct->add_option("frames", rec.frames, "Raw PGM frame per sensor, in config order")->required();
  reconstruct->add_option("--config", rec.config, "Rig config")->required();
  reconstruct->add_option("-o,--out", rec.out, "Output PFM; a manifest is written next to it")->required();
  reconstruct->add_option("-M,--order", rec.order, "Polynomial order (0, 1, 2)");
  reconstruct->set_help_flag("--help", "Print this help message and exit");
  reconstruct->add_option("-h,--scale", rec.h, "Window scale h for R and B");
  reconstruct->add_flag("--calpa", rec.calpa, "Use steered windows");
  reconstruct->add_option("--alpha", rec.alpha, "Steering structure sensitivity");
  reconstruct->add_option("--grad-window", rec.grad_window, "Gradient analysis window side");
  reconstruct->add_option("--max-radius", rec.max_radius, "Largest sample support radius");
  reconstruct->add_option("--cond-threshold", rec.cond_threshold, "Condition number limit");
  reconstruct->add_option("--width", rec.width, "Output width (default: first sensor)");
  reconstruct->add_option("--height", rec.height, "Output height (default: first sensor)");

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "Compare two HDR PFMs");
  metrics->add_option("a", met.a, "Test image")->required();
  metrics->add_option("b", met.b, "Reference image")->required();
  metrics->add_option("--mask", met.mask, "Single-channel PFM; nonzero pixels are scored");
  metrics->add_flag("--json", met.json_out, "Emit JSON");
  metrics->add_flag("--regions", met.regions, "Also score flat, edge and saturation-transition regions");
  metrics->add_option("--saturation-radiance", met.saturation_radiance, "Radiance where a sensor clips");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    rec.threads = sim.threads = threads;
    if (*calibrate) return cmd_calibrate(cal);
    if (*simulate) return cmd_simulate(sim);
    if (*reconstruct) return cmd_reconstruct(rec);
    if (*metrics) return cmd_metrics(met);
  } catch (const hdrlpa::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const hdrlpa::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const hdrlpa::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const hdrlpa::AlignmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
