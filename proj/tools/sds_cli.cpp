/*
 * Copyright 2026 The sds Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// sds command-line front end. Every subcommand prints JSON on stdout.
//   exit 0  success
//   exit 2  bad arguments or configuration
//   exit 3  data, format or association errors

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <sds/bundle.hpp>
#include <sds/errors.hpp>
#include <sds/frame_align.hpp>
#include <sds/gyro_sync.hpp>
#include <sds/pipeline.hpp>
#include <sds/session.hpp>
#include <sds/strobe_eval.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr int kExitArgument = 2;
constexpr int kExitData = 3;

struct SessionArgs
{
  std::string preset = "default";
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

void addSessionOptions(CLI::App* cmd, SessionArgs& a)
{
  cmd->add_option("--preset", a.preset, "default, ideal, precision or drift")->capture_default_str();
  cmd->add_option("--config", a.config_path, "JSON session config; keys override the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed for all randomness");
}

sds::SessionConfig loadSession(const SessionArgs& a)
{
  sds::SessionConfig cfg = sds::preset_config(a.preset);
  if (!a.config_path.empty())
  {
    std::ifstream in(a.config_path);
    json j;
    try
    {
      j = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
      throw sds::ConfigError(a.config_path + ": " + e.what());
    }
    // A full pipeline config nests the session under "session".
    if (j.contains("session"))
      j = j.at("session");
    sds::from_json(j, cfg);
  }
  if (a.seed)
    cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

void addEvalOptions(CLI::App* cmd, sds::EvalConfig& e)
{
  cmd->add_option("--kernel-rows", e.kernel_rows, "Gaussian smoothing kernel width (odd)")->capture_default_str();
  cmd->add_option("--min-height", e.min_height, "peak threshold relative to the profile maximum")
      ->capture_default_str();
  cmd->add_option("--min-separation", e.min_separation_rows, "minimum peak separation in rows")
      ->capture_default_str();
  cmd->add_option("--strobe-index", e.strobe_index, "1-based strobe to track")->capture_default_str();
  cmd->add_option("--frames-per-trial", e.frames_per_trial, "frames averaged per trial")->capture_default_str();
}

std::vector<sds::RecordingBundle> loadBundles(const std::vector<std::string>& dirs)
{
  std::vector<sds::RecordingBundle> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs)
    out.push_back(sds::read_bundle(d));
  return out;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"sds: smartphone/depth-camera synchronization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sds 0.1.0");

  // simulate
  SessionArgs sim_args;
  std::string sim_out;
  std::string sim_format = "csv";
  auto* simulate = app.add_subcommand("simulate", "simulate a recording session and write a bundle");
  addSessionOptions(simulate, sim_args);
  simulate->add_option("--out", sim_out, "bundle output directory")->required();
  simulate->add_option("--format", sim_format, "row profile layout")
      ->check(CLI::IsMember({"csv", "packed"}))
      ->capture_default_str();

  // sync offset / sync phase
  auto* sync = app.add_subcommand("sync", "time and frame synchronization");
  sync->require_subcommand(1);
  std::string imu_a, imu_b;
  double sync_rate = 500.0;
  double min_corr = 0.6;
  auto* sync_offset = sync->add_subcommand("offset", "gyro offset between two IMU CSV files (b relative to a)");
  sync_offset->add_option("--a", imu_a, "reference IMU CSV")->required()->check(CLI::ExistingFile);
  sync_offset->add_option("--b", imu_b, "IMU CSV to align")->required()->check(CLI::ExistingFile);
  auto* rate_opt =
      sync_offset->add_option("--rate", sync_rate, "resampling rate in Hz (default: 500, capped at the slower IMU)");
  sync_offset->add_option("--min-corr", min_corr, "minimum peak correlation")->capture_default_str();

  sds::Nanos t_s0 = 0, t_d0 = 0, period = 0, step = sds::kDefaultPhaseStepNs;
  auto* sync_phase = sync->add_subcommand("phase", "phase shift and its quantization");
  sync_phase->add_option("--t-s0-ns", t_s0, "smartphone first frame, MCU domain")->required();
  sync_phase->add_option("--t-d0-ns", t_d0, "depth first frame, MCU domain")->required();
  sync_phase->add_option("--period-ns", period, "frame period")->required();
  sync_phase->add_option("--step-ns", step, "phase adjustment step")->capture_default_str();

  // eval precision / eval drift
  auto* eval = app.add_subcommand("eval", "strobe-based synchronization evaluation");
  eval->require_subcommand(1);
  sds::EvalConfig eval_cfg;
  std::vector<std::string> precision_bundles;
  auto* eval_precision = eval->add_subcommand("precision", "IQR and SD of the tracked strobe row over launches");
  eval_precision->add_option("--bundle", precision_bundles, "one bundle per launch")->required()->expected(1, -1);
  addEvalOptions(eval_precision, eval_cfg);

  std::string drift_bundle, plot_csv;
  auto* eval_drift = eval->add_subcommand("drift", "linear drift of the tracked strobe row");
  eval_drift->add_option("--bundle", drift_bundle, "bundle directory")->required();
  eval_drift->add_option("--plot-csv", plot_csv, "write frame_timestamp_ns,row_position pairs");
  addEvalOptions(eval_drift, eval_cfg);

  // extract
  std::string extract_bundle;
  std::optional<sds::Nanos> extract_offset;
  auto* extract = app.add_subcommand("extract", "remap a bundle into the MCU domain (written to <bundle>/mcu)");
  extract->add_option("--bundle", extract_bundle, "bundle directory")->required();
  extract->add_option("--offset-ns", extract_offset, "smartphone-MCU offset; estimated from the IMUs if omitted");

  // report
  SessionArgs report_args;
  int launches = 1;
  bool no_drift = false;
  std::vector<std::string> report_bundles;
  auto* report = app.add_subcommand("report", "run the full pipeline and print a SyncReport");
  addSessionOptions(report, report_args);
  report->add_option("--launches", launches, "number of simulated launches")->capture_default_str();
  report->add_option("--bundle", report_bundles, "analyze recorded bundles instead of simulating");
  report->add_flag("--no-drift", no_drift, "skip the drift fit");
  addEvalOptions(report, eval_cfg);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitArgument;
  }

  try
  {
    if (simulate->parsed())
    {
      const sds::SessionConfig cfg = loadSession(sim_args);
      const sds::RecordingBundle b = sds::simulate_session(cfg);
      sds::write_bundle(b, sim_out, sim_format == "packed" ? sds::ProfileFormat::kPacked
                                                           : sds::ProfileFormat::kCsvPerFrame);
      emit({{"bundle", sim_out},
            {"format", b.format},
            {"seed", cfg.seed},
            {"config_hash", sds::config_hash(cfg)},
            {"triggers", b.triggers.size()},
            {"depth_frames", b.depth_frames.size()},
            {"smartphone_frames", b.smartphone_frames.size()},
            {"profiles", b.profiles.size()},
            {"phase_correction", b.phase_correction},
            {"applied_shift_ns", b.applied_shift_ns}});
    }
    else if (sync_offset->parsed())
    {
      const auto a = sds::read_imu_csv(imu_a);
      const auto b = sds::read_imu_csv(imu_b);
      const double rate = rate_opt->count() ? sync_rate : sds::common_grid_rate(a, b, sync_rate);
      emit(sds::estimate_offset(a, b, rate, {min_corr}));
    }
    else if (sync_phase->parsed())
    {
      const sds::Nanos phase = sds::compute_phase_shift(sds::TimeInstant(t_s0), sds::TimeInstant(t_d0), period);
      const sds::PhaseCorrection c = sds::quantize_phase(phase, step);
      json j = c;
      j["applied_shift_ns"] = c.appliedShift();
      emit(j);
    }
    else if (eval_precision->parsed())
    {
      const auto bundles = loadBundles(precision_bundles);
      const sds::SyncReport r = sds::run_pipeline(bundles, eval_cfg, false);
      if (!r.precision)
        throw sds::InsufficientDataError("precision needs at least 4 launches (bundles)");
      emit(*r.precision);
    }
    else if (eval_drift->parsed())
    {
      const sds::RecordingBundle b = sds::read_bundle(drift_bundle);
      const sds::SyncReport r = sds::run_pipeline(std::span(&b, 1), eval_cfg, true);
      if (!r.drift)
        throw sds::InsufficientDataError("drift needs at least 2 frames with a tracked strobe");
      if (!plot_csv.empty())
        sds::write_drift_plot_csv(plot_csv, r.drift_pairs);
      emit(*r.drift);
    }
    else if (extract->parsed())
    {
      const sds::RecordingBundle b = sds::read_bundle(extract_bundle);
      sds::Nanos dt = 0;
      if (extract_offset)
        dt = *extract_offset;
      else
        dt = sds::estimate_bundle_offset(b).offset_ns;
      const sds::RemapResult r = sds::remap_timestamps(b, dt);
      sds::write_remapped(r, extract_bundle);
      emit({{"bundle", (fs::path(extract_bundle) / "mcu").string()},
            {"offset_ns", dt},
            {"smartphone_t0_ns", r.bundle.smartphone_t0.ns()},
            {"association", r.association}});
    }
    else if (report->parsed())
    {
      sds::SyncReport r;
      if (!report_bundles.empty())
      {
        const auto bundles = loadBundles(report_bundles);
        r = sds::run_pipeline(bundles, eval_cfg, !no_drift);
      }
      else
      {
        sds::PipelineConfig pc;
        pc.session = loadSession(report_args);
        pc.launches = launches;
        pc.eval = eval_cfg;
        pc.drift = !no_drift;
        r = sds::run_pipeline(pc);
      }
      emit(r);
    }
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << json{{"error", e.what()}, {"kind", "argument"}}.dump() << '\n';
    return kExitArgument;
  }
  catch (const sds::DataError& e)
  {
    std::cerr << json{{"error", e.what()}, {"kind", "data"}}.dump() << '\n';
    return kExitData;
  }
  catch (const std::range_error& e)
  {
    std::cerr << json{{"error", e.what()}, {"kind", "range"}}.dump() << '\n';
    return kExitData;
  }
  return 0;
}
