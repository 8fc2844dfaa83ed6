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

#ifndef SDS_BUNDLE_HPP
#define SDS_BUNDLE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include <sds/chrono.hpp>
#include <sds/frame_align.hpp>
#include <sds/gyro_sync.hpp>
#include <sds/rig_sim.hpp>

namespace sds
{

inline constexpr std::string_view kBundleFormat = "sds-bundle/1";

// Clock of one device relative to the MCU (true) time base.
struct ClockSpec
{
  double offset_ns = 0.0;
  double skew = 0.0;
  double jitter_sd_ns = 0.0;

  ClockModel model(std::uint64_t seed) const { return {offset_ns, skew, jitter_sd_ns, seed}; }
  bool operator==(const ClockSpec&) const = default;
};

// Everything needed to simulate one recording session. The MCU clock is the
// simulation's true time base; all per-stream RNG seeds derive from `seed`.
struct SessionConfig
{
  std::uint64_t seed = 1;

  ClockSpec smartphone_clock{1'234'567'000.0, 0.0, 0.0};
  ClockSpec depth_clock{-987'654'321.0, 0.0, 0.0};

  // Smartphone frame period in its own clock; depth triggers run at a
  // multiple of it in the MCU clock.
  Nanos frame_period_ns = 33'333'333;
  int depth_period_multiple = 1;

  int rows = 1080;
  Nanos row_readout_ns = 10'200;
  Nanos exposure_ns = 125'000;
  StrobeTrainConfig strobes;
  double sensor_noise_floor = 0.05;
  double sensor_noise_sd = 0.01;

  double imu_rate_hz = 500.0;
  double gyro_noise_sd = 0.02;
  double sync_rate_hz = 500.0;
  bool randomize_imu_phase = true;
  Nanos twist_start_ns = 1'000'000'000;
  double twist_duration_s = 2.0;
  double imu_margin_s = 0.25;

  Nanos trigger_start_ns = 500'000'000;
  Nanos video_start_ns = 3'500'000'000;
  bool randomize_video_phase = true;
  Nanos correction_latency_ns = 100'000'000;
  Nanos phase_step_ns = kDefaultPhaseStepNs;
  // Caller-supplied correction; when unset the pipeline computes it.
  std::optional<PhaseCorrection> phase_override;
  // Deliberate extra depth phase on top of the correction.
  Nanos extra_depth_phase_ns = 0;
  // Per-launch constant error of the smartphone frame timestamps.
  double launch_jitter_sd_ns = 0.0;

  int rendered_frames = 16;
  std::vector<std::int64_t> dropped_depth_frames;

  Nanos depthPeriod() const { return frame_period_ns * depth_period_multiple; }
  RollingShutterConfig shutter() const;
  // Throws ConfigError on inconsistent settings.
  void validate() const;

  bool operator==(const SessionConfig&) const = default;
};

// Named presets: "default", "ideal", "precision", "drift".
SessionConfig preset_config(std::string_view name);

// Simulator ground truth stored alongside the recorded streams.
struct SessionTruth
{
  Nanos smartphone_offset_ns = 0;  // true dt_SM at video start
  Nanos video_start_ns = 0;        // true midpoint of smartphone frame 0
  Nanos launch_error_ns = 0;
  Nanos applied_shift_ns = 0;
  std::int64_t correction_trigger = 0;  // first trigger index carrying the shift
  // True smartphone midpoint minus the matching depth midpoint, first rendered frame.
  Nanos residual_ns = 0;
  // Analytic row of the center strobe in every rendered frame.
  std::vector<double> center_strobe_rows;

  bool operator==(const SessionTruth&) const = default;
};

struct RecordingBundle
{
  std::string format{kBundleFormat};
  std::string domain = "native";  // "native" or "mcu" after remapping
  SessionConfig config;

  ImuSequence mcu_imu;         // MCU domain
  ImuSequence smartphone_imu;  // smartphone domain
  TimeInstant smartphone_t0;   // t_S0 in the smartphone domain
  std::vector<TimeInstant> triggers;      // MCU domain
  std::vector<TimeInstant> depth_frames;  // depth-internal domain
  std::vector<std::int64_t> smartphone_frame_indices;
  std::vector<TimeInstant> smartphone_frames;  // reported midpoints
  std::vector<RowIntensityProfile> profiles;
  PhaseCorrection phase_correction;
  Nanos applied_shift_ns = 0;
  std::optional<SessionTruth> truth;

  bool operator==(const RecordingBundle&) const = default;
};

enum class ProfileFormat
{
  kCsvPerFrame,
  kPacked,
};

// Directory layout: manifest.json, imu_mcu.csv, imu_smartphone.csv,
// triggers.csv, depth_frames.csv, smartphone_frames.csv and either
// profiles/frame_NNNNNN.csv or profiles.f32 + profiles.json.
void write_bundle(const RecordingBundle& bundle, const std::filesystem::path& dir,
                  ProfileFormat format = ProfileFormat::kCsvPerFrame);
// Throws FormatError when files are missing or inconsistent with the manifest.
RecordingBundle read_bundle(const std::filesystem::path& dir);

void write_imu_csv(const std::filesystem::path& path, const ImuSequence& imu);
ImuSequence read_imu_csv(const std::filesystem::path& path);
void write_triggers_csv(const std::filesystem::path& path, const std::vector<TimeInstant>& triggers);
std::vector<TimeInstant> read_triggers_csv(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ClockSpec& c);
void from_json(const nlohmann::json& j, ClockSpec& c);
void to_json(nlohmann::json& j, const StrobeTrainConfig& c);
void from_json(const nlohmann::json& j, StrobeTrainConfig& c);
void to_json(nlohmann::json& j, const PhaseCorrection& c);
void from_json(const nlohmann::json& j, PhaseCorrection& c);
void to_json(nlohmann::json& j, const SessionConfig& c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, SessionConfig& c);
void to_json(nlohmann::json& j, const SessionTruth& t);
void from_json(const nlohmann::json& j, SessionTruth& t);

// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const SessionConfig& c);

}  // namespace sds

#endif  // SDS_BUNDLE_HPP
