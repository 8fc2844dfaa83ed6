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

#ifndef SDS_PIPELINE_HPP
#define SDS_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include <sds/bundle.hpp>
#include <sds/errors.hpp>
#include <sds/frame_align.hpp>
#include <sds/gyro_sync.hpp>
#include <sds/strobe_eval.hpp>

namespace sds
{

// Pairing of MCU trigger indices with depth frame indices.
struct TriggerAssociation
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (trigger, frame)
  std::vector<std::size_t> dropped;    // triggers skipped between matched frames
  std::vector<std::size_t> unmatched;  // every trigger without a frame

  std::optional<std::size_t> triggerOf(std::size_t frame) const;
};

// Greedy monotone pairing. The first frame pairs with the first trigger; each
// later frame advances the trigger index by the k whose trigger delta matches
// the frame-internal delta within tolerance * period, flagging k - 1 drops.
// Throws AssociationError when a frame delta matches no trigger delta.
TriggerAssociation associate_triggers(std::span<const TimeInstant> triggers, std::span<const TimeInstant> frames,
                                      Nanos period, double tolerance = 0.25);

struct RemapResult
{
  RecordingBundle bundle;  // domain == "mcu"
  TriggerAssociation association;
};

// Expresses every stream in the MCU domain: smartphone streams shift by
// -dt_SM, depth frames take their associated trigger timestamps. Throws
// StateError when the depth frames cannot be associated.
RemapResult remap_timestamps(const RecordingBundle& bundle, Nanos dt_sm);

// Gyro offset dt_SM of a native-domain bundle. The grid rate is the configured
// one, capped at the slower of the two IMU streams.
OffsetEstimate estimate_bundle_offset(const RecordingBundle& bundle);

// Writes remapped copies under <bundle_dir>/mcu/ leaving the originals alone.
void write_remapped(const RemapResult& remapped, const std::filesystem::path& bundle_dir);

struct EvalConfig
{
  int kernel_rows = 7;
  double min_height = 0.3;
  int min_separation_rows = 60;
  int strobe_index = 4;  // 1-based peak to track
  int frames_per_trial = 16;
  // Derive the expected first-strobe row from the session's deliberate extra
  // phase and reject trials whose first peak is elsewhere.
  bool auto_window = true;
  std::optional<std::pair<double, double>> first_row_window;
};

// Offset, phase, association and image analysis for one recording.
struct LaunchAnalysis
{
  OffsetEstimate offset;
  PhaseCorrection phase;
  TriggerAssociation association;
  // Estimated smartphone-minus-depth midpoint offset after correction, folded
  // into one frame period, MCU domain.
  Nanos phase_error_ns = 0;
  PeakSet trial_peaks;  // first frames_per_trial frames, averaged and smoothed
  std::optional<double> tracked_row;
  double row_time_scale_ns = 0.0;
  // Peak nearest to the middle row of the averaged trial profile.
  std::optional<double> center_band_row;
  // Center-strobe time relative to the middle-row midpoint, from tracked_row.
  std::optional<double> center_strobe_offset_ns;
  std::vector<DriftPair> drift_pairs;
};

struct SyncReport
{
  OffsetEstimate offset;
  PhaseCorrection phase;
  Nanos applied_shift_ns = 0;
  Nanos residual_misalignment_ns = 0;
  Nanos phase_error_ns = 0;
  std::size_t associated_frames = 0;
  std::size_t dropped_frames = 0;
  double row_time_scale_ns = 0.0;
  std::optional<double> center_band_row;
  std::optional<double> center_strobe_offset_ns;
  std::optional<PrecisionReport> precision;
  std::optional<DriftReport> drift;
  std::vector<DriftPair> drift_pairs;
  std::size_t launches = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string format{kBundleFormat};
};

struct PipelineConfig
{
  SessionConfig session;
  int launches = 1;
  EvalConfig eval;
  bool drift = true;
};

// Failure inside one pipeline stage; what() starts with "[stage] ".
class PipelineError : public DataError
{
public:
  PipelineError(std::string stage, const std::string& what)
    : DataError("[" + stage + "] " + what), stage_(std::move(stage))
  {
  }
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

LaunchAnalysis analyze_bundle(const RecordingBundle& bundle, const EvalConfig& eval);

// Simulates `launches` sessions (launch 0 uses the config seed, later ones
// derived seeds) and evaluates them. Precision needs >= 4 launches; drift is
// computed from launch 0.
SyncReport run_pipeline(const PipelineConfig& config);
// Same evaluation over pre-recorded bundles.
SyncReport run_pipeline(std::span<const RecordingBundle> bundles, const EvalConfig& eval, bool drift = true);

void to_json(nlohmann::json& j, const OffsetEstimate& e);
void to_json(nlohmann::json& j, const PrecisionReport& r);
void to_json(nlohmann::json& j, const DriftReport& r);
void to_json(nlohmann::json& j, const TriggerAssociation& a);
void to_json(nlohmann::json& j, const SyncReport& r);
void to_json(nlohmann::json& j, const EvalConfig& e);
void from_json(const nlohmann::json& j, EvalConfig& e);

}  // namespace sds

#endif  // SDS_PIPELINE_HPP
