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

#include <sds/pipeline.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <sds/numeric.hpp>
#include <sds/session.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace sds
{

std::optional<std::size_t> TriggerAssociation::triggerOf(std::size_t frame) const
{
  const auto it = std::lower_bound(pairs.begin(), pairs.end(), frame,
                                   [](const auto& p, std::size_t f) { return p.second < f; });
  if (it == pairs.end() || it->second != frame)
    return std::nullopt;
  return it->first;
}

TriggerAssociation associate_triggers(std::span<const TimeInstant> triggers, std::span<const TimeInstant> frames,
                                      Nanos period, double tolerance)
{
  if (period <= 0)
    throw ArgumentError("associate_triggers: period must be positive");
  if (!(tolerance > 0.0 && tolerance < 0.5))
    throw ArgumentError("associate_triggers: tolerance must be in (0, 0.5)");
  auto increasing = [](std::span<const TimeInstant> ts) {
    return std::adjacent_find(ts.begin(), ts.end(), [](TimeInstant a, TimeInstant b) { return !(a < b); }) ==
           ts.end();
  };
  if (!increasing(triggers) || !increasing(frames))
    throw ArgumentError("associate_triggers: timestamps must be strictly increasing");

  TriggerAssociation out;
  if (!frames.empty())
  {
    if (triggers.empty())
      throw AssociationError("associate_triggers: depth frames present but no triggers were logged");
    const double tol = tolerance * static_cast<double>(period);
    std::size_t j = 0;
    out.pairs.emplace_back(0, 0);
    for (std::size_t i = 1; i < frames.size(); ++i)
    {
      const auto df = static_cast<double>(frames[i] - frames[i - 1]);
      std::size_t k = 1;
      bool found = false;
      for (; j + k < triggers.size(); ++k)
      {
        const auto dt = static_cast<double>(triggers[j + k] - triggers[j]);
        if (std::abs(dt - df) <= tol)
        {
          found = true;
          break;
        }
        if (dt > df + tol)
          break;
      }
      if (!found)
      {
        throw AssociationError("associate_triggers: frame " + std::to_string(i) + " (internal delta " +
                               std::to_string(static_cast<Nanos>(df)) + " ns) matches no trigger after index " +
                               std::to_string(j));
      }
      for (std::size_t q = j + 1; q < j + k; ++q)
        out.dropped.push_back(q);
      j += k;
      out.pairs.emplace_back(j, i);
    }
  }

  std::vector<bool> used(triggers.size(), false);
  for (const auto& p : out.pairs)
    used[p.first] = true;
  for (std::size_t t = 0; t < triggers.size(); ++t)
  {
    if (!used[t])
      out.unmatched.push_back(t);
  }
  return out;
}

OffsetEstimate estimate_bundle_offset(const RecordingBundle& bundle)
{
  const ImuSequence& a = bundle.mcu_imu;
  const ImuSequence& b = bundle.smartphone_imu;
  return estimate_offset(a, b, common_grid_rate(a, b, bundle.config.sync_rate_hz));
}

RemapResult remap_timestamps(const RecordingBundle& bundle, Nanos dt_sm)
{
  if (bundle.domain != "native")
    throw StateError("remap_timestamps: bundle is already in the '" + bundle.domain + "' domain");

  RemapResult out;
  try
  {
    out.association = associate_triggers(bundle.triggers, bundle.depth_frames, bundle.config.depthPeriod());
  }
  catch (const AssociationError& e)
  {
    throw StateError(std::string("remap_timestamps: no trigger association: ") + e.what());
  }

  // Inverse of t^S = t^M + dt_SM.
  const ClockMapping to_mcu = invert(ClockMapping::pureOffset(dt_sm));
  RecordingBundle& b = out.bundle;
  b = bundle;
  b.domain = "mcu";

  std::vector<TimeInstant> imu_ts;
  imu_ts.reserve(bundle.smartphone_imu.size());
  for (TimeInstant t : bundle.smartphone_imu.timestamps())
    imu_ts.push_back(map_instant(to_mcu, t));
  b.smartphone_imu = ImuSequence(std::move(imu_ts), bundle.smartphone_imu.angularVelocity(),
                                 bundle.smartphone_imu.acceleration());
  b.smartphone_t0 = map_instant(to_mcu, bundle.smartphone_t0);
  for (TimeInstant& t : b.smartphone_frames)
    t = map_instant(to_mcu, t);
  for (RowIntensityProfile& p : b.profiles)
    p.frame_start = map_instant(to_mcu, p.frame_start);

  b.depth_frames.clear();
  for (const auto& [trigger, frame] : out.association.pairs)
    b.depth_frames.push_back(bundle.triggers[trigger]);
  return out;
}

void write_remapped(const RemapResult& remapped, const fs::path& bundle_dir)
{
  const fs::path out_dir = bundle_dir / "mcu";
  write_bundle(remapped.bundle, out_dir);
  std::ofstream assoc(out_dir / "associations.csv");
  if (!assoc)
    throw FormatError("cannot write associations.csv");
  assoc << "trigger_index,frame_index\n";
  for (const auto& [trigger, frame] : remapped.association.pairs)
    assoc << trigger << ',' << frame << '\n';
}

namespace
{

template <typename F>
auto stage(const char* name, F&& f)
{
  try
  {
    return f();
  }
  catch (const PipelineError&)
  {
    throw;
  }
  catch (const DataError& e)
  {
    throw PipelineError(name, e.what());
  }
}

std::optional<std::pair<double, double>> firstRowWindow(const SessionConfig& cfg, const EvalConfig& eval)
{
  if (eval.first_row_window)
    return eval.first_row_window;
  if (!eval.auto_window || cfg.extra_depth_phase_ns == 0)
    return std::nullopt;
  const StrobeTrainConfig& s = cfg.strobes;
  const double tau = static_cast<double>(cfg.row_readout_ns);
  const double first_offset = static_cast<double>(cfg.extra_depth_phase_ns + s.retransmit_latency_ns -
                                                  static_cast<Nanos>(s.center_index - 1) * s.interval_ns);
  const double expected = cfg.rows / 2 + first_offset / tau;
  const double half = 0.5 * static_cast<double>(s.interval_ns) / tau;
  return std::make_pair(expected - half, expected + half);
}

PeakSet peaksOf(const RowIntensityProfile& p, const EvalConfig& eval)
{
  return detect_peaks(gaussian_smooth(p, eval.kernel_rows), eval.min_height, eval.min_separation_rows,
                      eval.kernel_rows);
}

}  // namespace

LaunchAnalysis analyze_bundle(const RecordingBundle& bundle, const EvalConfig& eval)
{
  const SessionConfig& cfg = bundle.config;
  if (bundle.domain != "native")
    throw StateError("analyze_bundle: expects a bundle in native clock domains");
  if (bundle.triggers.empty())
    throw StateError("analyze_bundle: no trigger timestamps");

  LaunchAnalysis a;
  a.offset = stage("time-sync", [&] { return estimate_bundle_offset(bundle); });

  const TimeInstant t_s0_mcu = map_instant(invert(ClockMapping::pureOffset(a.offset.offset_ns)), bundle.smartphone_t0);
  const TimeInstant t_d0_mcu = bundle.triggers.front();
  a.phase = cfg.phase_override ? *cfg.phase_override
                               : quantize_phase(compute_phase_shift(t_s0_mcu, t_d0_mcu, cfg.frame_period_ns),
                                                cfg.phase_step_ns);

  const RemapResult remapped = stage("extract", [&] { return remap_timestamps(bundle, a.offset.offset_ns); });
  a.association = remapped.association;

  const FrameSchedule phone(t_s0_mcu, cfg.frame_period_ns);
  const FrameSchedule depth(bundle.triggers.back(), cfg.depthPeriod());
  a.phase_error_ns = folded_offset(phone, depth);

  stage("strobe-eval", [&] {
    if (bundle.profiles.empty())
      throw InsufficientDataError("no row profiles in bundle");
    const auto window = firstRowWindow(cfg, eval);
    const std::size_t n_trial = std::min(bundle.profiles.size(), static_cast<std::size_t>(std::max(1, eval.frames_per_trial)));
    const RowIntensityProfile mean = average_profiles(std::span(bundle.profiles).first(n_trial));
    a.trial_peaks = peaksOf(mean, eval);
    a.row_time_scale_ns = row_time_scale(a.trial_peaks, cfg.strobes.interval_ns);
    a.tracked_row = track_strobe_row(std::span(&a.trial_peaks, 1), eval.strobe_index, window).front();

    const double mid = cfg.rows / 2;
    if (!a.trial_peaks.empty())
    {
      a.center_band_row = *std::min_element(a.trial_peaks.rows.begin(), a.trial_peaks.rows.end(),
                                            [&](double x, double y) { return std::abs(x - mid) < std::abs(y - mid); });
    }
    if (a.tracked_row)
    {
      a.center_strobe_offset_ns = (*a.tracked_row - mid) * a.row_time_scale_ns +
                                  static_cast<double>(static_cast<Nanos>(cfg.strobes.center_index - eval.strobe_index) *
                                                      cfg.strobes.interval_ns);
    }

    if (bundle.profiles.size() >= 2)
    {
      for (std::size_t i = 0; i < bundle.profiles.size(); ++i)
      {
        const PeakSet peaks = peaksOf(bundle.profiles[i], eval);
        const auto row = track_strobe_row(std::span(&peaks, 1), eval.strobe_index, window).front();
        if (row)
          a.drift_pairs.push_back({remapped.bundle.smartphone_frames[i], *row});
      }
    }
    return 0;
  });
  return a;
}

namespace
{

SyncReport summarize(const std::vector<LaunchAnalysis>& runs, const RecordingBundle& first, const EvalConfig& eval,
                     bool drift)
{
  (void)eval;
  const LaunchAnalysis& a = runs.front();
  SyncReport r;
  r.offset = a.offset;
  r.phase = a.phase;
  r.applied_shift_ns = first.applied_shift_ns;
  r.phase_error_ns = a.phase_error_ns;
  r.residual_misalignment_ns = a.phase_error_ns < 0 ? -a.phase_error_ns : a.phase_error_ns;
  r.associated_frames = a.association.pairs.size();
  r.dropped_frames = a.association.dropped.size();
  r.center_band_row = a.center_band_row;
  r.center_strobe_offset_ns = a.center_strobe_offset_ns;
  r.launches = runs.size();
  r.config_hash = config_hash(first.config);
  r.seed = first.config.seed;
  r.format = first.format;

  CompensatedSum scale;
  for (const auto& run : runs)
    scale.add(run.row_time_scale_ns);
  r.row_time_scale_ns = scale.value() / static_cast<double>(runs.size());

  if (runs.size() >= 4)
  {
    std::vector<std::optional<double>> rows;
    for (const auto& run : runs)
      rows.push_back(run.tracked_row);
    r.precision = stage("strobe-eval", [&] { return precision_stats(rows, r.row_time_scale_ns); });
  }
  if (drift && a.drift_pairs.size() >= 2)
  {
    r.drift_pairs = a.drift_pairs;
    r.drift = stage("strobe-eval", [&] { return drift_fit(a.drift_pairs, a.row_time_scale_ns); });
  }
  return r;
}

}  // namespace

SyncReport run_pipeline(const PipelineConfig& config)
{
  if (config.launches < 1)
    throw ConfigError("run_pipeline: launches must be >= 1");
  config.session.validate();

  std::vector<LaunchAnalysis> runs;
  runs.reserve(static_cast<std::size_t>(config.launches));
  std::optional<RecordingBundle> first;
  for (int i = 0; i < config.launches; ++i)
  {
    SessionConfig cfg = config.session;
    if (i > 0)
      cfg.seed = derive_seed(config.session.seed, 0x1000 + static_cast<std::uint64_t>(i));
    RecordingBundle bundle = stage("simulate", [&] { return simulate_session(cfg); });
    runs.push_back(analyze_bundle(bundle, config.eval));
    if (i == 0)
      first = std::move(bundle);
  }
  return summarize(runs, *first, config.eval, config.drift);
}

SyncReport run_pipeline(std::span<const RecordingBundle> bundles, const EvalConfig& eval, bool drift)
{
  if (bundles.empty())
    throw ArgumentError("run_pipeline: no bundles");
  std::vector<LaunchAnalysis> runs;
  for (const auto& b : bundles)
    runs.push_back(analyze_bundle(b, eval));
  return summarize(runs, bundles.front(), eval, drift);
}

void to_json(json& j, const OffsetEstimate& e)
{
  j = json{{"offset_ns", e.offset_ns},
           {"peak_correlation", e.peak_correlation},
           {"grid_step_ns", e.grid_step_ns},
           {"lag_samples", e.lag_samples}};
}

void to_json(json& j, const PrecisionReport& r)
{
  j = json{{"rows", r.rows},
           {"valid_trials", r.rows.size()},
           {"missing_trials", r.missing},
           {"mean_row", r.mean_row},
           {"iqr_rows", r.iqr_rows},
           {"sd_rows", r.sd_rows},
           {"iqr_us", r.iqr_us},
           {"sd_us", r.sd_us},
           {"row_time_scale_ns", r.row_time_scale_ns}};
}

void to_json(json& j, const DriftReport& r)
{
  j = json{{"slope_us_per_min", r.slope_us_per_min},
           {"slope_rows_per_s", r.slope_rows_per_s},
           {"intercept_row", r.intercept_row},
           {"intercept_time_ns", r.intercept_time.ns()},
           {"residual_sd_rows", r.residual_sd_rows},
           {"pair_count", r.pair_count}};
}

void to_json(json& j, const TriggerAssociation& a)
{
  j = json{{"pairs", a.pairs}, {"dropped", a.dropped}, {"unmatched", a.unmatched}};
}

void to_json(json& j, const SyncReport& r)
{
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  j = json{{"offset", r.offset},
           {"phase_correction", r.phase},
           {"applied_shift_ns", r.applied_shift_ns},
           {"residual_misalignment_ns", r.residual_misalignment_ns},
           {"phase_error_ns", r.phase_error_ns},
           {"associated_frames", r.associated_frames},
           {"dropped_frames", r.dropped_frames},
           {"row_time_scale_ns", r.row_time_scale_ns},
           {"center_band_row", opt(r.center_band_row)},
           {"center_strobe_offset_ns", opt(r.center_strobe_offset_ns)},
           {"precision", opt(r.precision)},
           {"drift", opt(r.drift)},
           {"launches", r.launches},
           {"provenance", {{"config_hash", r.config_hash}, {"seed", r.seed}, {"format", r.format}}}};
}

void to_json(json& j, const EvalConfig& e)
{
  j = json{{"kernel_rows", e.kernel_rows},
           {"min_height", e.min_height},
           {"min_separation_rows", e.min_separation_rows},
           {"strobe_index", e.strobe_index},
           {"frames_per_trial", e.frames_per_trial},
           {"auto_window", e.auto_window},
           {"first_row_window", e.first_row_window ? json{e.first_row_window->first, e.first_row_window->second}
                                                   : json(nullptr)}};
}

void from_json(const json& j, EvalConfig& e)
{
  e.kernel_rows = j.value("kernel_rows", e.kernel_rows);
  e.min_height = j.value("min_height", e.min_height);
  e.min_separation_rows = j.value("min_separation_rows", e.min_separation_rows);
  e.strobe_index = j.value("strobe_index", e.strobe_index);
  e.frames_per_trial = j.value("frames_per_trial", e.frames_per_trial);
  e.auto_window = j.value("auto_window", e.auto_window);
  if (j.contains("first_row_window") && !j.at("first_row_window").is_null())
  {
    const auto w = j.at("first_row_window").get<std::vector<double>>();
    if (w.size() != 2)
      throw ConfigError("first_row_window must be [lo, hi]");
    e.first_row_window = std::make_pair(w[0], w[1]);
  }
}

}  // namespace sds
