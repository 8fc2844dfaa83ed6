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

#include <sds/session.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <sds/errors.hpp>
#include <sds/numeric.hpp>

namespace sds
{

namespace
{

// Independent RNG streams of one session.
enum Stream : std::uint64_t
{
  kMotion = 1,
  kMcuImuNoise,
  kPhoneImuNoise,
  kPhoneImuClock,
  kPhoneFrameClock,
  kDepthClock,
  kVideoPhase,
  kImuPhase,
  kLaunchError,
  kRenderBase = 1000,
};

Nanos floorMod(Nanos a, Nanos m)
{
  const Nanos r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

RecordingBundle simulate_session(const SessionConfig& cfg)
{
  cfg.validate();
  const auto seed = [&](std::uint64_t stream) { return derive_seed(cfg.seed, stream); };

  const Nanos period = cfg.frame_period_ns;
  const Nanos depth_period = cfg.depthPeriod();
  const RollingShutterConfig shutter = cfg.shutter();

  TimeInstant video_start(cfg.video_start_ns);
  if (cfg.randomize_video_phase)
  {
    std::mt19937_64 rng(seed(kVideoPhase));
    video_start += std::uniform_int_distribution<Nanos>(0, period - 1)(rng);
  }

  // Twist event seen by both IMUs.
  MotionProfile profile = MotionProfile::handTwist(TimeInstant(cfg.twist_start_ns), seed(kMotion));
  profile.duration_s = cfg.twist_duration_s;
  const AngularMotion motion(profile);

  ImuSimConfig mcu_imu_cfg;
  mcu_imu_cfg.rate_hz = cfg.imu_rate_hz;
  mcu_imu_cfg.noise_sd = cfg.gyro_noise_sd;
  mcu_imu_cfg.start = TimeInstant(cfg.twist_start_ns) - static_cast<Nanos>(std::llround(cfg.imu_margin_s * 1e9));
  mcu_imu_cfg.duration_s = cfg.twist_duration_s + 2.0 * cfg.imu_margin_s;
  mcu_imu_cfg.seed = seed(kMcuImuNoise);

  ImuSimConfig phone_imu_cfg = mcu_imu_cfg;
  phone_imu_cfg.seed = seed(kPhoneImuNoise);
  if (cfg.randomize_imu_phase)
  {
    std::mt19937_64 rng(seed(kImuPhase));
    const auto step = static_cast<Nanos>(std::llround(1e9 / cfg.imu_rate_hz));
    phone_imu_cfg.start += std::uniform_int_distribution<Nanos>(0, step - 1)(rng);
  }

  RecordingBundle bundle;
  bundle.config = cfg;
  bundle.mcu_imu = simulate_imu(motion, ClockModel{}, mcu_imu_cfg);
  bundle.smartphone_imu = simulate_imu(motion, cfg.smartphone_clock.model(seed(kPhoneImuClock)), phone_imu_cfg);

  // Smartphone frames are periodic in the smartphone clock.
  const ClockMapping phone = {cfg.smartphone_clock.offset_ns, cfg.smartphone_clock.skew};
  const ClockMapping phone_inv = invert(phone);
  const TimeInstant phone_t0 = map_instant(phone, video_start);
  auto phone_true_midpoint = [&](std::int64_t n) { return map_instant(phone_inv, phone_t0 + period * n); };

  Nanos launch_error = 0;
  if (cfg.launch_jitter_sd_ns > 0.0)
  {
    std::mt19937_64 rng(seed(kLaunchError));
    launch_error = std::llround(std::normal_distribution<double>(0.0, cfg.launch_jitter_sd_ns)(rng));
  }

  // Reported first-frame timestamp; the same clock stream stamps every frame.
  const ClockModel frame_clock = cfg.smartphone_clock.model(seed(kPhoneFrameClock));
  const TimeInstant reported_t0 = sample_clock(frame_clock, std::vector<TimeInstant>{video_start}).front() + launch_error;

  // Reference point: first trigger, MCU domain.
  const TimeInstant first_trigger(cfg.trigger_start_ns);

  PhaseCorrection correction;
  if (cfg.phase_override)
  {
    correction = *cfg.phase_override;
  }
  else
  {
    const OffsetEstimate est = estimate_offset(bundle.mcu_imu, bundle.smartphone_imu,
                                                   common_grid_rate(bundle.mcu_imu, bundle.smartphone_imu, cfg.sync_rate_hz));
    const TimeInstant t_s0_mcu = map_instant(invert(ClockMapping::pureOffset(est.offset_ns)), reported_t0);
    correction = quantize_phase(compute_phase_shift(t_s0_mcu, first_trigger, period), cfg.phase_step_ns);
  }
  const Nanos applied = floorMod(correction.appliedShift() + cfg.extra_depth_phase_ns, period);

  // The MCU shifts every trigger after the correction point.
  const Nanos correction_time = (video_start + cfg.correction_latency_ns).ns();
  const std::int64_t k_c =
      std::max<std::int64_t>(0, (correction_time - cfg.trigger_start_ns + depth_period - 1) / depth_period);
  auto trigger_time = [&](std::int64_t k) {
    return first_trigger + depth_period * k + (k >= k_c ? applied : 0);
  };

  struct Pairing
  {
    std::int64_t depth;
    std::int64_t frame;
  };
  std::vector<Pairing> rendered;
  rendered.reserve(static_cast<std::size_t>(cfg.rendered_frames));
  for (std::int64_t m = k_c + 1; static_cast<int>(rendered.size()) < cfg.rendered_frames; ++m)
  {
    const TimeInstant in_phone = map_instant(phone, trigger_time(m));
    const auto n = static_cast<std::int64_t>(std::llround(static_cast<double>(in_phone - phone_t0) / period));
    if (n >= 1 && (rendered.empty() || n > rendered.back().frame))
      rendered.push_back({m, n});
  }
  const std::int64_t trigger_count = rendered.back().depth + 2;

  bundle.triggers.reserve(static_cast<std::size_t>(trigger_count));
  for (std::int64_t k = 0; k < trigger_count; ++k)
    bundle.triggers.push_back(trigger_time(k));

  const std::set<std::int64_t> dropped(cfg.dropped_depth_frames.begin(), cfg.dropped_depth_frames.end());
  std::vector<TimeInstant> captured;
  for (std::int64_t k = 0; k < trigger_count; ++k)
  {
    if (!dropped.contains(k))
      captured.push_back(bundle.triggers[static_cast<std::size_t>(k)]);
  }
  bundle.depth_frames = sample_clock(cfg.depth_clock.model(seed(kDepthClock)), captured);

  // Reported smartphone timestamps of frame 0 and of every rendered frame.
  std::vector<TimeInstant> true_mid;
  true_mid.reserve(rendered.size());
  for (const auto& p : rendered)
    true_mid.push_back(phone_true_midpoint(p.frame));
  {
    std::vector<TimeInstant> with_first{video_start};
    with_first.insert(with_first.end(), true_mid.begin(), true_mid.end());
    const std::vector<TimeInstant> stamped = sample_clock(frame_clock, with_first);
    for (std::size_t i = 0; i < rendered.size(); ++i)
    {
      bundle.smartphone_frame_indices.push_back(rendered[i].frame);
      bundle.smartphone_frames.push_back(stamped[i + 1] + launch_error);
    }
  }
  bundle.smartphone_t0 = reported_t0;

  SessionTruth truth;
  truth.smartphone_offset_ns = phone_t0 - video_start;
  truth.video_start_ns = video_start.ns();
  truth.launch_error_ns = launch_error;
  truth.applied_shift_ns = applied;
  truth.correction_trigger = k_c;
  truth.residual_ns = true_mid.front() - trigger_time(rendered.front().depth);

  const StrobeTrainConfig& sc = cfg.strobes;
  bundle.profiles.reserve(rendered.size());
  for (std::size_t i = 0; i < rendered.size(); ++i)
  {
    const std::int64_t m = rendered[i].depth;
    std::vector<TimeInstant> strobes;
    for (std::int64_t mm = std::max<std::int64_t>(0, m - 1); mm <= std::min(m + 1, trigger_count - 1); ++mm)
    {
      for (int k = 1; k <= sc.strobes_per_train; ++k)
      {
        strobes.push_back(trigger_time(mm) + static_cast<Nanos>(k - sc.center_index) * sc.interval_ns +
                          sc.retransmit_latency_ns);
      }
    }
    const SensorNoise noise{cfg.sensor_noise_floor, cfg.sensor_noise_sd, seed(kRenderBase + i)};
    RowIntensityProfile p =
        render_row_profile_at(strobes, sc.strobe_duration_ns, shutter, true_mid[i], rendered[i].frame, noise);
    p.frame_start = shutter.rowStart(bundle.smartphone_frames[i], 0);
    bundle.profiles.push_back(std::move(p));

    const double center = static_cast<double>(trigger_time(m) + sc.retransmit_latency_ns - true_mid[i]);
    truth.center_strobe_rows.push_back(shutter.middleRow() + center / static_cast<double>(cfg.row_readout_ns));
  }

  bundle.phase_correction = correction;
  bundle.applied_shift_ns = applied;
  bundle.truth = std::move(truth);
  return bundle;
}

}  // namespace sds
