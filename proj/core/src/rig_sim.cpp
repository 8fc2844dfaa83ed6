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

#include <sds/rig_sim.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <sds/errors.hpp>

namespace sds
{

MotionProfile MotionProfile::handTwist(TimeInstant start, std::uint64_t seed)
{
  MotionProfile p;
  p.components = {{1.75, 1.0, 0.0}, {1.1, 1.5, 0.0}, {0.65, 2.5, 0.0}};
  p.start = start;
  p.duration_s = 2.0;
  p.seed = seed;
  return p;
}

double MotionProfile::maxFrequencyHz() const
{
  double f = axis_wander_hz;
  for (const Sinusoid& c : components)
  {
    if (c.amplitude != 0.0)
      f = std::max(f, c.frequency_hz);
  }
  return f;
}

AngularMotion::AngularMotion(MotionProfile profile) : profile_(std::move(profile))
{
  if (!(profile_.duration_s > 0.0))
    throw ArgumentError("MotionProfile: duration must be positive");
  std::mt19937_64 rng(profile_.seed);
  std::uniform_real_distribution<double> polar(0.3, 1.2);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
  polar0_ = polar(rng);
  azimuth0_ = azimuth(rng);
}

double AngularMotion::signedRate(TimeInstant t) const
{
  const double tau = static_cast<double>(t - profile_.start) * 1e-9;
  if (tau < 0.0 || tau > profile_.duration_s)
    return 0.0;
  double s = 0.0;
  for (const Sinusoid& c : profile_.components)
    s += c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency_hz * tau + c.phase_rad);
  return s;
}

double AngularMotion::magnitude(TimeInstant t) const
{
  return std::abs(signedRate(t));
}

Vec3 AngularMotion::axis(TimeInstant t) const
{
  const double tau = static_cast<double>(t - profile_.start) * 1e-9;
  const double w = 2.0 * std::numbers::pi * profile_.axis_wander_hz * tau;
  const double polar = polar0_ + 0.35 * std::sin(w);
  const double azimuth = azimuth0_ + w;
  return Vec3(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)).normalized();
}

Vec3 AngularMotion::angularVelocity(TimeInstant t) const
{
  return signedRate(t) * axis(t);
}

AngularMotion synth_motion(const MotionProfile& profile)
{
  return AngularMotion(profile);
}

ImuSequence simulate_imu(const AngularMotion& motion, const ClockModel& clock, const ImuSimConfig& cfg)
{
  if (!(cfg.rate_hz > 0.0))
    throw ArgumentError("simulate_imu: rate must be positive");
  if (cfg.duration_s < 2.0 / cfg.rate_hz)
    throw ArgumentError("simulate_imu: window shorter than two samples");
  if (motion.profile().maxFrequencyHz() > cfg.rate_hz / 10.0)
    throw ArgumentError("simulate_imu: motion is not band-limited to rate/10");
  if (cfg.noise_sd < 0.0)
    throw ArgumentError("simulate_imu: negative noise");

  const double step = 1e9 / cfg.rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.rate_hz + 1e-9)) + 1;
  std::vector<TimeInstant> truth;
  truth.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    truth.push_back(cfg.start + static_cast<Nanos>(std::llround(static_cast<double>(k) * step)));

  std::vector<Vec3> gyro;
  gyro.reserve(n);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sd > 0.0 ? cfg.noise_sd : 1.0);
  for (TimeInstant t : truth)
  {
    Vec3 w = motion.angularVelocity(t);
    if (cfg.noise_sd > 0.0)
    {
      for (int i = 0; i < 3; ++i)
        w[i] += noise(rng);
    }
    gyro.push_back(w);
  }
  return ImuSequence(sample_clock(clock, truth), std::move(gyro));
}

void StrobeTrainConfig::validate() const
{
  if (strobes_per_train < 1)
    throw ConfigError("strobe train needs at least one strobe");
  if (center_index < 1 || center_index > strobes_per_train)
    throw ConfigError("strobe center_index must be within [1, strobes_per_train]");
  if (interval_ns <= 0 || strobe_duration_ns <= 0)
    throw ConfigError("strobe interval and duration must be positive");
  if (retransmit_latency_ns < 0)
    throw ConfigError("re-transmitter latency must be non-negative");
}

std::vector<TimeInstant> strobe_times(const FrameSchedule& depth, const StrobeTrainConfig& cfg, std::int64_t m)
{
  cfg.validate();
  const TimeInstant mid = exposure_times(depth, m);
  std::vector<TimeInstant> out;
  out.reserve(static_cast<std::size_t>(cfg.strobes_per_train));
  for (int k = 1; k <= cfg.strobes_per_train; ++k)
    out.push_back(mid + static_cast<Nanos>(k - cfg.center_index) * cfg.interval_ns + cfg.retransmit_latency_ns);
  return out;
}

void RollingShutterConfig::validate() const
{
  if (rows < 2)
    throw ConfigError("rolling shutter needs at least two rows");
  if (row_readout_ns <= 0 || exposure_ns <= 0 || reference_strobe_ns <= 0)
    throw ConfigError("row readout, exposure and reference strobe must be positive");
  if (readoutSpan() >= schedule.period())
    throw ConfigError("rows * row_readout must be shorter than the frame period");
}

RowIntensityProfile render_row_profile(std::span<const TimeInstant> strobes, Nanos strobe_duration_ns,
                                       const RollingShutterConfig& shutter, std::int64_t frame,
                                       const SensorNoise& noise)
{
  return render_row_profile_at(strobes, strobe_duration_ns, shutter, exposure_times(shutter.schedule, frame), frame,
                               noise);
}

RowIntensityProfile render_row_profile_at(std::span<const TimeInstant> strobes, Nanos strobe_duration_ns,
                                          const RollingShutterConfig& shutter, TimeInstant midpoint,
                                          std::int64_t frame_index, const SensorNoise& noise)
{
  shutter.validate();
  if (strobe_duration_ns <= 0)
    throw ArgumentError("render_row_profile: strobe duration must be positive");

  RowIntensityProfile out;
  out.frame_index = frame_index;
  out.frame_start = shutter.rowStart(midpoint, 0);
  out.intensities.assign(static_cast<std::size_t>(shutter.rows), 0.0);

  const double tau = static_cast<double>(shutter.row_readout_ns);
  const double exposure = static_cast<double>(shutter.exposure_ns);
  const double half = 0.5 * static_cast<double>(strobe_duration_ns);
  const double unit = static_cast<double>(shutter.reference_strobe_ns);

  for (TimeInstant s : strobes)
  {
    // Row windows are [r * tau, r * tau + exposure] relative to row 0's start.
    const double center = static_cast<double>(s - out.frame_start);
    const double p0 = center - half;
    const double p1 = center + half;
    const double first = std::floor((p0 - exposure) / tau);
    const double last = std::ceil(p1 / tau);
    if (last < 0.0 || first >= shutter.rows)
      continue;
    const int r_lo = static_cast<int>(std::max(0.0, first));
    const int r_hi = static_cast<int>(std::min<double>(shutter.rows - 1, last));
    for (int r = r_lo; r <= r_hi; ++r)
    {
      const double w0 = static_cast<double>(r) * tau;
      const double overlap = std::min(p1, w0 + exposure) - std::max(p0, w0);
      if (overlap > 0.0)
        out.intensities[static_cast<std::size_t>(r)] += overlap / unit;
    }
  }

  if (noise.floor != 0.0 || noise.sd > 0.0)
  {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> dist(0.0, noise.sd > 0.0 ? noise.sd : 1.0);
    for (double& v : out.intensities)
    {
      v += noise.floor;
      if (noise.sd > 0.0)
        v += dist(rng);
      v = std::max(0.0, v);
    }
  }
  return out;
}

}  // namespace sds
