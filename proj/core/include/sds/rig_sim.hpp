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

#ifndef SDS_RIG_SIM_HPP
#define SDS_RIG_SIM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <sds/chrono.hpp>
#include <sds/frame_align.hpp>
#include <sds/gyro_sync.hpp>

namespace sds
{

struct Sinusoid
{
  double amplitude = 0.0;  // rad/s
  double frequency_hz = 0.0;
  double phase_rad = 0.0;
};

// Hand-twist surrogate. The signed rotation rate about a slowly wandering axis
// is a sum of sinusoids on [start, start + duration]; the rig is at rest
// outside that window.
struct MotionProfile
{
  std::vector<Sinusoid> components;
  TimeInstant start;
  double duration_s = 2.0;
  double axis_wander_hz = 0.3;
  std::uint64_t seed = 0;

  // Three harmonics of 0.5 Hz that vanish at both window ends; peak |w| ~ 3 rad/s.
  static MotionProfile handTwist(TimeInstant start = TimeInstant(0), std::uint64_t seed = 0);
  double maxFrequencyHz() const;
};

// Ground-truth angular velocity, queryable at any true-time instant.
class AngularMotion
{
public:
  explicit AngularMotion(MotionProfile profile);

  const MotionProfile& profile() const { return profile_; }
  // Sum of sinusoids inside the window, 0 outside.
  double signedRate(TimeInstant t) const;
  double magnitude(TimeInstant t) const;
  Vec3 axis(TimeInstant t) const;
  Vec3 angularVelocity(TimeInstant t) const;

private:
  MotionProfile profile_;
  double polar0_ = 0.0;
  double azimuth0_ = 0.0;
};

AngularMotion synth_motion(const MotionProfile& profile);

struct ImuSimConfig
{
  double rate_hz = 500.0;
  double noise_sd = 0.0;  // rad/s, per axis
  TimeInstant start;      // true time of the first sample
  double duration_s = 2.0;
  std::uint64_t seed = 0;
};

// Samples the motion on a uniform true-time grid, timestamps it with the
// clock model and adds white gyro noise. Throws ArgumentError when the motion
// is not band-limited to rate/10 or the window holds fewer than two samples.
ImuSequence simulate_imu(const AngularMotion& motion, const ClockModel& clock, const ImuSimConfig& cfg);

struct StrobeTrainConfig
{
  int strobes_per_train = 9;
  Nanos interval_ns = 1'600'000;
  Nanos strobe_duration_ns = 125'000;
  int center_index = 5;  // 1-based; coincides with the depth exposure midpoint
  Nanos retransmit_latency_ns = 0;

  Nanos trainSpan() const { return static_cast<Nanos>(strobes_per_train - 1) * interval_ns; }
  void validate() const;
  bool operator==(const StrobeTrainConfig&) const = default;
};

// Strobe k (1-based) of depth frame m fires at
// exposure_times(depth, m) + (k - center_index) * interval + latency.
std::vector<TimeInstant> strobe_times(const FrameSchedule& depth, const StrobeTrainConfig& cfg, std::int64_t m);

struct RollingShutterConfig
{
  int rows = 1080;
  Nanos row_readout_ns = 10'200;
  Nanos exposure_ns = 125'000;
  // Exposure midpoint of the middle row of each frame.
  FrameSchedule schedule{TimeInstant(0), 33'333'333};
  // A strobe of this duration fully inside one row window adds 1.0 to it.
  Nanos reference_strobe_ns = 125'000;

  int middleRow() const { return rows / 2; }
  Nanos readoutSpan() const { return static_cast<Nanos>(rows) * row_readout_ns; }
  // Exposure start of row r for a frame whose middle-row midpoint is `midpoint`.
  TimeInstant rowStart(TimeInstant midpoint, int row) const
  {
    return midpoint - exposure_ns / 2 + static_cast<Nanos>(row - middleRow()) * row_readout_ns;
  }
  void validate() const;
};

struct SensorNoise
{
  double floor = 0.0;  // constant dark level
  double sd = 0.0;     // per-row Gaussian noise
  std::uint64_t seed = 0;

  static SensorNoise none() { return {}; }
};

struct RowIntensityProfile
{
  std::int64_t frame_index = 0;
  TimeInstant frame_start;  // exposure start of row 0
  std::vector<double> intensities;

  bool operator==(const RowIntensityProfile&) const = default;
};

// Per-row brightness of one rolling-shutter frame: each strobe adds the
// temporal overlap of its pulse with a row's exposure window, in units of
// reference_strobe_ns. Values are clamped at zero after noise.
RowIntensityProfile render_row_profile(std::span<const TimeInstant> strobes, Nanos strobe_duration_ns,
                                       const RollingShutterConfig& shutter, std::int64_t frame,
                                       const SensorNoise& noise = SensorNoise::none());

// Same as above with the middle-row midpoint given directly (used when the
// frame clock is skewed relative to true time).
RowIntensityProfile render_row_profile_at(std::span<const TimeInstant> strobes, Nanos strobe_duration_ns,
                                          const RollingShutterConfig& shutter, TimeInstant midpoint,
                                          std::int64_t frame_index, const SensorNoise& noise = SensorNoise::none());

}  // namespace sds

#endif  // SDS_RIG_SIM_HPP
