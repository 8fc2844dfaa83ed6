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

#ifndef SDS_FRAME_ALIGN_HPP
#define SDS_FRAME_ALIGN_HPP

#include <cstdint>
#include <optional>

#include <sds/chrono.hpp>

namespace sds
{

inline constexpr Nanos kDefaultPhaseStepNs = 390;

// Periodic exposure midpoints t0 + period * n of a constant-rate camera,
// expressed in one clock domain.
class FrameSchedule
{
public:
  // Throws ArgumentError when period <= 0.
  FrameSchedule(TimeInstant t0, Nanos period, std::optional<std::int64_t> count = std::nullopt);

  TimeInstant t0() const { return t0_; }
  Nanos period() const { return period_; }
  const std::optional<std::int64_t>& count() const { return count_; }

  FrameSchedule shifted(Nanos delta) const { return FrameSchedule(t0_ + delta, period_, count_); }

private:
  TimeInstant t0_;
  Nanos period_;
  std::optional<std::int64_t> count_;
};

// Quantized trigger phase shift as programmed into the trigger hardware.
struct PhaseCorrection
{
  Nanos phase = 0;  // target shift, in [0, T)
  std::int64_t ticks = 0;
  Nanos step = kDefaultPhaseStepNs;
  Nanos residual = 0;  // phase - ticks * step, |residual| <= step / 2

  Nanos appliedShift() const { return ticks * step; }
  bool operator==(const PhaseCorrection&) const = default;
};

// t0 + period * n. Throws ArgumentError for n < 0 or n >= count.
TimeInstant exposure_times(const FrameSchedule& s, std::int64_t n);

// (t_s0 - t_d0) mod period, normalized into [0, period). Both instants must
// already be in the same clock domain. Throws ArgumentError when period <= 0.
Nanos compute_phase_shift(TimeInstant t_s0, TimeInstant t_d0, Nanos period);

// ticks = round-half-up(phase / step); residual = phase - ticks * step.
PhaseCorrection quantize_phase(Nanos phase, Nanos step = kDefaultPhaseStepNs);

// Signed offset between the closest exposure midpoints of the two schedules,
// (t_s0 - t_d0) mod T_min folded into (-T_min/2, T_min/2]. Periods must be
// equal or integer multiples of each other (ArgumentError otherwise).
Nanos folded_offset(const FrameSchedule& s, const FrameSchedule& d);

// |folded_offset(s, d)|; zero means the schedules are frame-synced.
Nanos residual_misalignment(const FrameSchedule& s, const FrameSchedule& d);

// Depth schedule after the trigger hardware applied the correction. Shifts
// forward only.
FrameSchedule apply_correction(const FrameSchedule& d, const PhaseCorrection& c);

}  // namespace sds

#endif  // SDS_FRAME_ALIGN_HPP
