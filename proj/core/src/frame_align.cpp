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

#include <sds/frame_align.hpp>

#include <algorithm>
#include <string>

#include <sds/errors.hpp>

namespace sds
{

namespace
{

Nanos floorMod(Nanos a, Nanos m)
{
  const Nanos r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

FrameSchedule::FrameSchedule(TimeInstant t0, Nanos period, std::optional<std::int64_t> count)
  : t0_(t0), period_(period), count_(count)
{
  if (period_ <= 0)
    throw ArgumentError("FrameSchedule: period must be positive");
  if (count_ && *count_ < 0)
    throw ArgumentError("FrameSchedule: negative frame count");
}

TimeInstant exposure_times(const FrameSchedule& s, std::int64_t n)
{
  if (n < 0 || (s.count() && n >= *s.count()))
    throw ArgumentError("exposure_times: frame index " + std::to_string(n) + " out of range");
  Nanos delta = 0;
  Nanos t = 0;
  if (__builtin_mul_overflow(s.period(), n, &delta) || __builtin_add_overflow(s.t0().ns(), delta, &t))
    throw RangeError("exposure_times: overflow");
  return TimeInstant(t);
}

Nanos compute_phase_shift(TimeInstant t_s0, TimeInstant t_d0, Nanos period)
{
  if (period <= 0)
    throw ArgumentError("compute_phase_shift: period must be positive");
  Nanos diff = 0;
  if (__builtin_sub_overflow(t_s0.ns(), t_d0.ns(), &diff))
    throw RangeError("compute_phase_shift: overflow");
  return floorMod(diff, period);
}

PhaseCorrection quantize_phase(Nanos phase, Nanos step)
{
  if (phase < 0)
    throw ArgumentError("quantize_phase: phase must be non-negative");
  if (step <= 0)
    throw ArgumentError("quantize_phase: step must be positive");
  PhaseCorrection c;
  c.phase = phase;
  c.step = step;
  // floor(phase / step + 1/2) without leaving integer arithmetic.
  c.ticks = phase / step + ((phase % step) * 2 >= step ? 1 : 0);
  c.residual = phase - c.ticks * step;
  return c;
}

Nanos folded_offset(const FrameSchedule& s, const FrameSchedule& d)
{
  const Nanos lo = std::min(s.period(), d.period());
  const Nanos hi = std::max(s.period(), d.period());
  if (hi % lo != 0)
  {
    throw ArgumentError("residual_misalignment: periods " + std::to_string(s.period()) + " and " +
                        std::to_string(d.period()) + " are not integer multiples");
  }
  Nanos r = compute_phase_shift(s.t0(), d.t0(), lo);
  // (-T/2, T/2]
  if (r * 2 > lo)
    r -= lo;
  return r;
}

Nanos residual_misalignment(const FrameSchedule& s, const FrameSchedule& d)
{
  const Nanos r = folded_offset(s, d);
  return r < 0 ? -r : r;
}

FrameSchedule apply_correction(const FrameSchedule& d, const PhaseCorrection& c)
{
  return d.shifted(c.appliedShift());
}

}  // namespace sds
