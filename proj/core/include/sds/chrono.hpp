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

#ifndef SDS_CHRONO_HPP
#define SDS_CHRONO_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace sds
{

// Signed duration in nanoseconds.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

// A point on one clock's time axis, in integer nanoseconds since that
// clock's (arbitrary) epoch. Instants from different clocks must not be mixed
// without going through a ClockMapping.
class TimeInstant
{
public:
  constexpr TimeInstant() = default;
  constexpr explicit TimeInstant(Nanos ns) : ns_(ns) {}

  static constexpr TimeInstant fromSeconds(double s)
  {
    return TimeInstant(static_cast<Nanos>(s * 1e9 + (s >= 0 ? 0.5 : -0.5)));
  }

  constexpr Nanos ns() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

  constexpr TimeInstant operator+(Nanos d) const { return TimeInstant(ns_ + d); }
  constexpr TimeInstant operator-(Nanos d) const { return TimeInstant(ns_ - d); }
  constexpr Nanos operator-(TimeInstant other) const { return ns_ - other.ns_; }
  constexpr TimeInstant& operator+=(Nanos d)
  {
    ns_ += d;
    return *this;
  }

  constexpr auto operator<=>(const TimeInstant&) const = default;

private:
  Nanos ns_ = 0;
};

// Affine relation t_target = t_source * (1 + skew) + offset.
//
// With skew = 0 this is the plain offset model t^S = t^M + dt_SM. The offset is
// kept as a double so that inverses and compositions of skewed mappings do not
// accumulate integer rounding; integer offsets are represented exactly.
struct ClockMapping
{
  double offset_ns = 0.0;
  double skew = 0.0;

  static constexpr ClockMapping identity() { return {}; }
  static constexpr ClockMapping pureOffset(Nanos offset) { return {static_cast<double>(offset), 0.0}; }

  bool operator==(const ClockMapping&) const = default;
};

// Applies the mapping, rounding half away from zero. Throws RangeError when
// the result does not fit into int64 nanoseconds.
TimeInstant map_instant(const ClockMapping& m, TimeInstant t);

// Inverse mapping. Requires skew > -1 (ArgumentError otherwise).
ClockMapping invert(const ClockMapping& m);

// compose(a, b)(t) == a(b(t)) within 1 ns.
ClockMapping compose(const ClockMapping& a, const ClockMapping& b);

// Simulated imperfect clock: affine mapping from true time plus zero-mean
// Gaussian timestamping jitter drawn from a seeded stream.
struct ClockModel
{
  double offset_ns = 0.0;
  double skew = 0.0;
  double jitter_sd_ns = 0.0;
  std::uint64_t seed = 0;

  ClockMapping mapping() const { return {offset_ns, skew}; }
};

// Timestamps the given true instants with the model's clock. true_times must
// be strictly increasing (ArgumentError otherwise). Deterministic per seed.
std::vector<TimeInstant> sample_clock(const ClockModel& model, std::span<const TimeInstant> true_times);

}  // namespace sds

#endif  // SDS_CHRONO_HPP
