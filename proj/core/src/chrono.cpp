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

#include <sds/chrono.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <sds/errors.hpp>

namespace sds
{

namespace
{

Nanos checkedAdd(Nanos a, Nanos b)
{
  Nanos r = 0;
  if (__builtin_add_overflow(a, b, &r))
    throw RangeError("time instant overflow: " + std::to_string(a) + " + " + std::to_string(b));
  return r;
}

Nanos toNanosChecked(long double v)
{
  constexpr long double lo = static_cast<long double>(std::numeric_limits<Nanos>::min());
  constexpr long double hi = static_cast<long double>(std::numeric_limits<Nanos>::max());
  if (!(v >= lo && v < hi))
    throw RangeError("time value outside the int64 nanosecond range");
  return static_cast<Nanos>(std::llroundl(v));
}

}  // namespace

TimeInstant map_instant(const ClockMapping& m, TimeInstant t)
{
  // Split the offset so that the only inexact term is the small fractional
  // correction t * skew + frac, evaluated in extended precision.
  const long double whole = std::truncl(static_cast<long double>(m.offset_ns));
  const Nanos whole_ns = toNanosChecked(whole);
  const long double frac = static_cast<long double>(m.offset_ns) - whole;
  const long double correction = static_cast<long double>(t.ns()) * static_cast<long double>(m.skew) + frac;
  const Nanos correction_ns = toNanosChecked(correction);
  return TimeInstant(checkedAdd(checkedAdd(t.ns(), whole_ns), correction_ns));
}

ClockMapping invert(const ClockMapping& m)
{
  if (!(m.skew > -1.0))
    throw ArgumentError("clock mapping with skew <= -1 is not invertible");
  if (m.skew == 0.0)
    return {-m.offset_ns, 0.0};
  const long double rate = 1.0L + static_cast<long double>(m.skew);
  return {static_cast<double>(-static_cast<long double>(m.offset_ns) / rate),
          static_cast<double>(-static_cast<long double>(m.skew) / rate)};
}

ClockMapping compose(const ClockMapping& a, const ClockMapping& b)
{
  const long double sa = a.skew;
  const long double sb = b.skew;
  return {static_cast<double>(static_cast<long double>(b.offset_ns) * (1.0L + sa) + a.offset_ns),
          static_cast<double>(sa + sb + sa * sb)};
}

std::vector<TimeInstant> sample_clock(const ClockModel& model, std::span<const TimeInstant> true_times)
{
  for (std::size_t i = 1; i < true_times.size(); ++i)
  {
    if (!(true_times[i - 1] < true_times[i]))
      throw ArgumentError("sample_clock: true times must be strictly increasing (index " + std::to_string(i) + ")");
  }
  if (model.jitter_sd_ns < 0.0)
    throw ArgumentError("sample_clock: jitter_sd must be non-negative");

  const ClockMapping mapping = model.mapping();
  std::vector<TimeInstant> out;
  out.reserve(true_times.size());

  if (model.jitter_sd_ns == 0.0)
  {
    for (TimeInstant t : true_times)
      out.push_back(map_instant(mapping, t));
    return out;
  }

  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> jitter(0.0, model.jitter_sd_ns);
  for (TimeInstant t : true_times)
  {
    const Nanos noise = static_cast<Nanos>(std::llround(jitter(rng)));
    out.push_back(TimeInstant(checkedAdd(map_instant(mapping, t).ns(), noise)));
  }
  return out;
}

}  // namespace sds
