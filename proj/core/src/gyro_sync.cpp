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

#include <sds/gyro_sync.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <sds/errors.hpp>

namespace sds
{

ImuSequence::ImuSequence(std::vector<TimeInstant> timestamps, std::vector<Vec3> angular_velocity,
                         std::optional<std::vector<Vec3>> acceleration)
  : timestamps_(std::move(timestamps))
  , angular_velocity_(std::move(angular_velocity))
  , acceleration_(std::move(acceleration))
{
  if (angular_velocity_.size() != timestamps_.size())
    throw ArgumentError("ImuSequence: angular velocity count differs from timestamp count");
  if (acceleration_ && acceleration_->size() != timestamps_.size())
    throw ArgumentError("ImuSequence: acceleration count differs from timestamp count");
  for (std::size_t i = 1; i < timestamps_.size(); ++i)
  {
    if (!(timestamps_[i - 1] < timestamps_[i]))
      throw ArgumentError("ImuSequence: timestamps not strictly increasing at index " + std::to_string(i));
  }
}

double ImuSequence::nativeRateHz() const
{
  if (timestamps_.size() < 2)
    return 0.0;
  const double span = static_cast<double>(timestamps_.back() - timestamps_.front());
  return static_cast<double>(timestamps_.size() - 1) * 1e9 / span;
}

ImuSequence ImuSequence::shifted(Nanos delta) const
{
  std::vector<TimeInstant> ts;
  ts.reserve(timestamps_.size());
  for (TimeInstant t : timestamps_)
    ts.push_back(t + delta);
  return ImuSequence(std::move(ts), angular_velocity_, acceleration_);
}

ScalarSeries magnitude_series(const ImuSequence& s)
{
  if (s.empty())
    throw ArgumentError("magnitude_series: empty sequence");
  ScalarSeries out;
  out.timestamps = s.timestamps();
  out.values.reserve(s.size());
  for (const Vec3& w : s.angularVelocity())
    out.values.push_back(w.norm());
  return out;
}

UniformSeries resample_uniform(const ScalarSeries& series, double rate_hz)
{
  const auto& ts = series.timestamps;
  const auto& vs = series.values;
  if (ts.size() != vs.size())
    throw ArgumentError("resample_uniform: timestamp/value count mismatch");
  if (ts.size() < 2)
    throw ArgumentError("resample_uniform: need at least two samples");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz))
    throw ArgumentError("resample_uniform: rate must be positive");

  UniformSeries out;
  out.start = ts.front();
  out.rate_hz = rate_hz;

  const double step = 1e9 / rate_hz;
  const double span = static_cast<double>(ts.back() - ts.front());
  // Tolerate representation error of k * step at the last node.
  const auto count = static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
  out.values.reserve(count);

  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k)
  {
    const double pos = std::min(static_cast<double>(k) * step, span);
    while (seg + 2 < ts.size() && static_cast<double>(ts[seg + 1] - ts.front()) <= pos)
      ++seg;
    const double t0 = static_cast<double>(ts[seg] - ts.front());
    const double t1 = static_cast<double>(ts[seg + 1] - ts.front());
    const double w = std::clamp((pos - t0) / (t1 - t0), 0.0, 1.0);
    out.values.push_back((1.0 - w) * vs[seg] + w * vs[seg + 1]);
  }
  return out;
}

namespace
{

double variance(std::span<const double> xs)
{
  double mean = 0.0;
  for (double x : xs)
    mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs)
    acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

double pearson(const double* a, const double* b, std::size_t n)
{
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

CorrelationCurve cross_correlation_lag(const UniformSeries& a, const UniformSeries& b)
{
  if (!(a.rate_hz > 0.0) || std::abs(a.rate_hz - b.rate_hz) > 1e-9 * a.rate_hz)
    throw ArgumentError("cross_correlation_lag: series rates differ");
  const auto na = static_cast<long>(a.values.size());
  const auto nb = static_cast<long>(b.values.size());
  if (na < 16 || nb < 16)
    throw ArgumentError("cross_correlation_lag: each series needs at least 16 samples");
  if (variance(a.values) <= 0.0 || variance(b.values) <= 0.0)
    throw DegenerateSignalError("cross_correlation_lag: zero-variance input");

  const long min_overlap = (std::min(na, nb) + 1) / 2;
  auto overlap = [&](long lag) { return std::min(na, nb - lag) - std::max(0L, -lag); };

  // overlap(lag) is unimodal in lag, so the admissible lags form one interval.
  long lo = -(na - 1);
  while (overlap(lo) < min_overlap)
    ++lo;
  long hi = nb - 1;
  while (overlap(hi) < min_overlap)
    --hi;

  CorrelationCurve out;
  out.min_lag = static_cast<int>(lo);
  out.curve.resize(static_cast<std::size_t>(hi - lo + 1));
  for (long lag = lo; lag <= hi; ++lag)
  {
    const long i0 = std::max(0L, -lag);
    out.curve[static_cast<std::size_t>(lag - lo)] =
        pearson(a.values.data() + i0, b.values.data() + i0 + lag, static_cast<std::size_t>(overlap(lag)));
  }

  const auto peak_it = std::max_element(out.curve.begin(), out.curve.end());
  out.lag = out.lagAt(static_cast<std::size_t>(peak_it - out.curve.begin()));
  out.peak = *peak_it;
  const auto ext_it = std::max_element(out.curve.begin(), out.curve.end(),
                                       [](double x, double y) { return std::abs(x) < std::abs(y); });
  out.extremum_lag = out.lagAt(static_cast<std::size_t>(ext_it - out.curve.begin()));
  out.extremum = *ext_it;
  return out;
}

double subsample_refine(std::span<const double> curve, std::size_t peak_index)
{
  if (peak_index == 0 || peak_index + 1 >= curve.size())
    throw BoundaryError("subsample_refine: peak at index " + std::to_string(peak_index) + " is on the boundary");
  const double ym = curve[peak_index - 1];
  const double y0 = curve[peak_index];
  const double yp = curve[peak_index + 1];
  if (y0 < ym || y0 < yp)
    throw ArgumentError("subsample_refine: index is not a local maximum");
  const double denom = ym - 2.0 * y0 + yp;
  if (denom == 0.0)
    return static_cast<double>(peak_index);
  return static_cast<double>(peak_index) + (ym - yp) / (2.0 * denom);
}

double common_grid_rate(const ImuSequence& a, const ImuSequence& b, double requested_hz)
{
  return std::min({requested_hz, a.nativeRateHz(), b.nativeRateHz()});
}

OffsetEstimate estimate_offset(const ImuSequence& a, const ImuSequence& b, double rate_hz,
                               const GyroSyncOptions& options)
{
  if (a.size() < 2 || b.size() < 2)
    throw ArgumentError("estimate_offset: each sequence needs at least two samples");
  const double native = std::min(a.nativeRateHz(), b.nativeRateHz());
  if (rate_hz > native * (1.0 + 1e-6))
    throw ArgumentError("estimate_offset: grid rate exceeds the native IMU rate");

  const UniformSeries ua = resample_uniform(magnitude_series(a), rate_hz);
  const UniformSeries ub = resample_uniform(magnitude_series(b), rate_hz);
  const CorrelationCurve cc = cross_correlation_lag(ua, ub);

  if (cc.lowConfidence(options.min_peak_correlation))
  {
    throw LowConfidenceError("estimate_offset: peak correlation " + std::to_string(cc.peak) + " (extremum " +
                                 std::to_string(cc.extremum) + ") below threshold " +
                                 std::to_string(options.min_peak_correlation),
                             cc.peak);
  }

  double lag = cc.lag;
  try
  {
    lag = cc.min_lag + subsample_refine(cc.curve, cc.indexOf(cc.lag));
  }
  catch (const BoundaryError&)
  {
    // Integer lag is the best available answer at the edge of the search.
  }

  OffsetEstimate est;
  est.grid_step_ns = ua.stepNs();
  est.peak_correlation = cc.peak;
  est.lag_samples = lag;
  const long double offset =
      static_cast<long double>(ub.start - ua.start) + static_cast<long double>(lag) * est.grid_step_ns;
  est.offset_ns = static_cast<Nanos>(std::llroundl(offset));
  return est;
}

}  // namespace sds
