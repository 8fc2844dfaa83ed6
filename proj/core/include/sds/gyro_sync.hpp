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

#ifndef SDS_GYRO_SYNC_HPP
#define SDS_GYRO_SYNC_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include <sds/chrono.hpp>

namespace sds
{

using Vec3 = Eigen::Vector3d;

// Timestamped gyroscope (and optionally accelerometer) samples, all in the
// clock domain of the device that recorded them.
class ImuSequence
{
public:
  ImuSequence() = default;
  // Throws ArgumentError unless timestamps are strictly increasing and all
  // vector lists have the timestamp count.
  ImuSequence(std::vector<TimeInstant> timestamps, std::vector<Vec3> angular_velocity,
              std::optional<std::vector<Vec3>> acceleration = std::nullopt);

  std::size_t size() const { return timestamps_.size(); }
  bool empty() const { return timestamps_.empty(); }
  const std::vector<TimeInstant>& timestamps() const { return timestamps_; }
  const std::vector<Vec3>& angularVelocity() const { return angular_velocity_; }
  const std::optional<std::vector<Vec3>>& acceleration() const { return acceleration_; }

  // Average sample rate over the whole span, Hz.
  double nativeRateHz() const;

  bool operator==(const ImuSequence&) const = default;

  // Same samples with every timestamp shifted by delta.
  ImuSequence shifted(Nanos delta) const;

private:
  std::vector<TimeInstant> timestamps_;
  std::vector<Vec3> angular_velocity_;
  std::optional<std::vector<Vec3>> acceleration_;
};

struct ScalarSeries
{
  std::vector<TimeInstant> timestamps;
  std::vector<double> values;
};

// Samples at start + k / rate_hz.
struct UniformSeries
{
  TimeInstant start;
  double rate_hz = 0.0;
  std::vector<double> values;

  double stepNs() const { return 1e9 / rate_hz; }
};

struct CorrelationCurve
{
  // Lag of the signed maximum; b[i + lag] pairs with a[i].
  int lag = 0;
  double peak = 0.0;
  // Lag and signed value of the maximum of |curve|.
  int extremum_lag = 0;
  double extremum = 0.0;
  // curve[j] is the normalized correlation at lag min_lag + j.
  int min_lag = 0;
  std::vector<double> curve;

  // Weak signed peak, or an anti-correlation at least as strong as min_peak.
  bool lowConfidence(double min_peak) const
  {
    return peak < min_peak || (min_peak > 0.0 && extremum <= -min_peak);
  }

  std::size_t indexOf(int l) const { return static_cast<std::size_t>(l - min_lag); }
  int lagAt(std::size_t index) const { return min_lag + static_cast<int>(index); }
};

struct OffsetEstimate
{
  // dt_SM: b's clock reads offset_ns later than a's for the same instant.
  Nanos offset_ns = 0;
  double peak_correlation = 0.0;
  double grid_step_ns = 0.0;
  // Refined lag in grid samples (integer when refinement hit the boundary).
  double lag_samples = 0.0;
};

struct GyroSyncOptions
{
  double min_peak_correlation = 0.6;
};

// Per-sample Euclidean norm of the angular velocity. Throws ArgumentError on
// an empty sequence.
ScalarSeries magnitude_series(const ImuSequence& s);

// Linear interpolation onto start + k / rate_hz up to the last timestamp
// (never extrapolates). Needs at least two samples.
UniformSeries resample_uniform(const ScalarSeries& series, double rate_hz);

// Zero-mean, unit-variance normalized cross-correlation over every lag whose
// overlap covers at least half of the shorter series.
CorrelationCurve cross_correlation_lag(const UniformSeries& a, const UniformSeries& b);

// Abscissa of the vertex of the parabola through curve[peak-1..peak+1].
// Throws BoundaryError when peak_index is the first or last element.
double subsample_refine(std::span<const double> curve, std::size_t peak_index);

// requested_hz capped at the slower native rate of a and b.
double common_grid_rate(const ImuSequence& a, const ImuSequence& b, double requested_hz);

// Clock offset between two IMUs that observed a common rotation. The result
// satisfies t_b = t_a + offset (positive when b's clock reads later).
// Throws LowConfidenceError when the correlation peak is below
// options.min_peak_correlation.
OffsetEstimate estimate_offset(const ImuSequence& a, const ImuSequence& b, double rate_hz,
                               const GyroSyncOptions& options = {});

}  // namespace sds

#endif  // SDS_GYRO_SYNC_HPP
