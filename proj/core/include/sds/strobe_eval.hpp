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

#ifndef SDS_STROBE_EVAL_HPP
#define SDS_STROBE_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <sds/chrono.hpp>
#include <sds/rig_sim.hpp>

namespace sds
{

// Detected bright bands of one (averaged, smoothed) row profile.
struct PeakSet
{
  std::vector<double> rows;  // fractional, strictly increasing
  std::vector<double> heights;
  int kernel_rows = 1;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

struct PrecisionReport
{
  std::vector<double> rows;  // valid per-trial rows used for the statistics
  std::size_t missing = 0;
  double mean_row = 0.0;
  double iqr_rows = 0.0;
  double sd_rows = 0.0;
  double iqr_us = 0.0;
  double sd_us = 0.0;
  double row_time_scale_ns = 0.0;
};

struct DriftPair
{
  TimeInstant timestamp;
  double row = 0.0;
};

struct DriftReport
{
  double slope_us_per_min = 0.0;
  double slope_rows_per_s = 0.0;
  // Fitted row at the earliest timestamp.
  double intercept_row = 0.0;
  TimeInstant intercept_time;
  double residual_sd_rows = 0.0;
  std::size_t pair_count = 0;
};

// Element-wise mean. Throws ArgumentError on empty input or differing row
// counts.
RowIntensityProfile average_profiles(std::span<const RowIntensityProfile> profiles);

// Normalized Gaussian (sigma = kernel_rows / 4, kernel_rows taps) with
// half-sample symmetric padding, which preserves the profile's total mass.
// kernel_rows must be odd, >= 1 and smaller than the row count.
RowIntensityProfile gaussian_smooth(const RowIntensityProfile& profile, int kernel_rows);
std::vector<double> gaussian_kernel(int kernel_rows);

// Interior local maxima of at least min_height * max(profile), greedily
// thinned to min_separation rows (tallest first), refined by a 3-point
// parabola. Throws DegenerateSignalError for a constant profile.
PeakSet detect_peaks(const RowIntensityProfile& profile, double min_height, int min_separation,
                     int kernel_rows = 1);

// strobe_interval / mean spacing of neighbouring peaks, in ns per row.
// Throws InsufficientDataError for fewer than two peaks.
double row_time_scale(const PeakSet& peaks, Nanos strobe_interval);

// Fractional row of the k-th (1-based) detected peak of every trial. A trial
// is reported missing when it has fewer than k peaks or, if first_row_window
// is given, when its first peak falls outside that window (the first strobe of
// the train is then not the first visible one).
std::vector<std::optional<double>> track_strobe_row(std::span<const PeakSet> trials, int k,
                                                    std::optional<std::pair<double, double>> first_row_window = {});

// Linear-interpolated quartiles and population SD of the rows, scaled to us.
// Needs at least four rows (InsufficientDataError).
PrecisionReport precision_stats(std::span<const double> rows, double scale_ns_per_row);
PrecisionReport precision_stats(std::span<const std::optional<double>> rows, double scale_ns_per_row);

// Ordinary least squares of row against time; slope reported in us/min.
// Throws ArgumentError for fewer than two pairs or identical timestamps.
DriftReport drift_fit(std::span<const DriftPair> pairs, double scale_ns_per_row);

// Plot data with header frame_timestamp_ns,row_position.
void write_drift_plot_csv(const std::filesystem::path& path, std::span<const DriftPair> pairs);

// Linear-interpolated quantile of sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace sds

#endif  // SDS_STROBE_EVAL_HPP
