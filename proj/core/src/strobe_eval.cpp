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

#include <sds/strobe_eval.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include <sds/errors.hpp>
#include <sds/gyro_sync.hpp>
#include <sds/numeric.hpp>

namespace sds
{

RowIntensityProfile average_profiles(std::span<const RowIntensityProfile> profiles)
{
  if (profiles.empty())
    throw ArgumentError("average_profiles: no profiles");
  const std::size_t rows = profiles.front().intensities.size();
  for (const auto& p : profiles)
  {
    if (p.intensities.size() != rows)
      throw ArgumentError("average_profiles: row count mismatch");
  }
  RowIntensityProfile out;
  out.frame_index = profiles.front().frame_index;
  out.frame_start = profiles.front().frame_start;
  out.intensities.resize(rows);
  const double n = static_cast<double>(profiles.size());
  for (std::size_t r = 0; r < rows; ++r)
  {
    CompensatedSum s;
    for (const auto& p : profiles)
      s.add(p.intensities[r]);
    out.intensities[r] = s.value() / n;
  }
  return out;
}

std::vector<double> gaussian_kernel(int kernel_rows)
{
  if (kernel_rows < 1 || kernel_rows % 2 == 0)
    throw ArgumentError("gaussian_kernel: kernel size must be odd and positive");
  const int half = kernel_rows / 2;
  const double sigma = kernel_rows / 4.0;
  std::vector<double> w(static_cast<std::size_t>(kernel_rows));
  for (int j = -half; j <= half; ++j)
    w[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * (j * j) / (sigma * sigma));
  const double total = compensated_sum(w);
  for (double& x : w)
    x /= total;
  return w;
}

RowIntensityProfile gaussian_smooth(const RowIntensityProfile& profile, int kernel_rows)
{
  const auto n = static_cast<long>(profile.intensities.size());
  if (kernel_rows < 1 || kernel_rows % 2 == 0)
    throw ArgumentError("gaussian_smooth: kernel size must be odd and positive");
  if (kernel_rows >= n)
    throw ArgumentError("gaussian_smooth: kernel larger than the profile");

  const std::vector<double> w = gaussian_kernel(kernel_rows);
  const long half = kernel_rows / 2;
  auto at = [&](long i) {
    // ... c b a | a b c ... (edge sample repeated)
    if (i < 0)
      i = -i - 1;
    else if (i >= n)
      i = 2 * n - i - 1;
    return profile.intensities[static_cast<std::size_t>(i)];
  };

  RowIntensityProfile out = profile;
  for (long r = 0; r < n; ++r)
  {
    double acc = 0.0;
    for (long j = -half; j <= half; ++j)
      acc += w[static_cast<std::size_t>(j + half)] * at(r + j);
    out.intensities[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

PeakSet detect_peaks(const RowIntensityProfile& profile, double min_height, int min_separation, int kernel_rows)
{
  const auto& x = profile.intensities;
  if (x.size() < 3)
    throw ArgumentError("detect_peaks: profile too short");
  if (min_separation < 1)
    throw ArgumentError("detect_peaks: min_separation must be >= 1");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mn == *mx)
    throw DegenerateSignalError("detect_peaks: constant profile");

  const double threshold = min_height * *mx;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
  {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] >= threshold)
      candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  std::vector<std::size_t> kept;
  for (std::size_t c : candidates)
  {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (c > k ? c - k : k - c) >= static_cast<std::size_t>(min_separation);
    });
    if (clear)
      kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());

  PeakSet out;
  out.kernel_rows = kernel_rows;
  for (std::size_t i : kept)
  {
    out.rows.push_back(subsample_refine(x, i));
    out.heights.push_back(x[i]);
  }
  return out;
}

double row_time_scale(const PeakSet& peaks, Nanos strobe_interval)
{
  if (peaks.size() < 2)
    throw InsufficientDataError("row_time_scale: need at least two peaks");
  // Mean of consecutive differences telescopes to (last - first) / (n - 1).
  const double mean_spacing = (peaks.rows.back() - peaks.rows.front()) / static_cast<double>(peaks.size() - 1);
  if (!(mean_spacing > 0.0))
    throw DegenerateSignalError("row_time_scale: non-increasing peak rows");
  return static_cast<double>(strobe_interval) / mean_spacing;
}

std::vector<std::optional<double>> track_strobe_row(std::span<const PeakSet> trials, int k,
                                                    std::optional<std::pair<double, double>> first_row_window)
{
  if (k < 1)
    throw ArgumentError("track_strobe_row: strobe index is 1-based");
  std::vector<std::optional<double>> out;
  out.reserve(trials.size());
  for (const PeakSet& t : trials)
  {
    if (t.size() < static_cast<std::size_t>(k))
    {
      out.push_back(std::nullopt);
      continue;
    }
    if (first_row_window && (t.rows.front() < first_row_window->first || t.rows.front() > first_row_window->second))
    {
      out.push_back(std::nullopt);
      continue;
    }
    out.push_back(t.rows[static_cast<std::size_t>(k - 1)]);
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p)
{
  if (sorted.empty())
    throw InsufficientDataError("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PrecisionReport precision_stats(std::span<const double> rows, double scale_ns_per_row)
{
  if (rows.size() < 4)
    throw InsufficientDataError("precision_stats: need at least four valid trials, got " + std::to_string(rows.size()));
  if (!(scale_ns_per_row > 0.0))
    throw ArgumentError("precision_stats: row time scale must be positive");

  PrecisionReport rep;
  rep.rows.assign(rows.begin(), rows.end());
  rep.row_time_scale_ns = scale_ns_per_row;

  std::vector<double> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  // Sorted order makes the reduction independent of trial order.
  const double n = static_cast<double>(sorted.size());
  rep.mean_row = compensated_sum(sorted) / n;
  CompensatedSum ss;
  for (double r : sorted)
    ss.add((r - rep.mean_row) * (r - rep.mean_row));
  rep.sd_rows = std::sqrt(std::max(0.0, ss.value() / n));
  rep.iqr_rows = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  rep.sd_us = rep.sd_rows * scale_ns_per_row * 1e-3;
  rep.iqr_us = rep.iqr_rows * scale_ns_per_row * 1e-3;
  return rep;
}

PrecisionReport precision_stats(std::span<const std::optional<double>> rows, double scale_ns_per_row)
{
  std::vector<double> valid;
  for (const auto& r : rows)
  {
    if (r)
      valid.push_back(*r);
  }
  PrecisionReport rep = precision_stats(valid, scale_ns_per_row);
  rep.missing = rows.size() - valid.size();
  return rep;
}

DriftReport drift_fit(std::span<const DriftPair> pairs, double scale_ns_per_row)
{
  if (pairs.size() < 2)
    throw ArgumentError("drift_fit: need at least two pairs");
  if (!(scale_ns_per_row > 0.0))
    throw ArgumentError("drift_fit: row time scale must be positive");

  const TimeInstant t0 =
      std::min_element(pairs.begin(), pairs.end(), [](const DriftPair& a, const DriftPair& b) {
        return a.timestamp < b.timestamp;
      })->timestamp;

  // Centered normal equations in seconds relative to the earliest sample.
  const double n = static_cast<double>(pairs.size());
  CompensatedSum st;
  CompensatedSum sr;
  for (const auto& p : pairs)
  {
    st.add(static_cast<double>(p.timestamp - t0) * 1e-9);
    sr.add(p.row);
  }
  const double mt = st.value() / n;
  const double mr = sr.value() / n;
  CompensatedSum stt;
  CompensatedSum str;
  for (const auto& p : pairs)
  {
    const double dt = static_cast<double>(p.timestamp - t0) * 1e-9 - mt;
    stt.add(dt * dt);
    str.add(dt * (p.row - mr));
  }
  if (!(stt.value() > 0.0))
    throw ArgumentError("drift_fit: all timestamps are equal");

  DriftReport rep;
  rep.pair_count = pairs.size();
  rep.slope_rows_per_s = str.value() / stt.value();
  rep.intercept_time = t0;
  rep.intercept_row = mr - rep.slope_rows_per_s * mt;
  rep.slope_us_per_min = rep.slope_rows_per_s * scale_ns_per_row * 60.0 * 1e-3;

  CompensatedSum ssr;
  for (const auto& p : pairs)
  {
    const double fit = rep.intercept_row + rep.slope_rows_per_s * static_cast<double>(p.timestamp - t0) * 1e-9;
    ssr.add((p.row - fit) * (p.row - fit));
  }
  rep.residual_sd_rows = pairs.size() > 2 ? std::sqrt(std::max(0.0, ssr.value() / (n - 2.0))) : 0.0;
  return rep;
}

void write_drift_plot_csv(const std::filesystem::path& path, std::span<const DriftPair> pairs)
{
  std::ofstream out(path);
  if (!out)
    throw FormatError("cannot open " + path.string() + " for writing");
  out << "frame_timestamp_ns,row_position\n";
  char buf[64];
  for (const auto& p : pairs)
  {
    std::snprintf(buf, sizeof(buf), "%.17g", p.row);
    out << p.timestamp.ns() << ',' << buf << '\n';
  }
}

}  // namespace sds
