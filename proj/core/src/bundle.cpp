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

#include <sds/bundle.hpp>

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <sds/errors.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace sds
{

RollingShutterConfig SessionConfig::shutter() const
{
  RollingShutterConfig s;
  s.rows = rows;
  s.row_readout_ns = row_readout_ns;
  s.exposure_ns = exposure_ns;
  s.schedule = FrameSchedule(TimeInstant(video_start_ns), frame_period_ns);
  s.reference_strobe_ns = StrobeTrainConfig{}.strobe_duration_ns;
  return s;
}

void SessionConfig::validate() const
{
  if (frame_period_ns <= 0)
    throw ConfigError("frame_period_ns must be positive");
  if (depth_period_multiple < 1)
    throw ConfigError("depth_period_multiple must be >= 1 (frame rates must be equal or integer multiples)");
  if (rows < 2 || row_readout_ns <= 0 || exposure_ns <= 0)
    throw ConfigError("invalid rolling shutter geometry");
  if (static_cast<Nanos>(rows) * row_readout_ns >= frame_period_ns)
    throw ConfigError("rows * row_readout_ns must be shorter than the frame period");
  strobes.validate();
  if (strobes.trainSpan() + strobes.strobe_duration_ns >= depthPeriod())
    throw ConfigError("strobe train does not fit into one depth period");
  if (!(imu_rate_hz > 0.0) || !(sync_rate_hz > 0.0) || sync_rate_hz > imu_rate_hz)
    throw ConfigError("IMU and sync rates must be positive with sync_rate_hz <= imu_rate_hz");
  if (gyro_noise_sd < 0.0 || sensor_noise_sd < 0.0 || launch_jitter_sd_ns < 0.0)
    throw ConfigError("noise levels must be non-negative");
  if (!(twist_duration_s > 0.0) || imu_margin_s < 0.0)
    throw ConfigError("twist duration must be positive");
  if (!(smartphone_clock.skew > -1.0) || !(depth_clock.skew > -1.0))
    throw ConfigError("clock skew must be > -1");
  if (smartphone_clock.jitter_sd_ns < 0.0 || depth_clock.jitter_sd_ns < 0.0)
    throw ConfigError("clock jitter must be non-negative");
  if (video_start_ns < trigger_start_ns)
    throw ConfigError("video must start after the first depth trigger");
  if (correction_latency_ns < 0)
    throw ConfigError("correction latency must be non-negative");
  if (phase_step_ns <= 0)
    throw ConfigError("phase_step_ns must be positive");
  if (phase_override && (phase_override->step <= 0 || phase_override->phase < 0))
    throw ConfigError("invalid phase override");
  if (rendered_frames < 1)
    throw ConfigError("rendered_frames must be >= 1");
  for (std::int64_t d : dropped_depth_frames)
  {
    if (d < 1)
      throw ConfigError("dropped depth frames must have index >= 1 (frame 0 anchors the association)");
  }
}

SessionConfig preset_config(std::string_view name)
{
  SessionConfig c;
  if (name == "default")
  {
    return c;
  }
  if (name == "ideal")
  {
    c.smartphone_clock.skew = 0.0;
    c.smartphone_clock.jitter_sd_ns = 0.0;
    c.depth_clock.jitter_sd_ns = 0.0;
    c.gyro_noise_sd = 0.0;
    c.randomize_imu_phase = false;
    c.launch_jitter_sd_ns = 0.0;
    return c;
  }
  if (name == "precision")
  {
    c.extra_depth_phase_ns = 4'000'000;
    c.launch_jitter_sd_ns = 61'600.0;
    c.gyro_noise_sd = 0.0;
    c.rendered_frames = 16;
    return c;
  }
  if (name == "drift")
  {
    c.extra_depth_phase_ns = 4'000'000;
    c.depth_period_multiple = 6;
    c.rendered_frames = 2100;
    c.smartphone_clock.skew = 16.34e-6 / 60.0;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected default, ideal, precision or drift)");
}

void to_json(json& j, const ClockSpec& c)
{
  j = json{{"offset_ns", c.offset_ns}, {"skew", c.skew}, {"jitter_sd_ns", c.jitter_sd_ns}};
}

void from_json(const json& j, ClockSpec& c)
{
  c.offset_ns = j.value("offset_ns", c.offset_ns);
  c.skew = j.value("skew", c.skew);
  c.jitter_sd_ns = j.value("jitter_sd_ns", c.jitter_sd_ns);
}

void to_json(json& j, const StrobeTrainConfig& c)
{
  j = json{{"strobes_per_train", c.strobes_per_train},
           {"interval_ns", c.interval_ns},
           {"strobe_duration_ns", c.strobe_duration_ns},
           {"center_index", c.center_index},
           {"retransmit_latency_ns", c.retransmit_latency_ns}};
}

void from_json(const json& j, StrobeTrainConfig& c)
{
  c.strobes_per_train = j.value("strobes_per_train", c.strobes_per_train);
  c.interval_ns = j.value("interval_ns", c.interval_ns);
  c.strobe_duration_ns = j.value("strobe_duration_ns", c.strobe_duration_ns);
  c.center_index = j.value("center_index", c.center_index);
  c.retransmit_latency_ns = j.value("retransmit_latency_ns", c.retransmit_latency_ns);
}

void to_json(json& j, const PhaseCorrection& c)
{
  j = json{{"phase_ns", c.phase}, {"ticks", c.ticks}, {"step_ns", c.step}, {"residual_ns", c.residual}};
}

void from_json(const json& j, PhaseCorrection& c)
{
  c.phase = j.at("phase_ns").get<Nanos>();
  c.ticks = j.at("ticks").get<std::int64_t>();
  c.step = j.at("step_ns").get<Nanos>();
  c.residual = j.at("residual_ns").get<Nanos>();
}

void to_json(json& j, const SessionConfig& c)
{
  j = json{
      {"seed", c.seed},
      {"smartphone_clock", c.smartphone_clock},
      {"depth_clock", c.depth_clock},
      {"frame_period_ns", c.frame_period_ns},
      {"depth_period_multiple", c.depth_period_multiple},
      {"rows", c.rows},
      {"row_readout_ns", c.row_readout_ns},
      {"exposure_ns", c.exposure_ns},
      {"strobes", c.strobes},
      {"sensor_noise_floor", c.sensor_noise_floor},
      {"sensor_noise_sd", c.sensor_noise_sd},
      {"imu_rate_hz", c.imu_rate_hz},
      {"gyro_noise_sd", c.gyro_noise_sd},
      {"sync_rate_hz", c.sync_rate_hz},
      {"randomize_imu_phase", c.randomize_imu_phase},
      {"twist_start_ns", c.twist_start_ns},
      {"twist_duration_s", c.twist_duration_s},
      {"imu_margin_s", c.imu_margin_s},
      {"trigger_start_ns", c.trigger_start_ns},
      {"video_start_ns", c.video_start_ns},
      {"randomize_video_phase", c.randomize_video_phase},
      {"correction_latency_ns", c.correction_latency_ns},
      {"phase_step_ns", c.phase_step_ns},
      {"phase_override", c.phase_override ? json(*c.phase_override) : json(nullptr)},
      {"extra_depth_phase_ns", c.extra_depth_phase_ns},
      {"launch_jitter_sd_ns", c.launch_jitter_sd_ns},
      {"rendered_frames", c.rendered_frames},
      {"dropped_depth_frames", c.dropped_depth_frames},
  };
}

void from_json(const json& j, SessionConfig& c)
{
  if (!j.is_object())
    throw ConfigError("session config must be a JSON object");
  try
  {
    c.seed = j.value("seed", c.seed);
    if (j.contains("smartphone_clock"))
      j.at("smartphone_clock").get_to(c.smartphone_clock);
    if (j.contains("depth_clock"))
      j.at("depth_clock").get_to(c.depth_clock);
    c.frame_period_ns = j.value("frame_period_ns", c.frame_period_ns);
    c.depth_period_multiple = j.value("depth_period_multiple", c.depth_period_multiple);
    c.rows = j.value("rows", c.rows);
    c.row_readout_ns = j.value("row_readout_ns", c.row_readout_ns);
    c.exposure_ns = j.value("exposure_ns", c.exposure_ns);
    if (j.contains("strobes"))
      j.at("strobes").get_to(c.strobes);
    c.sensor_noise_floor = j.value("sensor_noise_floor", c.sensor_noise_floor);
    c.sensor_noise_sd = j.value("sensor_noise_sd", c.sensor_noise_sd);
    c.imu_rate_hz = j.value("imu_rate_hz", c.imu_rate_hz);
    c.gyro_noise_sd = j.value("gyro_noise_sd", c.gyro_noise_sd);
    c.sync_rate_hz = j.value("sync_rate_hz", c.sync_rate_hz);
    c.randomize_imu_phase = j.value("randomize_imu_phase", c.randomize_imu_phase);
    c.twist_start_ns = j.value("twist_start_ns", c.twist_start_ns);
    c.twist_duration_s = j.value("twist_duration_s", c.twist_duration_s);
    c.imu_margin_s = j.value("imu_margin_s", c.imu_margin_s);
    c.trigger_start_ns = j.value("trigger_start_ns", c.trigger_start_ns);
    c.video_start_ns = j.value("video_start_ns", c.video_start_ns);
    c.randomize_video_phase = j.value("randomize_video_phase", c.randomize_video_phase);
    c.correction_latency_ns = j.value("correction_latency_ns", c.correction_latency_ns);
    c.phase_step_ns = j.value("phase_step_ns", c.phase_step_ns);
    if (j.contains("phase_override") && !j.at("phase_override").is_null())
      c.phase_override = j.at("phase_override").get<PhaseCorrection>();
    c.extra_depth_phase_ns = j.value("extra_depth_phase_ns", c.extra_depth_phase_ns);
    c.launch_jitter_sd_ns = j.value("launch_jitter_sd_ns", c.launch_jitter_sd_ns);
    c.rendered_frames = j.value("rendered_frames", c.rendered_frames);
    c.dropped_depth_frames = j.value("dropped_depth_frames", c.dropped_depth_frames);
  }
  catch (const json::exception& e)
  {
    throw ConfigError(std::string("session config: ") + e.what());
  }
}

void to_json(json& j, const SessionTruth& t)
{
  j = json{{"smartphone_offset_ns", t.smartphone_offset_ns},
           {"video_start_ns", t.video_start_ns},
           {"launch_error_ns", t.launch_error_ns},
           {"applied_shift_ns", t.applied_shift_ns},
           {"correction_trigger", t.correction_trigger},
           {"residual_ns", t.residual_ns},
           {"center_strobe_rows", t.center_strobe_rows}};
}

void from_json(const json& j, SessionTruth& t)
{
  t.smartphone_offset_ns = j.at("smartphone_offset_ns").get<Nanos>();
  t.video_start_ns = j.at("video_start_ns").get<Nanos>();
  t.launch_error_ns = j.at("launch_error_ns").get<Nanos>();
  t.applied_shift_ns = j.at("applied_shift_ns").get<Nanos>();
  t.correction_trigger = j.at("correction_trigger").get<std::int64_t>();
  t.residual_ns = j.at("residual_ns").get<Nanos>();
  t.center_strobe_rows = j.at("center_strobe_rows").get<std::vector<double>>();
}

std::string config_hash(const SessionConfig& c)
{
  const std::string text = json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text)
  {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace
{

constexpr const char* kManifest = "manifest.json";
constexpr const char* kImuMcu = "imu_mcu.csv";
constexpr const char* kImuPhone = "imu_smartphone.csv";
constexpr const char* kTriggers = "triggers.csv";
constexpr const char* kDepthFrames = "depth_frames.csv";
constexpr const char* kPhoneFrames = "smartphone_frames.csv";
constexpr const char* kPacked = "profiles.f32";
constexpr const char* kPackedSidecar = "profiles.json";
constexpr const char* kProfileDir = "profiles";

std::ofstream openOut(const fs::path& path, std::ios::openmode mode = std::ios::out)
{
  std::ofstream out(path, mode);
  if (!out)
    throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream openIn(const fs::path& path, std::ios::openmode mode = std::ios::in)
{
  std::ifstream in(path, mode);
  if (!in)
    throw FormatError("missing bundle file " + path.string());
  return in;
}

std::vector<std::string_view> splitCsv(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true)
  {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos)
      break;
    pos = comma + 1;
  }
  return out;
}

template <typename T>
T parseNumber(std::string_view s, const fs::path& where)
{
  while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
    s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ')
    s.remove_prefix(1);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("malformed number '" + std::string(s) + "' in " + where.string());
  return value;
}

std::string fmtReal(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

std::string fmtShortest(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void expectHeader(std::istream& in, std::string_view header, const fs::path& where)
{
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("empty file " + where.string());
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != header)
    throw FormatError("unexpected header '" + line + "' in " + where.string() + " (expected '" + std::string(header) +
                      "')");
}

void writeIndexedTimes(const fs::path& path, std::string_view header, const std::vector<std::int64_t>& idx,
                       const std::vector<TimeInstant>& ts)
{
  auto out = openOut(path);
  out << header << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << idx[i] << ',' << ts[i].ns() << '\n';
}

void readIndexedTimes(const fs::path& path, std::string_view header, std::vector<std::int64_t>& idx,
                      std::vector<TimeInstant>& ts)
{
  auto in = openIn(path);
  expectHeader(in, header, path);
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r")
      continue;
    const auto f = splitCsv(line);
    if (f.size() != 2)
      throw FormatError("expected two columns in " + path.string());
    idx.push_back(parseNumber<std::int64_t>(f[0], path));
    ts.emplace_back(parseNumber<Nanos>(f[1], path));
  }
  for (std::size_t i = 1; i < ts.size(); ++i)
  {
    if (!(ts[i - 1] < ts[i]))
      throw FormatError("timestamps not strictly increasing in " + path.string());
  }
}

std::vector<std::int64_t> sequentialIndices(std::size_t n)
{
  std::vector<std::int64_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = static_cast<std::int64_t>(i);
  return idx;
}

void writeProfileCsv(const fs::path& path, const RowIntensityProfile& p)
{
  auto out = openOut(path);
  out << "frame_index,frame_start_ns\n" << p.frame_index << ',' << p.frame_start.ns() << '\n';
  for (double v : p.intensities)
    out << fmtShortest(v) << '\n';
}

RowIntensityProfile readProfileCsv(const fs::path& path)
{
  auto in = openIn(path);
  expectHeader(in, "frame_index,frame_start_ns", path);
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("missing frame header values in " + path.string());
  const auto f = splitCsv(line);
  if (f.size() != 2)
    throw FormatError("expected frame_index,frame_start_ns values in " + path.string());
  RowIntensityProfile p;
  p.frame_index = parseNumber<std::int64_t>(f[0], path);
  p.frame_start = TimeInstant(parseNumber<Nanos>(f[1], path));
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r")
      continue;
    p.intensities.push_back(parseNumber<double>(line, path));
  }
  return p;
}

std::uint32_t toLittle(std::uint32_t v)
{
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
  return v;
}

}  // namespace

void write_imu_csv(const fs::path& path, const ImuSequence& imu)
{
  auto out = openOut(path);
  out << "timestamp_ns,wx,wy,wz,ax,ay,az\n";
  const auto& acc = imu.acceleration();
  for (std::size_t i = 0; i < imu.size(); ++i)
  {
    const Vec3& w = imu.angularVelocity()[i];
    out << imu.timestamps()[i].ns() << ',' << fmtReal(w.x()) << ',' << fmtReal(w.y()) << ',' << fmtReal(w.z());
    if (acc)
    {
      const Vec3& a = (*acc)[i];
      out << ',' << fmtReal(a.x()) << ',' << fmtReal(a.y()) << ',' << fmtReal(a.z()) << '\n';
    }
    else
    {
      out << ",,,\n";
    }
  }
}

ImuSequence read_imu_csv(const fs::path& path)
{
  auto in = openIn(path);
  expectHeader(in, "timestamp_ns,wx,wy,wz,ax,ay,az", path);
  std::vector<TimeInstant> ts;
  std::vector<Vec3> gyro;
  std::vector<Vec3> acc;
  bool has_acc = true;
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line == "\r")
      continue;
    auto f = splitCsv(line);
    if (f.size() == 4)
      f.resize(7);
    if (f.size() != 7)
      throw FormatError("expected 7 columns in " + path.string());
    ts.emplace_back(parseNumber<Nanos>(f[0], path));
    gyro.emplace_back(parseNumber<double>(f[1], path), parseNumber<double>(f[2], path), parseNumber<double>(f[3], path));
    const bool row_acc = !f[4].empty() && f[4] != "\r";
    if (ts.size() == 1)
      has_acc = row_acc;
    else if (row_acc != has_acc)
      throw FormatError("acceleration present on some rows only in " + path.string());
    if (row_acc)
      acc.emplace_back(parseNumber<double>(f[4], path), parseNumber<double>(f[5], path), parseNumber<double>(f[6], path));
  }
  try
  {
    if (has_acc && !ts.empty())
      return ImuSequence(std::move(ts), std::move(gyro), std::move(acc));
    return ImuSequence(std::move(ts), std::move(gyro));
  }
  catch (const ArgumentError& e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_triggers_csv(const fs::path& path, const std::vector<TimeInstant>& triggers)
{
  writeIndexedTimes(path, "trigger_index,timestamp_ns", sequentialIndices(triggers.size()), triggers);
}

std::vector<TimeInstant> read_triggers_csv(const fs::path& path)
{
  std::vector<std::int64_t> idx;
  std::vector<TimeInstant> ts;
  readIndexedTimes(path, "trigger_index,timestamp_ns", idx, ts);
  return ts;
}

void write_bundle(const RecordingBundle& bundle, const fs::path& dir, ProfileFormat format)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw FormatError("cannot create bundle directory " + dir.string() + ": " + ec.message());

  write_imu_csv(dir / kImuMcu, bundle.mcu_imu);
  write_imu_csv(dir / kImuPhone, bundle.smartphone_imu);
  write_triggers_csv(dir / kTriggers, bundle.triggers);
  writeIndexedTimes(dir / kDepthFrames, "frame_index,timestamp_ns", sequentialIndices(bundle.depth_frames.size()),
                    bundle.depth_frames);
  writeIndexedTimes(dir / kPhoneFrames, "frame_index,timestamp_ns", bundle.smartphone_frame_indices,
                    bundle.smartphone_frames);

  const std::size_t rows = bundle.profiles.empty() ? static_cast<std::size_t>(bundle.config.rows)
                                                   : bundle.profiles.front().intensities.size();
  for (const auto& p : bundle.profiles)
  {
    if (p.intensities.size() != rows)
      throw ArgumentError("write_bundle: profiles differ in row count");
  }

  json profiles;
  profiles["count"] = bundle.profiles.size();
  profiles["rows"] = rows;
  if (format == ProfileFormat::kCsvPerFrame)
  {
    fs::create_directories(dir / kProfileDir);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < bundle.profiles.size(); ++i)
    {
      char name[48];
      std::snprintf(name, sizeof(name), "frame_%06zu.csv", i);
      const std::string rel = std::string(kProfileDir) + "/" + name;
      writeProfileCsv(dir / rel, bundle.profiles[i]);
      files.push_back(rel);
    }
    profiles["format"] = "csv";
    profiles["files"] = files;
  }
  else
  {
    auto out = openOut(dir / kPacked, std::ios::out | std::ios::binary);
    std::vector<std::int64_t> idx;
    std::vector<Nanos> starts;
    for (const auto& p : bundle.profiles)
    {
      idx.push_back(p.frame_index);
      starts.push_back(p.frame_start.ns());
      for (double v : p.intensities)
      {
        const std::uint32_t bits = toLittle(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
      }
    }
    const json sidecar = {{"frames", bundle.profiles.size()}, {"rows", rows},         {"dtype", "float32-le"},
                          {"layout", "row-major"},            {"frame_index", idx}, {"frame_start_ns", starts}};
    openOut(dir / kPackedSidecar) << sidecar.dump(2) << '\n';
    profiles["format"] = "packed";
    profiles["file"] = kPacked;
    profiles["sidecar"] = kPackedSidecar;
  }

  json manifest;
  manifest["format"] = bundle.format;
  manifest["domain"] = bundle.domain;
  manifest["seed"] = bundle.config.seed;
  manifest["config"] = bundle.config;
  manifest["config_hash"] = config_hash(bundle.config);
  manifest["smartphone_t0_ns"] = bundle.smartphone_t0.ns();
  manifest["phase_correction"] = bundle.phase_correction;
  manifest["applied_shift_ns"] = bundle.applied_shift_ns;
  manifest["streams"] = {{"imu_mcu", kImuMcu},
                         {"imu_smartphone", kImuPhone},
                         {"triggers", kTriggers},
                         {"depth_frames", kDepthFrames},
                         {"smartphone_frames", kPhoneFrames}};
  manifest["counts"] = {{"imu_mcu", bundle.mcu_imu.size()},
                        {"imu_smartphone", bundle.smartphone_imu.size()},
                        {"triggers", bundle.triggers.size()},
                        {"depth_frames", bundle.depth_frames.size()},
                        {"smartphone_frames", bundle.smartphone_frames.size()}};
  manifest["profiles"] = profiles;
  manifest["truth"] = bundle.truth ? json(*bundle.truth) : json(nullptr);
  openOut(dir / kManifest) << manifest.dump(2) << '\n';
}

namespace
{

RecordingBundle readBundleImpl(const fs::path& dir)
{
  json manifest;
  {
    auto in = openIn(dir / kManifest);
    try
    {
      manifest = json::parse(in);
    }
    catch (const json::exception& e)
    {
      throw FormatError("invalid manifest in " + dir.string() + ": " + e.what());
    }
  }

  RecordingBundle b;
  try
  {
    b.format = manifest.at("format").get<std::string>();
    if (b.format != kBundleFormat)
      throw FormatError("unsupported bundle format '" + b.format + "'");
    b.domain = manifest.value("domain", std::string("native"));
    b.config = manifest.at("config").get<SessionConfig>();
    b.smartphone_t0 = TimeInstant(manifest.at("smartphone_t0_ns").get<Nanos>());
    b.phase_correction = manifest.at("phase_correction").get<PhaseCorrection>();
    b.applied_shift_ns = manifest.at("applied_shift_ns").get<Nanos>();
    if (manifest.contains("truth") && !manifest.at("truth").is_null())
      b.truth = manifest.at("truth").get<SessionTruth>();
  }
  catch (const json::exception& e)
  {
    throw FormatError("incomplete manifest in " + dir.string() + ": " + e.what());
  }

  b.mcu_imu = read_imu_csv(dir / kImuMcu);
  b.smartphone_imu = read_imu_csv(dir / kImuPhone);
  b.triggers = read_triggers_csv(dir / kTriggers);
  {
    std::vector<std::int64_t> idx;
    readIndexedTimes(dir / kDepthFrames, "frame_index,timestamp_ns", idx, b.depth_frames);
  }
  readIndexedTimes(dir / kPhoneFrames, "frame_index,timestamp_ns", b.smartphone_frame_indices, b.smartphone_frames);

  if (manifest.contains("counts"))
  {
    const json& c = manifest.at("counts");
    auto check = [&](const char* key, std::size_t actual) {
      if (c.contains(key) && c.at(key).get<std::size_t>() != actual)
        throw FormatError(std::string("stream '") + key + "' length differs from the manifest");
    };
    check("imu_mcu", b.mcu_imu.size());
    check("imu_smartphone", b.smartphone_imu.size());
    check("triggers", b.triggers.size());
    check("depth_frames", b.depth_frames.size());
    check("smartphone_frames", b.smartphone_frames.size());
  }

  const json& profiles = manifest.at("profiles");
  const auto rows = profiles.at("rows").get<std::size_t>();
  const auto count = profiles.at("count").get<std::size_t>();
  const auto kind = profiles.at("format").get<std::string>();
  if (kind == "csv")
  {
    for (const auto& rel : profiles.at("files"))
    {
      RowIntensityProfile p = readProfileCsv(dir / rel.get<std::string>());
      if (p.intensities.size() != rows)
        throw FormatError("row count of " + rel.get<std::string>() + " differs from the manifest");
      b.profiles.push_back(std::move(p));
    }
  }
  else if (kind == "packed")
  {
    json sidecar;
    {
      auto in = openIn(dir / profiles.at("sidecar").get<std::string>());
      sidecar = json::parse(in);
    }
    if (sidecar.at("rows").get<std::size_t>() != rows || sidecar.at("frames").get<std::size_t>() != count)
      throw FormatError("packed profile sidecar disagrees with the manifest");
    const auto idx = sidecar.at("frame_index").get<std::vector<std::int64_t>>();
    const auto starts = sidecar.at("frame_start_ns").get<std::vector<Nanos>>();
    const fs::path packed = dir / profiles.at("file").get<std::string>();
    if (fs::file_size(packed) != count * rows * sizeof(float))
      throw FormatError("packed profile file size does not match frames x rows");
    auto in = openIn(packed, std::ios::in | std::ios::binary);
    for (std::size_t f = 0; f < count; ++f)
    {
      RowIntensityProfile p;
      p.frame_index = idx.at(f);
      p.frame_start = TimeInstant(starts.at(f));
      p.intensities.resize(rows);
      for (std::size_t r = 0; r < rows; ++r)
      {
        std::uint32_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
        p.intensities[r] = static_cast<double>(std::bit_cast<float>(toLittle(bits)));
      }
      b.profiles.push_back(std::move(p));
    }
  }
  else
  {
    throw FormatError("unknown profile format '" + kind + "'");
  }
  if (b.profiles.size() != count)
    throw FormatError("profile count differs from the manifest");
  return b;
}

}  // namespace

RecordingBundle read_bundle(const fs::path& dir)
{
  try
  {
    return readBundleImpl(dir);
  }
  catch (const json::exception& e)
  {
    throw FormatError("malformed bundle metadata in " + dir.string() + ": " + e.what());
  }
  catch (const fs::filesystem_error& e)
  {
    throw FormatError(std::string("bundle file access failed: ") + e.what());
  }
}

}  // namespace sds
