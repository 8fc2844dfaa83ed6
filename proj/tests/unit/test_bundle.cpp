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


#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sds/bundle.hpp>
#include <sds/errors.hpp>
#include <sds/session.hpp>
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace sds
{
namespace
{

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replaceLine(const fs::path& p, std::size_t line_no, const std::string& text)
{
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    lines.push_back(l);
  in.close();
  lines.at(line_no) = text;
  std::ofstream out(p);
  for (const auto& l : lines)
    out << l << '\n';
}

SessionConfig smallConfig(std::uint64_t seed)
{
  SessionConfig c = preset_config("default");
  c.seed = seed;
  c.rendered_frames = 3;
  return c;
}

SessionConfig randomConfig(std::mt19937_64& gen)
{
  std::uniform_int_distribution<std::uint64_t> seed;
  std::uniform_real_distribution<double> off(-5e9, 5e9);
  std::uniform_real_distribution<double> skew(-5e-6, 5e-6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> frames(1, 4);
  SessionConfig c;
  c.seed = seed(gen);
  c.smartphone_clock = {std::round(off(gen)), skew(gen), 100.0 * unit(gen)};
  c.depth_clock = {std::round(off(gen)), skew(gen), 100.0 * unit(gen)};
  c.gyro_noise_sd = 0.03 * unit(gen);
  c.sensor_noise_sd = 0.02 * unit(gen);
  c.launch_jitter_sd_ns = 80'000.0 * unit(gen);
  c.extra_depth_phase_ns = static_cast<Nanos>(4e6 * unit(gen));
  c.rendered_frames = frames(gen);
  c.depth_period_multiple = unit(gen) < 0.2 ? 6 : 1;
  if (unit(gen) < 0.2)
    c.dropped_depth_frames = {2};
  return c;
}

void expectReadBack(const RecordingBundle& a, const RecordingBundle& b, bool exact_profiles)
{
  EXPECT_EQ(a.format, b.format);
  EXPECT_EQ(a.domain, b.domain);
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.mcu_imu, b.mcu_imu);
  EXPECT_EQ(a.smartphone_imu, b.smartphone_imu);
  EXPECT_EQ(a.smartphone_t0, b.smartphone_t0);
  EXPECT_EQ(a.triggers, b.triggers);
  EXPECT_EQ(a.depth_frames, b.depth_frames);
  EXPECT_EQ(a.smartphone_frame_indices, b.smartphone_frame_indices);
  EXPECT_EQ(a.smartphone_frames, b.smartphone_frames);
  EXPECT_EQ(a.phase_correction, b.phase_correction);
  EXPECT_EQ(a.applied_shift_ns, b.applied_shift_ns);
  EXPECT_EQ(a.truth, b.truth);
  ASSERT_EQ(a.profiles.size(), b.profiles.size());
  for (std::size_t i = 0; i < a.profiles.size(); ++i)
  {
    EXPECT_EQ(a.profiles[i].frame_index, b.profiles[i].frame_index);
    EXPECT_EQ(a.profiles[i].frame_start, b.profiles[i].frame_start);
    if (exact_profiles)
    {
      EXPECT_EQ(a.profiles[i].intensities, b.profiles[i].intensities);
    }
    else
    {
      ASSERT_EQ(a.profiles[i].intensities.size(), b.profiles[i].intensities.size());
      for (std::size_t r = 0; r < a.profiles[i].intensities.size(); ++r)
        ASSERT_NEAR(a.profiles[i].intensities[r], b.profiles[i].intensities[r],
                    1e-7 * std::abs(a.profiles[i].intensities[r]));
    }
  }
}

TEST(Presets, KnownNamesValidate)
{
  for (const char* name : {"default", "ideal", "precision", "drift"})
    EXPECT_NO_THROW(preset_config(name).validate()) << name;
  EXPECT_THROW(preset_config("nope"), ConfigError);
}

TEST(Presets, DriftRunsSevenMinutesAtFiveFps)
{
  const SessionConfig c = preset_config("drift");
  EXPECT_EQ(c.depthPeriod(), 6 * 33'333'333);
  const double minutes = c.rendered_frames * static_cast<double>(c.depthPeriod()) / 60e9;
  EXPECT_NEAR(minutes, 7.0, 0.01);
  EXPECT_NEAR(c.smartphone_clock.skew * 60e6, 16.34, 1e-12);
}

TEST(SessionConfig, JsonRoundTripAndHash)
{
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i)
  {
    SessionConfig c = randomConfig(gen);
    if (i % 2)
      c.phase_override = quantize_phase(1'234'567);
    const nlohmann::json j = c;
    const SessionConfig back = j.get<SessionConfig>();
    EXPECT_EQ(back, c);
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
  SessionConfig a, b;
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(SessionConfig, PartialJsonKeepsDefaults)
{
  SessionConfig c;
  from_json(nlohmann::json{{"rendered_frames", 7}, {"smartphone_clock", {{"skew", 1e-6}}}}, c);
  EXPECT_EQ(c.rendered_frames, 7);
  EXPECT_EQ(c.smartphone_clock.skew, 1e-6);
  EXPECT_EQ(c.smartphone_clock.offset_ns, SessionConfig{}.smartphone_clock.offset_ns);
  EXPECT_THROW(from_json(nlohmann::json{{"rows", "many"}}, c), ConfigError);
  EXPECT_THROW(from_json(nlohmann::json::array(), c), ConfigError);
}

TEST(SessionConfig, ValidationErrors)
{
  SessionConfig c;
  c.depth_period_multiple = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SessionConfig{};
  c.video_start_ns = c.trigger_start_ns - 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SessionConfig{};
  c.dropped_depth_frames = {0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = SessionConfig{};
  c.strobes.interval_ns = 4'000'000;  // 32 ms train does not fit a 33.3 ms period with its pulse
  c.strobes.strobe_duration_ns = 2'000'000;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ImuCsv, HeaderAndScientificNotation)
{
  test::TempDir dir("imu");
  const ImuSequence s({TimeInstant(-5), TimeInstant(2'000'000)}, {Vec3(0.1, -2.5, 3e-9), Vec3(0, 0, 1)});
  write_imu_csv(dir / "imu.csv", s);
  std::ifstream in(dir / "imu.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "timestamp_ns,wx,wy,wz,ax,ay,az");
  EXPECT_EQ(row.substr(0, 3), "-5,");
  EXPECT_NE(row.find("e-01"), std::string::npos);
  EXPECT_EQ(row.substr(row.size() - 3), ",,,");
  EXPECT_EQ(read_imu_csv(dir / "imu.csv"), s);
}

TEST(ImuCsv, AccelerationRoundTrip)
{
  test::TempDir dir("imu");
  const ImuSequence s({TimeInstant(1), TimeInstant(2)}, {Vec3(1, 2, 3), Vec3(4, 5, 6)},
                      std::vector<Vec3>{Vec3(0.1, 0.2, 9.81), Vec3(-0.1, 0.0, 9.79)});
  write_imu_csv(dir / "imu.csv", s);
  EXPECT_EQ(read_imu_csv(dir / "imu.csv"), s);
}

TEST(ImuCsv, MalformedInputs)
{
  test::TempDir dir("imu");
  std::ofstream(dir / "bad_header.csv") << "t,wx\n1,2\n";
  EXPECT_THROW(read_imu_csv(dir / "bad_header.csv"), FormatError);
  std::ofstream(dir / "bad_number.csv") << "timestamp_ns,wx,wy,wz,ax,ay,az\n1,abc,0,0,,,\n";
  EXPECT_THROW(read_imu_csv(dir / "bad_number.csv"), FormatError);
  std::ofstream(dir / "unordered.csv") << "timestamp_ns,wx,wy,wz,ax,ay,az\n5,0,0,0,,,\n4,0,0,0,,,\n";
  EXPECT_THROW(read_imu_csv(dir / "unordered.csv"), FormatError);
  EXPECT_THROW(read_imu_csv(dir / "missing.csv"), FormatError);
}

TEST(TriggersCsv, RoundTrip)
{
  test::TempDir dir("trig");
  const std::vector<TimeInstant> t{TimeInstant(500'000'000), TimeInstant(533'333'333)};
  write_triggers_csv(dir / "t.csv", t);
  EXPECT_EQ(slurp(dir / "t.csv"), "trigger_index,timestamp_ns\n0,500000000\n1,533333333\n");
  EXPECT_EQ(read_triggers_csv(dir / "t.csv"), t);
}

TEST(Bundle, LayoutAndManifest)
{
  test::TempDir dir("bundle");
  const RecordingBundle b = simulate_session(smallConfig(4));
  write_bundle(b, dir.path());
  for (const char* f : {"manifest.json", "imu_mcu.csv", "imu_smartphone.csv", "triggers.csv", "depth_frames.csv",
                        "smartphone_frames.csv", "profiles/frame_000000.csv", "profiles/frame_000002.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("format"), "sds-bundle/1");
  EXPECT_EQ(m.at("seed"), 4u);
  EXPECT_EQ(m.at("config_hash"), config_hash(b.config));
  EXPECT_EQ(m.at("counts").at("triggers"), b.triggers.size());
  EXPECT_EQ(m.at("profiles").at("rows"), 1080u);

  std::ifstream prof(dir / "profiles/frame_000000.csv");
  std::string header, values;
  std::getline(prof, header);
  std::getline(prof, values);
  EXPECT_EQ(header, "frame_index,frame_start_ns");
  EXPECT_EQ(values, std::to_string(b.profiles[0].frame_index) + "," + std::to_string(b.profiles[0].frame_start.ns()));
}

TEST(Bundle, PackedProfilesUseFloat32WithSidecar)
{
  test::TempDir dir("bundle");
  const RecordingBundle b = simulate_session(smallConfig(5));
  write_bundle(b, dir.path(), ProfileFormat::kPacked);
  EXPECT_EQ(fs::file_size(dir / "profiles.f32"), b.profiles.size() * 1080 * 4);
  const auto side = nlohmann::json::parse(slurp(dir / "profiles.json"));
  EXPECT_EQ(side.at("rows"), 1080u);
  EXPECT_EQ(side.at("frames"), b.profiles.size());
  expectReadBack(b, read_bundle(dir.path()), false);
}

TEST(Bundle, MissingFileAndCountMismatch)
{
  test::TempDir dir("bundle");
  const RecordingBundle b = simulate_session(smallConfig(6));
  write_bundle(b, dir.path());
  fs::remove(dir / "profiles/frame_000001.csv");
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  write_bundle(b, dir.path());
  std::ofstream(dir / "triggers.csv", std::ios::app) << "999," << b.triggers.back().ns() + 1 << '\n';
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  write_bundle(b, dir.path());
  std::ofstream(dir / "profiles/frame_000000.csv", std::ios::app) << "0.5\n";
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  write_bundle(b, dir.path());
  replaceLine(dir / "depth_frames.csv", 2, "1,0");
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  write_bundle(b, dir.path());
  std::ofstream(dir / "manifest.json") << "{\"format\": \"sds-bundle/1\"}";
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  std::ofstream(dir / "manifest.json") << "{\"format\": \"other/9\"}";
  EXPECT_THROW(read_bundle(dir.path()), FormatError);

  EXPECT_THROW(read_bundle(dir / "does_not_exist"), FormatError);
}

TEST(BundleProperties, RoundTripIsIdentity)
{
  std::mt19937_64 gen(515);
  for (int i = 0; i < 100; ++i)
  {
    const SessionConfig c = randomConfig(gen);
    const RecordingBundle b = simulate_session(c);
    test::TempDir dir("rt");
    write_bundle(b, dir.path());
    const RecordingBundle back = read_bundle(dir.path());
    ASSERT_EQ(back, b) << "case " << i << " seed " << c.seed;
  }
}

TEST(BundleProperties, Determinism)
{
  std::mt19937_64 gen(616);
  for (int i = 0; i < 100; ++i)
  {
    const SessionConfig c = randomConfig(gen);
    const RecordingBundle a = simulate_session(c);
    const RecordingBundle b = simulate_session(c);
    ASSERT_EQ(a, b) << "case " << i;
    if (i % 10 == 0)
    {
      test::TempDir da("det"), db("det");
      write_bundle(a, da.path());
      write_bundle(b, db.path());
      for (const auto& e : fs::recursive_directory_iterator(da.path()))
      {
        if (e.is_regular_file())
          ASSERT_EQ(slurp(e.path()), slurp(db.path() / fs::relative(e.path(), da.path())));
      }
    }
  }
}

}  // namespace
}  // namespace sds
