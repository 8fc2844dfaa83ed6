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


#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct CliResult
{
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args)
{
  const std::string cmd = std::string(SDS_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p)
    return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
    r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

TEST(Cli, SyncPhase)
{
  const CliResult r = cli("sync phase --t-s0-ns 100000000 --t-d0-ns 95000000 --period-ns 33333333");
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("phase_ns"), 5'000'000);
  EXPECT_EQ(j.at("ticks"), 12'821);
  EXPECT_EQ(j.at("residual_ns"), -190);
  EXPECT_EQ(j.at("applied_shift_ns"), 5'000'190);
}

TEST(Cli, ArgumentErrorsExitTwo)
{
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("sync phase --t-s0-ns 1").code, 2);
  EXPECT_EQ(cli("sync phase --t-s0-ns 1 --t-d0-ns 0 --period-ns 0").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("report --preset nonsense").code, 2);
}

TEST(Cli, DataErrorsExitThree)
{
  sds::test::TempDir dir("cli");
  EXPECT_EQ(cli("eval drift --bundle " + (dir / "nothing").string()).code, 3);
}

TEST(Cli, SimulateExtractAndReport)
{
  sds::test::TempDir dir("cli");
  const std::string bundle = (dir / "b").string();
  const CliResult sim = cli("simulate --preset ideal --seed 7 --out " + bundle);
  ASSERT_EQ(sim.code, 0);
  const json s = json::parse(sim.out);
  EXPECT_EQ(s.at("seed"), 7);
  EXPECT_TRUE(fs::exists(dir / "b" / "manifest.json"));

  const CliResult off = cli("sync offset --a " + bundle + "/imu_mcu.csv --b " + bundle + "/imu_smartphone.csv");
  ASSERT_EQ(off.code, 0);
  EXPECT_NEAR(json::parse(off.out).at("offset_ns").get<double>(), 1'234'567'000.0, 2'000.0);

  const CliResult ext = cli("extract --bundle " + bundle);
  ASSERT_EQ(ext.code, 0);
  EXPECT_TRUE(fs::exists(dir / "b" / "mcu" / "manifest.json"));
  EXPECT_EQ(cli("extract --bundle " + bundle + "/mcu").code, 3);

  const CliResult rep = cli("report --bundle " + bundle);
  ASSERT_EQ(rep.code, 0);
  const json r = json::parse(rep.out);
  EXPECT_LE(r.at("residual_misalignment_ns").get<long>(), 195);
  EXPECT_EQ(r.at("provenance").at("seed"), 7);

  const CliResult again = cli("report --preset ideal --seed 7");
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(json::parse(again.out).at("offset"), r.at("offset"));
}

TEST(Cli, SyncOffsetDefaultRateFollowsSkewedClock)
{
  sds::test::TempDir dir("cli");
  {
    std::ofstream c(dir / "c.json");
    c << R"({"gyro_noise_sd": 0.0, "smartphone_clock": {"skew": 2e-6}})";
  }
  const std::string bundle = (dir / "b").string();
  ASSERT_EQ(cli("simulate --preset ideal --config " + (dir / "c.json").string() + " --out " + bundle).code, 0);
  const std::string files = " --a " + bundle + "/imu_mcu.csv --b " + bundle + "/imu_smartphone.csv";
  const CliResult off = cli("sync offset" + files);
  ASSERT_EQ(off.code, 0) << off.out;
  EXPECT_NEAR(json::parse(off.out).at("offset_ns").get<double>(), 1'234'567'000.0, 5'000.0);
  EXPECT_EQ(cli("sync offset --rate 500" + files).code, 2);
}

TEST(Cli, EvalDriftWritesPlotCsv)
{
  sds::test::TempDir dir("cli");
  const std::string bundle = (dir / "d").string();
  std::ofstream(dir / "cfg.json") << R"({"rendered_frames": 300, "seed": 3})";
  ASSERT_EQ(cli("simulate --preset drift --config " + (dir / "cfg.json").string() + " --format packed --out " + bundle).code, 0);
  const CliResult r = cli("eval drift --bundle " + bundle + " --plot-csv " + (dir / "plot.csv").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("pair_count"), 300);
  std::ifstream in(dir / "plot.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "frame_timestamp_ns,row_position");
}

TEST(Cli, EvalPrecisionOverBundles)
{
  sds::test::TempDir dir("cli");
  std::string args;
  for (int i = 1; i <= 4; ++i)
  {
    const std::string b = (dir / ("p" + std::to_string(i))).string();
    ASSERT_EQ(cli("simulate --preset precision --seed " + std::to_string(i) + " --out " + b).code, 0);
    args += " " + b;
  }
  const CliResult r = cli("eval precision --bundle" + args);
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("valid_trials").get<int>() + j.at("missing_trials").get<int>(), 4);
  EXPECT_GE(j.at("sd_us").get<double>(), 0.0);
  // Three launches are not enough for the statistics.
  EXPECT_EQ(cli("eval precision --bundle" + args.substr(0, args.rfind(' '))).code, 3);
}

}  // namespace
