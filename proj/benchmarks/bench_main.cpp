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


#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <sds/frame_align.hpp>
#include <sds/gyro_sync.hpp>
#include <sds/pipeline.hpp>
#include <sds/rig_sim.hpp>
#include <sds/session.hpp>
#include <sds/strobe_eval.hpp>

using namespace sds;

namespace
{

UniformSeries noiseSeries(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  UniformSeries s{TimeInstant(0), 500.0, {}};
  s.values.resize(n);
  for (double& v : s.values)
    v = d(gen);
  return s;
}

void BM_CrossCorrelation(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const UniformSeries a = noiseSeries(n, 1);
  const UniformSeries b = noiseSeries(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(cross_correlation_lag(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CrossCorrelation)->RangeMultiplier(2)->Range(256, 2048)->Complexity();

void BM_EstimateOffset(benchmark::State& state)
{
  const AngularMotion motion = synth_motion(MotionProfile::handTwist(TimeInstant(kNanosPerSecond), 4));
  const ImuSequence a = simulate_imu(motion, {}, {500.0, 0.02, TimeInstant(750'000'000), 2.5, 1});
  const ImuSequence b = simulate_imu(motion, {1e6, 0.0, 0.0, 0}, {500.0, 0.02, TimeInstant(750'300'000), 2.5, 2});
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_offset(a, b, 500.0));
}
BENCHMARK(BM_EstimateOffset);

void BM_RenderRowProfile(benchmark::State& state)
{
  const RollingShutterConfig shutter;
  std::vector<TimeInstant> strobes;
  for (int k = 0; k < 9; ++k)
    strobes.push_back(exposure_times(shutter.schedule, 0) + (k - 4) * 1'600'000);
  for (auto _ : state)
    benchmark::DoNotOptimize(render_row_profile(strobes, 125'000, shutter, 0));
}
BENCHMARK(BM_RenderRowProfile);

void BM_GaussianSmooth(benchmark::State& state)
{
  RowIntensityProfile p;
  p.intensities.assign(1080, 0.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u;
  for (double& v : p.intensities)
    v = u(gen);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(gaussian_smooth(p, k));
}
BENCHMARK(BM_GaussianSmooth)->Arg(3)->Arg(7)->Arg(21);

void BM_PhaseShift(benchmark::State& state)
{
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<Nanos> t(0, 1'000'000'000'000);
  const Nanos T = 33'333'333;
  for (auto _ : state)
    benchmark::DoNotOptimize(quantize_phase(compute_phase_shift(TimeInstant(t(gen)), TimeInstant(t(gen)), T), 390));
}
BENCHMARK(BM_PhaseShift);

void BM_SimulateSession(benchmark::State& state)
{
  SessionConfig c = preset_config("default");
  c.rendered_frames = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_session(c));
}
BENCHMARK(BM_SimulateSession)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_PipelineLaunch(benchmark::State& state)
{
  PipelineConfig pc;
  pc.session = preset_config("default");
  pc.drift = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_pipeline(pc));
}
BENCHMARK(BM_PipelineLaunch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
