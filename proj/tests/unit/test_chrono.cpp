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
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <sds/chrono.hpp>
#include <sds/errors.hpp>

namespace sds
{
namespace
{

// Reference evaluation in long double, rounded half away from zero.
Nanos referenceMap(const ClockMapping& m, Nanos t)
{
  const long double v = static_cast<long double>(t) * (1.0L + m.skew) + m.offset_ns;
  return static_cast<Nanos>(std::llroundl(v));
}

TEST(TimeInstant, ArithmeticAndOrdering)
{
  const TimeInstant a(1'000);
  const TimeInstant b = a + 500;
  EXPECT_EQ(b.ns(), 1'500);
  EXPECT_EQ(b - a, 500);
  EXPECT_EQ((b - 2'000).ns(), -500);
  EXPECT_LT(a, b);
  EXPECT_EQ(TimeInstant::fromSeconds(1.5).ns(), 1'500'000'000);
  EXPECT_EQ(TimeInstant::fromSeconds(-0.25).ns(), -250'000'000);
}

TEST(TimeInstant, CoversTenThousandSecondsAtNanosecondResolution)
{
  const TimeInstant far(10'000 * kNanosPerSecond);
  EXPECT_EQ((far + 1).ns() - far.ns(), 1);
  EXPECT_EQ(TimeInstant(-10'000 * kNanosPerSecond).ns(), -10'000'000'000'000);
}

TEST(MapInstant, PureTranslation)
{
  EXPECT_EQ(map_instant({250'000.0, 0.0}, TimeInstant(0)).ns(), 250'000);
}

TEST(MapInstant, OffsetThenNegativeOffsetIsIdentity)
{
  const ClockMapping fwd = ClockMapping::pureOffset(1'234'567);
  const ClockMapping back = ClockMapping::pureOffset(-1'234'567);
  for (Nanos t : {Nanos{0}, Nanos{-5}, Nanos{987'654'321'000}})
    EXPECT_EQ(map_instant(back, map_instant(fwd, TimeInstant(t))).ns(), t);
}

TEST(MapInstant, SkewOneMicroPerSecondOverSixtySeconds)
{
  const TimeInstant out = map_instant({0.0, 1.0e-6}, TimeInstant(60 * kNanosPerSecond));
  EXPECT_EQ(out.ns(), 60 * kNanosPerSecond + 60 * kNanosPerMicro);
}

TEST(MapInstant, RoundsHalfAwayFromZero)
{
  EXPECT_EQ(map_instant({0.5, 0.0}, TimeInstant(0)).ns(), 1);
  EXPECT_EQ(map_instant({-0.5, 0.0}, TimeInstant(0)).ns(), -1);
  EXPECT_EQ(map_instant({0.49, 0.0}, TimeInstant(10)).ns(), 10);
  EXPECT_EQ(map_instant({0.0, 0.5}, TimeInstant(3)).ns(), 5);    // 4.5
  EXPECT_EQ(map_instant({0.0, 0.5}, TimeInstant(-3)).ns(), -5);  // -4.5
}

TEST(MapInstant, OverflowIsRangeError)
{
  const TimeInstant big(std::numeric_limits<Nanos>::max() - 10);
  EXPECT_THROW(map_instant({100.0, 0.0}, big), RangeError);
  EXPECT_THROW(map_instant({0.0, 1.0}, big), RangeError);
}

TEST(MapInstant, MatchesLongDoubleReference)
{
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<Nanos> t_dist(-1'000 * kNanosPerSecond, 1'000 * kNanosPerSecond);
  std::uniform_real_distribution<double> off(-1e10, 1e10);
  std::uniform_real_distribution<double> skew(-1e-4, 1e-4);
  for (int i = 0; i < 500; ++i)
  {
    const ClockMapping m{off(gen), skew(gen)};
    const Nanos t = t_dist(gen);
    EXPECT_LE(std::llabs(map_instant(m, TimeInstant(t)).ns() - referenceMap(m, t)), 1);
  }
}

TEST(Invert, PureOffset)
{
  const ClockMapping inv = invert({4'200.0, 0.0});
  EXPECT_DOUBLE_EQ(inv.offset_ns, -4'200.0);
  EXPECT_DOUBLE_EQ(inv.skew, 0.0);
}

TEST(Invert, IdentityIsSelfInverse)
{
  const ClockMapping inv = invert(ClockMapping::identity());
  EXPECT_EQ(inv.offset_ns, 0.0);
  EXPECT_EQ(inv.skew, 0.0);
}

TEST(Invert, SkewedRoundTripOnGrid)
{
  const ClockMapping m{1e6, 1e-6};
  const ClockMapping inv = invert(m);
  for (Nanos t = -100 * kNanosPerSecond; t <= 100 * kNanosPerSecond; t += 7'919'000'013)
  {
    const Nanos back = map_instant(inv, map_instant(m, TimeInstant(t))).ns();
    EXPECT_LE(std::llabs(back - t), 1) << "t=" << t;
  }
  EXPECT_LE(std::llabs(map_instant(inv, map_instant(m, TimeInstant(100 * kNanosPerSecond))).ns() -
                       100 * kNanosPerSecond),
            1);
}

TEST(Invert, RejectsSkewAtOrBelowMinusOne)
{
  EXPECT_THROW(invert({0.0, -1.0}), ArgumentError);
  EXPECT_THROW(invert({0.0, -2.0}), ArgumentError);
}

TEST(Compose, IdentityIsNeutral)
{
  const ClockMapping m{123.5, 3e-6};
  EXPECT_EQ(compose(ClockMapping::identity(), m), m);
  EXPECT_EQ(compose(m, ClockMapping::identity()), m);
}

TEST(Compose, PureOffsetsAdd)
{
  const ClockMapping c = compose(ClockMapping::pureOffset(1'000), ClockMapping::pureOffset(-250));
  EXPECT_DOUBLE_EQ(c.offset_ns, 750.0);
  EXPECT_DOUBLE_EQ(c.skew, 0.0);
}

TEST(Compose, PointwiseWithSkews)
{
  const ClockMapping a{5'000.0, 1e-6};
  const ClockMapping b{-12'345.0, 2e-6};
  const ClockMapping ab = compose(a, b);
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<Nanos> t_dist(-1'000 * kNanosPerSecond, 1'000 * kNanosPerSecond);
  for (int i = 0; i < 100; ++i)
  {
    const TimeInstant t(t_dist(gen));
    EXPECT_LE(std::llabs(map_instant(ab, t) - map_instant(a, map_instant(b, t))), 1);
  }
}

TEST(ChronoProperties, RoundTripWithinOneNanosecond)
{
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> off(-1e11, 1e11);
  std::uniform_real_distribution<double> log_skew(-9.0, -3.0);
  std::bernoulli_distribution neg(0.5);
  std::uniform_int_distribution<Nanos> t_dist(-1'000 * kNanosPerSecond, 1'000 * kNanosPerSecond);
  for (int i = 0; i < 1'000; ++i)
  {
    const double s = (neg(gen) ? -1.0 : 1.0) * std::pow(10.0, log_skew(gen));
    const ClockMapping m{std::round(off(gen)), s};
    const TimeInstant t(t_dist(gen));
    const Nanos err = map_instant(invert(m), map_instant(m, t)) - t;
    ASSERT_LE(std::llabs(err), 1) << "offset=" << m.offset_ns << " skew=" << m.skew << " t=" << t.ns();
  }
}

TEST(ChronoProperties, ExactRoundTripWithoutSkew)
{
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<Nanos> d(-1'000'000 * kNanosPerSecond, 1'000'000 * kNanosPerSecond);
  for (int i = 0; i < 1'000; ++i)
  {
    const ClockMapping m = ClockMapping::pureOffset(d(gen));
    const TimeInstant t(d(gen));
    ASSERT_EQ(map_instant(invert(m), map_instant(m, t)), t);
  }
}

TEST(ChronoProperties, CompositionIsAssociativePointwise)
{
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> off(-1e9, 1e9);
  std::uniform_real_distribution<double> skew(-1e-4, 1e-4);
  std::uniform_int_distribution<Nanos> t_dist(-1'000 * kNanosPerSecond, 1'000 * kNanosPerSecond);
  for (int i = 0; i < 200; ++i)
  {
    const ClockMapping a{off(gen), skew(gen)}, b{off(gen), skew(gen)}, c{off(gen), skew(gen)};
    const TimeInstant t(t_dist(gen));
    const Nanos left = map_instant(compose(compose(a, b), c), t).ns();
    const Nanos right = map_instant(compose(a, compose(b, c)), t).ns();
    ASSERT_LE(std::llabs(left - right), 1);
  }
}

TEST(SampleClock, IdentityModelReturnsInput)
{
  const std::vector<TimeInstant> in{TimeInstant(0), TimeInstant(10), TimeInstant(1'000'000)};
  EXPECT_EQ(sample_clock({}, in), in);
}

TEST(SampleClock, OffsetShiftsEverySample)
{
  const std::vector<TimeInstant> in{TimeInstant(-3), TimeInstant(0), TimeInstant(2'000'000'000)};
  const auto out = sample_clock({5'000.0, 0.0, 0.0, 42}, in);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    EXPECT_EQ(out[i] - in[i], 5'000);
}

TEST(SampleClock, JitterStandardDeviation)
{
  std::vector<TimeInstant> in;
  for (Nanos i = 0; i < 100'000; ++i)
    in.emplace_back(i * kNanosPerMilli);
  const ClockModel model{777.0, 0.0, 20'000.0, 3};
  const auto out = sample_clock(model, in);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i)
  {
    const double e = static_cast<double>(out[i] - in[i]) - 777.0;
    sum += e;
    sum2 += e * e;
  }
  const double n = static_cast<double>(in.size());
  const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 20'000.0, 0.05 * 20'000.0);
  EXPECT_NEAR(sum / n, 0.0, 5.0 * 20'000.0 / std::sqrt(n));
}

TEST(SampleClock, DeterministicPerSeed)
{
  std::vector<TimeInstant> in;
  for (Nanos i = 0; i < 1'000; ++i)
    in.emplace_back(i * 2 * kNanosPerMilli);
  const ClockModel m{10.0, 1e-5, 300.0, 1234};
  EXPECT_EQ(sample_clock(m, in), sample_clock(m, in));
  ClockModel other = m;
  other.seed = 1235;
  EXPECT_NE(sample_clock(m, in), sample_clock(other, in));
}

TEST(SampleClock, RejectsNonIncreasingInput)
{
  const std::vector<TimeInstant> dup{TimeInstant(1), TimeInstant(1)};
  const std::vector<TimeInstant> back{TimeInstant(5), TimeInstant(2)};
  EXPECT_THROW(sample_clock({}, dup), ArgumentError);
  EXPECT_THROW(sample_clock({}, back), ArgumentError);
  EXPECT_TRUE(sample_clock({}, std::vector<TimeInstant>{}).empty());
}

}  // namespace
}  // namespace sds
