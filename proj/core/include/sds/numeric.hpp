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

#ifndef SDS_NUMERIC_HPP
#define SDS_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <span>

namespace sds
{

// Neumaier compensated summation.
class CompensatedSum
{
public:
  void add(double x)
  {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs)
{
  CompensatedSum s;
  for (double x : xs)
    s.add(x);
  return s.value();
}

// splitmix64 finalizer; used to derive independent RNG streams from a master
// seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sds

#endif  // SDS_NUMERIC_HPP
