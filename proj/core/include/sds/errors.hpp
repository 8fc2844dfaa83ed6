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

#ifndef SDS_ERRORS_HPP
#define SDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sds
{

// Invalid caller input: bad sizes, violated preconditions, malformed flags.
class ArgumentError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Time arithmetic left the representable int64 nanosecond range.
class RangeError : public std::range_error
{
public:
  using std::range_error::range_error;
};

// Base for failures caused by the data rather than by how the API was called.
class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DegenerateSignalError : public DataError
{
public:
  using DataError::DataError;
};

class LowConfidenceError : public DataError
{
public:
  LowConfidenceError(const std::string& what, double peak_correlation)
    : DataError(what), peak_correlation_(peak_correlation)
  {
  }
  double peakCorrelation() const { return peak_correlation_; }

private:
  double peak_correlation_;
};

// Correlation or intensity peak sits on the first/last sample.
class BoundaryError : public DataError
{
public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError
{
public:
  using DataError::DataError;
};

class AssociationError : public DataError
{
public:
  using DataError::DataError;
};

class StateError : public DataError
{
public:
  using DataError::DataError;
};

// Malformed bundle on disk.
class FormatError : public DataError
{
public:
  using DataError::DataError;
};

class ConfigError : public ArgumentError
{
public:
  using ArgumentError::ArgumentError;
};

}  // namespace sds

#endif  // SDS_ERRORS_HPP
