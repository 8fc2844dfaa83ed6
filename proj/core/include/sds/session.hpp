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

#ifndef SDS_SESSION_HPP
#define SDS_SESSION_HPP

#include <sds/bundle.hpp>

namespace sds
{

// Runs the recording procedure against the simulated rig:
//   1. the MCU triggers depth frames and logs trigger times;
//   2. a hand twist is recorded by the standalone and smartphone IMUs;
//   3. the smartphone starts video and reports its first-frame timestamp;
//   4. the phase correction (caller-supplied or computed from 2-3) is applied
//      on the fly and smartphone frames are rendered as row profiles.
// Deterministic for a fixed config (including seed).
RecordingBundle simulate_session(const SessionConfig& cfg);

}  // namespace sds

#endif  // SDS_SESSION_HPP
