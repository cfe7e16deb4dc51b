// Copyright 2026 The whittle-sched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scenario file format and the shared text-emission helpers.

#include <cstdint>
#include <string>
#include <string_view>

#include "whittle/core.hpp"

namespace whittle {

/// Parses a scenario JSON document. Unknown keys and wrong types are
/// reported as ScenarioError; the result is not yet validated.
Scenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const Scenario& s);

/// FNV-1a over the canonical JSON form.
std::uint64_t scenario_hash(const Scenario& s);
std::string scenario_hash_hex(const Scenario& s);

/// 17 significant digits, enough for exact round-trip.
std::string format_real(double x);

}  // namespace whittle
