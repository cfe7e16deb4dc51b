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

// Machine-readable renderings of results. CSV documents end with a
// "# scenario_hash=<hex>" line binding them to their inputs.

#include <string>

#include "whittle/core.hpp"
#include "whittle/exactdp.hpp"
#include "whittle/relaxation.hpp"
#include "whittle/sim.hpp"

namespace whittle::report {

/// class,state,index rows for every class and state 0..tau.
std::string index_csv(const ValidScenario& s);

std::string bound_json(const relaxation::DualSolution& d, const ValidScenario& s);

std::string dp_json(const exactdp::DPResult& r, const ValidScenario& s);
/// state_vector,action_set rows; both fields are ';'-separated lists.
std::string dp_policy_csv(const exactdp::DPResult& r, const ValidScenario& s);

std::string sim_json(const sim::SimReport& r);
/// slot,cost,penalty,energy running averages (replication means).
std::string timeseries_csv(const sim::SimReport& r);

std::string csv_footer(const Scenario& s);

}  // namespace whittle::report
