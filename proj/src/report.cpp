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

#include "whittle/report.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <json.hpp>

#include "whittle/bandit.hpp"
#include "whittle/io.hpp"

namespace whittle::report {

using nlohmann::json;

namespace {

json scenario_echo(const Scenario& s) { return json::parse(scenario_to_json(s)); }

json stat_json(const sim::PooledStat& st) {
  return {{"mean", st.mean}, {"se", st.se ? json(*st.se) : json(nullptr)}};
}

json metrics_json(const sim::Metrics& m) {
  return {{"avg_cost_per_client", m.cost}, {"avg_penalty_per_client", m.penalty}, {"avg_energy_per_client", m.energy}};
}

json pooled_json(const sim::PooledMetrics& m) {
  return {{"avg_cost_per_client", stat_json(m.cost)},
          {"avg_penalty_per_client", stat_json(m.penalty)},
          {"avg_energy_per_client", stat_json(m.energy)}};
}

}  // namespace

std::string csv_footer(const Scenario& s) { return fmt::format("# scenario_hash={}\n", scenario_hash_hex(s)); }

std::string index_csv(const ValidScenario& s) {
  std::string out = "class,state,index\n";
  for (std::size_t k = 0; k < s.classes().size(); ++k) {
    const auto table = bandit::whittle_table(s.classes()[k], s.eta());
    for (int i = 0; i <= s.classes()[k].tau; ++i) out += fmt::format("{},{},{}\n", k, i, format_real(table[i]));
  }
  return out + csv_footer(s.scenario());
}

std::string bound_json(const relaxation::DualSolution& d, const ValidScenario& s) {
  json per_class = json::array();
  for (const auto& sol : d.per_class_policy) {
    per_class.push_back({{"optimal_thetas", sol.optimal_thetas},
                         {"always_passive_optimal", sol.always_passive_optimal},
                         {"reward", sol.reward}});
  }
  json doc = {{"omega_star", d.omega_star},
              {"r_rel", d.r_rel},
              {"r_rel_per_client", d.r_rel_per_client},
              {"cost_lower_bound_per_client", d.cost_lower_bound_per_client()},
              {"breakpoints", d.breakpoints},
              {"per_class_policy", per_class},
              {"n_clients", s.n_clients()},
              {"active_limit", s.active_limit()},
              {"scenario_hash", scenario_hash_hex(s.scenario())}};
  return doc.dump(2) + "\n";
}

std::string dp_json(const exactdp::DPResult& r, const ValidScenario& s) {
  json doc = {{"average_cost_per_client", r.average_cost_per_client},
              {"average_cost", r.average_cost},
              {"iterations", r.iterations},
              {"span_residual", r.span_residual},
              {"n_states", r.space.size()},
              {"scenario_hash", scenario_hash_hex(s.scenario())}};
  return doc.dump(2) + "\n";
}

std::string dp_policy_csv(const exactdp::DPResult& r, const ValidScenario& s) {
  std::string out = "state_vector,action_set\n";
  for (std::size_t x = 0; x < r.space.size(); ++x) {
    out += fmt::format("{},{}\n", fmt::join(r.space.decode(x), ";"), fmt::join(r.policy[x].active_set(), ";"));
  }
  return out + csv_footer(s.scenario());
}

std::string sim_json(const sim::SimReport& r) {
  json reps = json::array();
  for (const auto& rep : r.replications) {
    json j = metrics_json(rep.overall);
    j["replication"] = rep.replication;
    json pc = json::array();
    for (const auto& m : rep.per_class) pc.push_back(metrics_json(m));
    j["per_class"] = std::move(pc);
    reps.push_back(std::move(j));
  }
  json per_class = json::array();
  for (const auto& m : r.per_class) per_class.push_back(pooled_json(m));

  json doc = pooled_json(r.pooled);
  doc["policy"] = r.policy;
  doc["per_class"] = std::move(per_class);
  doc["replications"] = std::move(reps);
  doc["horizon_slots"] = r.horizon;
  doc["burn_in_slots"] = r.burn_in;
  doc["initial_state"] = r.initial == sim::InitialState::kFresh ? "fresh" : "saturated";
  doc["master_seed"] = r.scenario.master_seed;
  doc["scenario"] = scenario_echo(r.scenario);
  doc["scenario_hash"] = scenario_hash_hex(r.scenario);
  doc["normalization"] = "per client per measured slot; burn-in slots excluded";
  return doc.dump(2) + "\n";
}

std::string timeseries_csv(const sim::SimReport& r) {
  std::string out = "slot,cost,penalty,energy\n";
  for (const auto& tp : r.series) {
    out += fmt::format("{},{},{},{}\n", tp.slot, format_real(tp.running.cost), format_real(tp.running.penalty),
                       format_real(tp.running.energy));
  }
  return out + csv_footer(r.scenario);
}

}  // namespace whittle::report
