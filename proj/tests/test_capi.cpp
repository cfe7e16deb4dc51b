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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "whittle_sched.h"

namespace {

const char* kSmall = R"({
  "classes": [{"p": 0.5, "tau": 2, "energy": 1, "proportion": 0.5},
              {"p": 0.7, "tau": 3, "energy": 1, "proportion": 0.5}],
  "n_clients": 2, "alpha": 0.5, "eta": 0.1,
  "horizon_slots": 20000, "replications": 4, "master_seed": 7
})";

std::string take(char* s) {
  std::string out = s ? s : "";
  ws_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("scenario lifecycle") {
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_from_json(kSmall, 0, &s) == WS_OK);
  CHECK(ws_scenario_class_count(s) == 2);
  CHECK(ws_scenario_n_clients(s) == 2);
  CHECK(ws_scenario_active_limit(s) == 1);
  char* hash = nullptr;
  REQUIRE(ws_scenario_hash(s, &hash) == WS_OK);
  CHECK(std::strlen(hash) == 16);
  ws_string_free(hash);

  ws_scenario* t = nullptr;
  REQUIRE(ws_scenario_with_seed(s, 99, &t) == WS_OK);
  char* json = nullptr;
  REQUIRE(ws_scenario_to_json(t, &json) == WS_OK);
  CHECK(take(json).find("99") != std::string::npos);
  ws_scenario_free(t);
  ws_scenario_free(s);
  ws_scenario_free(nullptr);
}

TEST_CASE("errors are reported through status codes") {
  ws_scenario* s = nullptr;
  CHECK(ws_scenario_from_json("{", 0, &s) == WS_ERR_VALIDATION);
  CHECK(s == nullptr);
  CHECK(std::strlen(ws_last_error()) > 0);
  CHECK(ws_scenario_from_json(kSmall, 0, nullptr) == WS_ERR_INVALID_ARGUMENT);
  CHECK(ws_scenario_from_file("/nonexistent/scenario.json", 0, &s) == WS_ERR_IO);
  CHECK(ws_scenario_builtin("nope", &s) == WS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("index, bound, dp and simulation through the C interface") {
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_builtin("small", &s) == WS_OK);

  double w = 0;
  REQUIRE(ws_whittle_index(s, 1, 3, &w) == WS_OK);
  CHECK(w == doctest::Approx(2.0));
  CHECK(ws_whittle_index(s, 1, 4, &w) == WS_ERR_INVALID_ARGUMENT);
  CHECK(ws_whittle_index(s, 5, 0, &w) == WS_ERR_INVALID_ARGUMENT);
  char* csv = nullptr;
  REQUIRE(ws_index_csv(s, &csv) == WS_OK);
  CHECK(take(csv).rfind("class,state,index\n", 0) == 0);

  ws_bound* b = nullptr;
  REQUIRE(ws_bound_compute(s, &b) == WS_OK);
  const double lower = ws_bound_cost_lower_bound_per_client(b);
  CHECK(lower == doctest::Approx(-ws_bound_r_rel_per_client(b)));
  ws_bound_free(b);

  ws_dp_result* d = nullptr;
  REQUIRE(ws_dp_compute(s, &d) == WS_OK);
  const double optimum = ws_dp_average_cost_per_client(d);
  CHECK(ws_dp_span_residual(d) < 1e-9);
  char* policy = nullptr;
  REQUIRE(ws_dp_policy_csv(d, &policy) == WS_OK);
  CHECK(take(policy).rfind("state_vector,action_set\n", 0) == 0);
  ws_dp_free(d);
  CHECK(lower <= optimum);

  ws_sim_options o;
  ws_sim_options_init(&o);
  o.horizon = 20000;
  o.stride = 5000;
  ws_sim_report* r = nullptr;
  REQUIRE(ws_simulate(s, &o, &r) == WS_OK);
  CHECK(ws_sim_cost_mean(r) >= optimum - 3 * ws_sim_cost_se(r));
  CHECK(ws_sim_cost_mean(r) == doctest::Approx(ws_sim_penalty_mean(r) + 0.1 * ws_sim_energy_mean(r)));
  char* ts = nullptr;
  REQUIRE(ws_sim_timeseries_csv(r, &ts) == WS_OK);
  CHECK(take(ts).rfind("slot,cost,penalty,energy\n", 0) == 0);
  ws_sim_report_free(r);

  o.policy = "bogus";
  CHECK(ws_simulate(s, &o, &r) == WS_ERR_INVALID_ARGUMENT);
  ws_scenario_free(s);
}

TEST_CASE("single replication has NaN standard error") {
  const std::string one = std::string(kSmall).replace(std::string(kSmall).find("\"replications\": 4"), 17,
                                                       "\"replications\": 1");
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_from_json(one.c_str(), 0, &s) == WS_OK);
  ws_sim_options o;
  ws_sim_options_init(&o);
  o.horizon = 1000;
  ws_sim_report* r = nullptr;
  REQUIRE(ws_simulate(s, &o, &r) == WS_OK);
  CHECK(std::isnan(ws_sim_cost_se(r)));
  char* json = nullptr;
  REQUIRE(ws_sim_report_to_json(r, &json) == WS_OK);
  CHECK(take(json).find("\"se\": null") != std::string::npos);
  ws_sim_report_free(r);
  ws_scenario_free(s);
}

TEST_CASE("dp refuses large instances with a capacity error") {
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_builtin("reference", &s) == WS_OK);
  ws_dp_result* d = nullptr;
  CHECK(ws_dp_compute(s, &d) == WS_ERR_CAPACITY);
  ws_scenario_free(s);
}

TEST_CASE("sweeps reject bad lists") {
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_from_json(kSmall, 0, &s) == WS_OK);
  const int64_t bad[] = {4, 3};
  char* csv = nullptr;
  CHECK(ws_run_population_sweep(s, bad, 2, 1, &csv) == WS_ERR_VALIDATION);
  const double etas[] = {0.0, 0.5};
  REQUIRE(ws_run_eta_sweep(s, etas, 2, 1, &csv) == WS_OK);
  CHECK(take(csv).rfind("eta,penalty_mean,penalty_se,energy_mean,energy_se\n", 0) == 0);
  ws_scenario_free(s);
}

TEST_CASE("oracle suite verdict") {
  ws_scenario* s = nullptr;
  REQUIRE(ws_scenario_builtin("small", &s) == WS_OK);
  char* json = nullptr;
  CHECK(ws_run_oracle_suite(s, 1, &json) == WS_OK);
  CHECK(take(json).find("\"all_passed\": true") != std::string::npos);
  ws_scenario_free(s);
}
