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

#include "whittle_sched.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "whittle/bandit.hpp"
#include "whittle/core.hpp"
#include "whittle/exactdp.hpp"
#include "whittle/experiments.hpp"
#include "whittle/io.hpp"
#include "whittle/relaxation.hpp"
#include "whittle/report.hpp"
#include "whittle/sim.hpp"

struct ws_scenario {
  whittle::ValidScenario value;
};
struct ws_bound {
  whittle::relaxation::DualSolution value;
  whittle::ValidScenario scenario;
};
struct ws_dp_result {
  whittle::exactdp::DPResult value;
  whittle::ValidScenario scenario;
};
struct ws_sim_report {
  whittle::sim::SimReport value;
};

namespace {

thread_local std::string last_error;

ws_status fail(ws_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

/// Maps exceptions from the C++ core onto status codes.
template <class Fn>
ws_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const whittle::ScenarioError& e) {
    return fail(WS_ERR_VALIDATION, e.what());
  } catch (const whittle::exactdp::CapacityError& e) {
    return fail(WS_ERR_CAPACITY, e.what());
  } catch (const whittle::exactdp::ConvergenceError& e) {
    return fail(WS_ERR_CONVERGENCE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(WS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(WS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(WS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WS_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ws_status emit(const std::string& s, char** out) {
  if (out == nullptr) return fail(WS_ERR_INVALID_ARGUMENT, "output pointer is NULL");
  *out = dup_string(s);
  return WS_OK;
}

#define WS_REQUIRE(ptr)                                                        \
  do {                                                                         \
    if ((ptr) == nullptr) return fail(WS_ERR_INVALID_ARGUMENT, #ptr " is NULL"); \
  } while (0)

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

extern "C" {

const char* ws_version(void) { return "0.1.0"; }
const char* ws_last_error(void) { return last_error.c_str(); }
void ws_string_free(char* s) { std::free(s); }

ws_status ws_scenario_from_json(const char* json, int degenerate_ok, ws_scenario** out) {
  WS_REQUIRE(json);
  WS_REQUIRE(out);
  return guarded([&] {
    const auto parsed = whittle::scenario_from_json(json);
    *out = new ws_scenario{whittle::require_valid(parsed, {degenerate_ok != 0})};
    return WS_OK;
  });
}

ws_status ws_scenario_from_file(const char* path, int degenerate_ok, ws_scenario** out) {
  WS_REQUIRE(path);
  WS_REQUIRE(out);
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail(WS_ERR_IO, std::string("cannot open scenario file ") + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ws_scenario_from_json(buf.str().c_str(), degenerate_ok, out);
}

ws_status ws_scenario_builtin(const char* name, ws_scenario** out) {
  WS_REQUIRE(name);
  WS_REQUIRE(out);
  return guarded([&] {
    const std::string n = name;
    if (n == "reference") {
      *out = new ws_scenario{whittle::require_valid(whittle::experiments::reference_scenario())};
    } else if (n == "small") {
      *out = new ws_scenario{whittle::require_valid(whittle::experiments::small_scenario())};
    } else {
      return fail(WS_ERR_INVALID_ARGUMENT, "unknown built-in scenario '" + n + "'");
    }
    return WS_OK;
  });
}

void ws_scenario_free(ws_scenario* s) { delete s; }

ws_status ws_scenario_with_seed(const ws_scenario* s, uint64_t seed, ws_scenario** out) {
  WS_REQUIRE(s);
  WS_REQUIRE(out);
  return guarded([&] {
    *out = new ws_scenario{s->value.with_seed(seed)};
    return WS_OK;
  });
}

ws_status ws_scenario_to_json(const ws_scenario* s, char** out) {
  WS_REQUIRE(s);
  return guarded([&] { return emit(whittle::scenario_to_json(s->value.scenario()) + "\n", out); });
}

ws_status ws_scenario_hash(const ws_scenario* s, char** out) {
  WS_REQUIRE(s);
  return guarded([&] { return emit(whittle::scenario_hash_hex(s->value.scenario()), out); });
}

size_t ws_scenario_class_count(const ws_scenario* s) { return s ? s->value.classes().size() : 0; }
int64_t ws_scenario_n_clients(const ws_scenario* s) { return s ? s->value.n_clients() : 0; }
int64_t ws_scenario_active_limit(const ws_scenario* s) { return s ? s->value.active_limit() : 0; }

ws_status ws_whittle_index(const ws_scenario* s, size_t class_index, int state, double* out) {
  WS_REQUIRE(s);
  WS_REQUIRE(out);
  if (class_index >= s->value.classes().size()) return fail(WS_ERR_INVALID_ARGUMENT, "class index out of range");
  return guarded([&] {
    *out = whittle::bandit::whittle_index(s->value.classes()[class_index], s->value.eta(), state);
    return WS_OK;
  });
}

ws_status ws_index_csv(const ws_scenario* s, char** out) {
  WS_REQUIRE(s);
  return guarded([&] { return emit(whittle::report::index_csv(s->value), out); });
}

ws_status ws_bound_compute(const ws_scenario* s, ws_bound** out) {
  WS_REQUIRE(s);
  WS_REQUIRE(out);
  return guarded([&] {
    *out = new ws_bound{whittle::relaxation::relaxed_bound(s->value), s->value};
    return WS_OK;
  });
}

void ws_bound_free(ws_bound* b) { delete b; }
double ws_bound_omega_star(const ws_bound* b) { return b ? b->value.omega_star : kNaN; }
double ws_bound_r_rel(const ws_bound* b) { return b ? b->value.r_rel : kNaN; }
double ws_bound_r_rel_per_client(const ws_bound* b) { return b ? b->value.r_rel_per_client : kNaN; }
double ws_bound_cost_lower_bound_per_client(const ws_bound* b) {
  return b ? b->value.cost_lower_bound_per_client() : kNaN;
}

ws_status ws_bound_to_json(const ws_bound* b, char** out) {
  WS_REQUIRE(b);
  return guarded([&] { return emit(whittle::report::bound_json(b->value, b->scenario), out); });
}

ws_status ws_dp_compute(const ws_scenario* s, ws_dp_result** out) {
  WS_REQUIRE(s);
  WS_REQUIRE(out);
  return guarded([&] {
    *out = new ws_dp_result{whittle::exactdp::average_cost_optimal(s->value), s->value};
    return WS_OK;
  });
}

void ws_dp_free(ws_dp_result* r) { delete r; }
double ws_dp_average_cost_per_client(const ws_dp_result* r) { return r ? r->value.average_cost_per_client : kNaN; }
int64_t ws_dp_iterations(const ws_dp_result* r) { return r ? r->value.iterations : 0; }
double ws_dp_span_residual(const ws_dp_result* r) { return r ? r->value.span_residual : kNaN; }

ws_status ws_dp_to_json(const ws_dp_result* r, char** out) {
  WS_REQUIRE(r);
  return guarded([&] { return emit(whittle::report::dp_json(r->value, r->scenario), out); });
}

ws_status ws_dp_policy_csv(const ws_dp_result* r, char** out) {
  WS_REQUIRE(r);
  return guarded([&] { return emit(whittle::report::dp_policy_csv(r->value, r->scenario), out); });
}

void ws_sim_options_init(ws_sim_options* o) {
  if (o == nullptr) return;
  o->policy = "whittle";
  o->horizon = 0;
  o->burn_in = -1;
  o->stride = 0;
  o->threads = 1;
  o->random_ties = 0;
  o->start_saturated = 0;
}

ws_status ws_simulate(const ws_scenario* s, const ws_sim_options* o, ws_sim_report** out) {
  WS_REQUIRE(s);
  WS_REQUIRE(out);
  ws_sim_options defaults;
  ws_sim_options_init(&defaults);
  if (o == nullptr) o = &defaults;
  return guarded([&] {
    auto spec = whittle::sim::PolicySpec::parse(o->policy ? o->policy : "whittle");
    if (o->random_ties) spec.tie = whittle::sim::TieBreak::kSeededRandom;
    auto opts = whittle::sim::options_for(s->value, o->threads);
    if (o->horizon > 0) opts.horizon = o->horizon;
    if (o->burn_in >= 0) opts.burn_in = o->burn_in;
    if (o->stride < 0) return fail(WS_ERR_INVALID_ARGUMENT, "stride must be >= 0");
    opts.stride = o->stride;
    opts.initial = o->start_saturated ? whittle::sim::InitialState::kSaturated : whittle::sim::InitialState::kFresh;
    *out = new ws_sim_report{whittle::sim::replicate(s->value, whittle::sim::make_policy_factory(spec), opts)};
    return WS_OK;
  });
}

void ws_sim_report_free(ws_sim_report* r) { delete r; }
double ws_sim_cost_mean(const ws_sim_report* r) { return r ? r->value.pooled.cost.mean : kNaN; }
double ws_sim_cost_se(const ws_sim_report* r) { return r ? r->value.pooled.cost.se.value_or(kNaN) : kNaN; }
double ws_sim_penalty_mean(const ws_sim_report* r) { return r ? r->value.pooled.penalty.mean : kNaN; }
double ws_sim_energy_mean(const ws_sim_report* r) { return r ? r->value.pooled.energy.mean : kNaN; }

ws_status ws_sim_report_to_json(const ws_sim_report* r, char** out) {
  WS_REQUIRE(r);
  return guarded([&] { return emit(whittle::report::sim_json(r->value), out); });
}

ws_status ws_sim_timeseries_csv(const ws_sim_report* r, char** out) {
  WS_REQUIRE(r);
  return guarded([&] { return emit(whittle::report::timeseries_csv(r->value), out); });
}

ws_status ws_run_population_sweep(const ws_scenario* base, const int64_t* n_values, size_t count, int threads,
                                  char** csv_out) {
  WS_REQUIRE(base);
  return guarded([&] {
    whittle::experiments::ExperimentSpec spec{base->value, {}, {}, threads};
    if (n_values != nullptr && count > 0) {
      spec.n_clients.assign(n_values, n_values + count);
    } else {
      spec.n_clients = whittle::experiments::default_population_sweep();
    }
    const auto rows = whittle::experiments::run_population_sweep(spec);
    return emit(whittle::experiments::population_csv(rows, base->value.scenario()), csv_out);
  });
}

ws_status ws_run_eta_sweep(const ws_scenario* base, const double* eta_values, size_t count, int threads,
                           char** csv_out) {
  WS_REQUIRE(base);
  return guarded([&] {
    whittle::experiments::ExperimentSpec spec{base->value, {}, {}, threads};
    if (eta_values != nullptr && count > 0) {
      spec.eta.assign(eta_values, eta_values + count);
    } else {
      spec.eta = whittle::experiments::default_eta_sweep();
    }
    const auto rows = whittle::experiments::run_eta_sweep(spec);
    return emit(whittle::experiments::eta_csv(rows, base->value.scenario()), csv_out);
  });
}

ws_status ws_run_oracle_suite(const ws_scenario* small, int threads, char** json_out) {
  WS_REQUIRE(small);
  return guarded([&] {
    whittle::experiments::OracleSuiteOptions opts;
    opts.threads = threads;
    const auto report = whittle::experiments::run_oracle_suite(small->value, opts);
    const ws_status st = emit(whittle::experiments::oracle_suite_json(report, small->value.scenario()), json_out);
    if (st != WS_OK) return st;
    if (!report.all_passed()) return fail(WS_ERR_ORACLE_FAILED, "one or more oracle checks failed");
    return WS_OK;
  });
}

}  // extern "C"
