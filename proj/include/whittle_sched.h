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

#ifndef WHITTLE_SCHED_H
#define WHITTLE_SCHED_H

/*
 * C interface to the whittle-sched library: Whittle-index scheduling of
 * clients with inter-delivery deadlines and per-transmission energy costs.
 *
 * All objects are opaque handles created by a ws_*_create/ws_* call returning
 * WS_OK and released with the matching ws_*_free. Functions that produce
 * documents (CSV or JSON) return a heap string that the caller releases with
 * ws_string_free. On failure a function returns a non-zero ws_status and
 * ws_last_error() describes the failure for the calling thread.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WS_BUILDING_LIBRARY)
#    define WS_API __declspec(dllexport)
#  else
#    define WS_API __declspec(dllimport)
#  endif
#else
#  define WS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
  WS_OK = 0,
  WS_ERR_INVALID_ARGUMENT = 1,
  WS_ERR_VALIDATION = 2, /* scenario or experiment failed validation */
  WS_ERR_ORACLE_FAILED = 3,
  WS_ERR_IO = 4,
  WS_ERR_CAPACITY = 5, /* instance too large for exact dynamic programming */
  WS_ERR_CONVERGENCE = 6,
  WS_ERR_INTERNAL = 7
} ws_status;

typedef struct ws_scenario ws_scenario;
typedef struct ws_bound ws_bound;
typedef struct ws_dp_result ws_dp_result;
typedef struct ws_sim_report ws_sim_report;

WS_API const char* ws_version(void);
/* Message for the most recent failure on this thread; never NULL. */
WS_API const char* ws_last_error(void);
WS_API void ws_string_free(char* s);

/* ---- scenarios ---------------------------------------------------------- */

/* Parses and validates a scenario document. degenerate_ok admits p == 1. */
WS_API ws_status ws_scenario_from_json(const char* json, int degenerate_ok, ws_scenario** out);
WS_API ws_status ws_scenario_from_file(const char* path, int degenerate_ok, ws_scenario** out);
/* Built-in scenarios: "reference" (two-class population, N = 100) and
 * "small" (N = 2, L = 1). */
WS_API ws_status ws_scenario_builtin(const char* name, ws_scenario** out);
WS_API void ws_scenario_free(ws_scenario* s);

WS_API ws_status ws_scenario_with_seed(const ws_scenario* s, uint64_t seed, ws_scenario** out);
WS_API ws_status ws_scenario_to_json(const ws_scenario* s, char** out);
/* 16 hex digits identifying the scenario; caller frees. */
WS_API ws_status ws_scenario_hash(const ws_scenario* s, char** out);

WS_API size_t ws_scenario_class_count(const ws_scenario* s);
WS_API int64_t ws_scenario_n_clients(const ws_scenario* s);
WS_API int64_t ws_scenario_active_limit(const ws_scenario* s);

/* ---- indices ------------------------------------------------------------ */

WS_API ws_status ws_whittle_index(const ws_scenario* s, size_t class_index, int state, double* out);
/* CSV "class,state,index" for every class and state. */
WS_API ws_status ws_index_csv(const ws_scenario* s, char** out);

/* ---- relaxed bound ------------------------------------------------------ */

WS_API ws_status ws_bound_compute(const ws_scenario* s, ws_bound** out);
WS_API void ws_bound_free(ws_bound* b);
WS_API double ws_bound_omega_star(const ws_bound* b);
WS_API double ws_bound_r_rel(const ws_bound* b);
WS_API double ws_bound_r_rel_per_client(const ws_bound* b);
WS_API double ws_bound_cost_lower_bound_per_client(const ws_bound* b);
WS_API ws_status ws_bound_to_json(const ws_bound* b, char** out);

/* ---- exact dynamic programming ----------------------------------------- */

WS_API ws_status ws_dp_compute(const ws_scenario* s, ws_dp_result** out);
WS_API void ws_dp_free(ws_dp_result* r);
WS_API double ws_dp_average_cost_per_client(const ws_dp_result* r);
WS_API int64_t ws_dp_iterations(const ws_dp_result* r);
WS_API double ws_dp_span_residual(const ws_dp_result* r);
WS_API ws_status ws_dp_to_json(const ws_dp_result* r, char** out);
WS_API ws_status ws_dp_policy_csv(const ws_dp_result* r, char** out);

/* ---- simulation --------------------------------------------------------- */

typedef struct ws_sim_options {
  const char* policy; /* "whittle", "random", "greedy", "passive", "threshold:<k>" */
  int64_t horizon;    /* <= 0: use the scenario's horizon_slots */
  int64_t burn_in;    /* < 0: horizon / 10 */
  int64_t stride;     /* running-average sampling period; 0 disables */
  int threads;
  int random_ties;     /* Whittle ties broken by a seeded random draw */
  int start_saturated; /* all ages start at tau instead of 0 */
} ws_sim_options;

WS_API void ws_sim_options_init(ws_sim_options* o);
WS_API ws_status ws_simulate(const ws_scenario* s, const ws_sim_options* o, ws_sim_report** out);
WS_API void ws_sim_report_free(ws_sim_report* r);
/* Pooled means and standard errors; se is NaN with a single replication. */
WS_API double ws_sim_cost_mean(const ws_sim_report* r);
WS_API double ws_sim_cost_se(const ws_sim_report* r);
WS_API double ws_sim_penalty_mean(const ws_sim_report* r);
WS_API double ws_sim_energy_mean(const ws_sim_report* r);
WS_API ws_status ws_sim_report_to_json(const ws_sim_report* r, char** out);
WS_API ws_status ws_sim_timeseries_csv(const ws_sim_report* r, char** out);

/* ---- experiments -------------------------------------------------------- */

/* Population sweep: CSV "N,bound,whittle_mean,whittle_se". NULL/0 values
 * select the default sweep. */
WS_API ws_status ws_run_population_sweep(const ws_scenario* base, const int64_t* n_values, size_t count,
                                         int threads, char** csv_out);
/* Energy-weight sweep: CSV "eta,penalty_mean,penalty_se,energy_mean,energy_se". */
WS_API ws_status ws_run_eta_sweep(const ws_scenario* base, const double* eta_values, size_t count, int threads,
                                  char** csv_out);
/* Runs the desk-scale oracle suite. Returns WS_ERR_ORACLE_FAILED, with the
 * JSON verdict still written to json_out, when any check fails. */
WS_API ws_status ws_run_oracle_suite(const ws_scenario* small, int threads, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* WHITTLE_SCHED_H */
