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

// Experiment orchestration: population sweep against the relaxed bound,
// energy-weight sweep, and the desk-scale oracle suite.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "whittle/core.hpp"
#include "whittle/sim.hpp"

namespace whittle::experiments {

/// Two-class population used throughout: (p, tau, E) = (0.6, 10, 2) and
/// (0.8, 5, 3), half the clients each, alpha = 0.3, eta = 0.1, N = 100.
Scenario reference_scenario();
/// N = 2, L = 1, tau = (2, 3), p = (0.5, 0.7), eta = 0.1, E = (1, 1).
Scenario small_scenario();

std::vector<std::int64_t> default_population_sweep();  ///< {10, 20, 50, 100, 200}
std::vector<double> default_eta_sweep();                ///< 10 geometric points over [0.01, 2]

struct ExperimentSpec {
  ValidScenario base;
  std::vector<std::int64_t> n_clients;  ///< population sweep
  std::vector<double> eta;              ///< energy-weight sweep
  int threads = 1;
};

/// Throws ScenarioError if a sweep list is empty, not strictly increasing,
/// or makes a class size non-integral.
void validate_spec(const ExperimentSpec& spec);

struct PopulationRow {
  std::int64_t n_clients = 0;
  double bound = 0.0;  ///< relaxed cost lower bound per client
  double whittle_mean = 0.0;
  double whittle_se = 0.0;  ///< NaN with a single replication
};

struct EtaRow {
  double eta = 0.0;
  double penalty_mean = 0.0, penalty_se = 0.0;
  double energy_mean = 0.0, energy_se = 0.0;
};

std::vector<PopulationRow> run_population_sweep(const ExperimentSpec& spec);
std::vector<EtaRow> run_eta_sweep(const ExperimentSpec& spec);

std::string population_csv(const std::vector<PopulationRow>& rows, const Scenario& base);
std::string eta_csv(const std::vector<EtaRow>& rows, const Scenario& base);

/// Index function under test by the oracle suite; replaceable so that a
/// corrupted formula can be shown to be caught.
using IndexFunction = std::function<double(const ClientClass&, double eta, int state)>;

struct OracleCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

struct OracleSuiteReport {
  std::vector<OracleCheck> checks;
  bool all_passed() const;
};

struct OracleSuiteOptions {
  IndexFunction index;  ///< defaults to the closed-form Whittle index
  int horizon = 5;      ///< finite-horizon length for the truncation check
  int extension = 3;    ///< age extension beyond tau for the truncation check
  int threads = 1;
};

/// Truncation equivalence, closed-form vs chain rewards, indifference
/// identities, relabeling invariance and the bound <= optimum <= Whittle
/// sandwich on a small scenario.
OracleSuiteReport run_oracle_suite(const ValidScenario& small, const OracleSuiteOptions& options = {});

std::string oracle_suite_json(const OracleSuiteReport& report, const Scenario& s);

}  // namespace whittle::experiments
