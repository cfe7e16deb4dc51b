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

// Domain types shared by every module: client classes, scenarios and the
// validated view of a scenario that the analysis and simulation code consume.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace whittle {

/// Parameters shared by every client of one class.
struct ClientClass {
  double p = 0.5;           ///< per-slot delivery probability when scheduled
  int tau = 1;              ///< inter-delivery threshold in slots
  double energy = 0.0;      ///< energy units per transmission attempt
  double proportion = 1.0;  ///< fraction of the population in this class

  friend bool operator==(const ClientClass&, const ClientClass&) = default;
};

/// Full experiment description as read from a scenario file.
struct Scenario {
  std::vector<ClientClass> classes;
  std::int64_t n_clients = 1;
  double alpha = 1.0;  ///< maximum fraction of clients active per slot
  double eta = 0.0;    ///< energy-efficiency weight
  std::int64_t horizon_slots = 1;
  std::int64_t replications = 1;
  std::uint64_t master_seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Per-client state: slots since last delivery, saturated at tau.
struct ClientState {
  int age = 0;
};

struct ValidationOptions {
  /// Accept p == 1. Only used by tests that need deterministic chains.
  bool degenerate_ok = false;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct Validation;

/// Checks every scenario invariant and reports all violations at once.
Validation validate_scenario(const Scenario& s, const ValidationOptions& options = {});

/// Immutable, validated scenario. Clients are laid out class by class with
/// ids 0..N-1.
class ValidScenario {
 public:
  const Scenario& scenario() const noexcept { return scenario_; }
  const std::vector<ClientClass>& classes() const noexcept { return scenario_.classes; }
  const ClientClass& client_class(int client) const { return scenario_.classes[class_of_[client]]; }

  int n_clients() const noexcept { return static_cast<int>(class_of_.size()); }
  int active_limit() const noexcept { return active_limit_; }  ///< L = floor(alpha * N)
  double eta() const noexcept { return scenario_.eta; }

  /// Class index of each client id.
  const std::vector<int>& class_of() const noexcept { return class_of_; }
  /// Number of clients in each class (gamma_k * N).
  const std::vector<int>& class_counts() const noexcept { return class_counts_; }
  /// First client id of each class.
  const std::vector<int>& class_offsets() const noexcept { return class_offsets_; }

  /// Copy with a different master seed.
  ValidScenario with_seed(std::uint64_t seed) const;
  /// Copy with a different population size; throws ScenarioError if the
  /// class proportions do not give integral counts.
  ValidScenario with_clients(std::int64_t n_clients) const;
  ValidScenario with_eta(double eta) const;

 private:
  friend Validation validate_scenario(const Scenario&, const ValidationOptions&);
  Scenario scenario_;
  ValidationOptions options_;
  int active_limit_ = 0;
  std::vector<int> class_of_;
  std::vector<int> class_counts_;
  std::vector<int> class_offsets_;
};

struct Validation {
  std::optional<ValidScenario> scenario;
  std::vector<std::string> errors;

  bool ok() const noexcept { return scenario.has_value(); }
};

/// Like validate_scenario but throws ScenarioError on failure.
ValidScenario require_valid(const Scenario& s, const ValidationOptions& options = {});

}  // namespace whittle
