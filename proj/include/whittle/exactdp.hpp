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

// Exact dynamic-programming oracles for desk-scale instances: the truncated
// (finite-state) kernel, finite-horizon recursions for both the truncated
// and the untruncated age processes, average-cost relative value iteration,
// and single-client chain analysis.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "whittle/bandit.hpp"
#include "whittle/core.hpp"

namespace whittle::exactdp {

struct Outcome {
  int next_age = 0;
  bool delivered = false;
  double probability = 1.0;
};

/// Exact one-slot outcome distribution of the truncated age process.
/// Zero-probability outcomes are omitted.
std::vector<Outcome> kernel_outcomes(const ClientClass& c, int age, bool active);
/// One sampled outcome; u is a uniform draw in [0, 1).
Outcome kernel_sample(const ClientClass& c, int age, bool active, double u);

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Mixed-radix enumeration of joint age vectors, ages[n] in [0, bound[n]].
/// Client 0 is the fastest-varying digit, so the all-zero state has index 0.
class JointSpace {
 public:
  JointSpace() = default;
  explicit JointSpace(std::vector<int> bounds);

  std::size_t size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return bounds_.size(); }
  const std::vector<int>& bounds() const noexcept { return bounds_; }

  std::size_t encode(std::span<const int> ages) const;
  void decode(std::size_t index, std::span<int> ages) const;
  std::vector<int> decode(std::size_t index) const;

 private:
  std::vector<int> bounds_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// Set of scheduled clients as a bitmask over client ids.
struct JointAction {
  std::uint64_t mask = 0;

  std::vector<int> active_set() const;
  int size() const noexcept;
  bool contains(int client) const noexcept { return (mask >> client) & 1U; }
  static JointAction from_set(std::span<const int> clients);

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

/// All masks with at most `limit` of the `n` low bits set, in increasing
/// numeric order.
std::vector<JointAction> enumerate_actions(int n, int limit);

/// One-slot cost: sum of 1{age == tau} plus eta * E for every scheduled client.
double per_slot_cost(std::span<const int> ages, const JointAction& action, const ValidScenario& s);

struct DpOptions {
  double state_action_cap = 2e6;
  double tolerance = 1e-9;
  long max_iterations = 1'000'000;
  /// Self-loop weight of the aperiodicity transform used by value iteration.
  double self_loop = 0.5;
};

struct FiniteHorizonResult {
  JointSpace space;
  /// values[t][x] = V_t(x) for t = 0..T, with V_0 = 0.
  std::vector<std::vector<double>> values;
  /// Every minimizing first action of V_T at each state.
  std::vector<std::vector<JointAction>> optimal_actions;

  const std::vector<double>& final_values() const { return values.back(); }
};

FiniteHorizonResult finite_horizon_dp(const ValidScenario& s, int horizon, const DpOptions& options = {});

struct TruncationReport {
  bool passed = true;
  std::size_t states_checked = 0;
  double max_identity_residual = 0.0;  ///< |V(.., tau+x, ..) - x - V(.., tau, ..)|
  double max_truncated_residual = 0.0;  ///< |V_untruncated - V_truncated| on states <= tau
  std::vector<std::string> counterexamples;
};

/// Runs the untruncated age recursion on ages reaching tau_n + extension and
/// checks the saturation identity, action-set equality, and agreement with
/// the truncated recursion.
TruncationReport truncation_equivalence_check(const ValidScenario& s, int horizon, int extension,
                                              const DpOptions& options = {});

struct DPResult {
  JointSpace space;
  double average_cost = 0.0;
  double average_cost_per_client = 0.0;
  std::vector<double> bias;  ///< relative values, bias[0] == 0
  std::vector<JointAction> policy;
  long iterations = 0;
  double span_residual = 0.0;
};

DPResult average_cost_optimal(const ValidScenario& s, const DpOptions& options = {});

/// c(x, u) + sum_y P(y | x, u) h(y) for the truncated kernel.
double q_value(const ValidScenario& s, const JointSpace& space, std::span<const double> h, std::size_t state,
               const JointAction& action);

/// Average reward of sigma(theta, rho) from the exact stationary
/// distribution of the single-client chain.
double chain_reward_oracle(const ClientClass& c, double eta, double omega, const bandit::ThresholdPolicy& policy);

/// Stationary distribution of the single-client chain under sigma(theta, rho).
std::vector<double> chain_stationary(const ClientClass& c, const bandit::ThresholdPolicy& policy);

/// True when, under every deterministic stationary single-client policy,
/// state tau is reachable from every state. Limited to tau <= 20.
bool unichain_witness(const ClientClass& c);

}  // namespace whittle::exactdp
