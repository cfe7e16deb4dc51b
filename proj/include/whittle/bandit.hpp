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

// Single-client analysis: threshold policies, the subsidy problem and the
// closed-form Whittle index.

#include <vector>

#include "whittle/core.hpp"

namespace whittle::bandit {

/// Passive below theta, active above theta, passive with probability rho at
/// exactly theta.
struct ThresholdPolicy {
  int theta = 0;
  double rho = 0.0;

  friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;
};

/// values[i] is the index at age i, for i = 0..tau. values[tau] is a copy of
/// values[tau - 1].
struct WhittleTable {
  ClientClass class_ref;
  std::vector<double> values;

  double operator[](int age) const { return values[static_cast<std::size_t>(age)]; }
};

/// (1 - p)^k, computed in log space for large k and flushed to zero below
/// the smallest normal double.
double survival_power(double p, int k);

double whittle_index(const ClientClass& c, double eta, int state);
WhittleTable whittle_table(const ClientClass& c, double eta);

/// Long-run average reward of sigma(theta, 0) in the subsidy problem.
double avg_reward_threshold(const ClientClass& c, double eta, double omega, int theta);
/// Long-run average reward of the always-passive policy sigma(tau, 1).
double avg_reward_always_passive(double omega);

struct SubsidySolution {
  double subsidy = 0.0;
  double reward = 0.0;
  /// Every theta in [0, tau] for which sigma(theta, 0) is optimal.
  std::vector<int> optimal_thetas;
  bool always_passive_optimal = false;
  /// Thresholds theta at which the whole randomized family sigma(theta, rho),
  /// rho in [0, 1], is optimal.
  std::vector<int> randomized_family_thetas;

  /// Unique optimal deterministic policy if there is exactly one.
  bool unique() const noexcept { return optimal_thetas.size() + (always_passive_optimal ? 1 : 0) == 1; }
};

/// Relative tolerance used when deciding ties between reward pieces.
inline constexpr double kTieTolerance = 1e-12;

/// Pieces within tie_tolerance (relative) of the maximum count as optimal.
SubsidySolution subsidy_solve(const ClientClass& c, double eta, double omega, double tie_tolerance = kTieTolerance);

struct IndexabilityReport {
  std::vector<double> breakpoints;  ///< W(0..tau-1) in sweep order
  bool strictly_increasing = false;
  /// Passive-set size observed on each open subsidy interval, from below
  /// W(0) to above W(tau-1). The passive set is always {0, .., size-1}.
  std::vector<int> passive_set_sizes;
  bool indexable = false;
};

/// Sweeps the subsidy across the index breakpoints and checks that the
/// optimal passive set grows monotonically from empty to the full state
/// space. Throws std::logic_error if growth is violated.
IndexabilityReport indexability_report(const ClientClass& c, double eta);

}  // namespace whittle::bandit
