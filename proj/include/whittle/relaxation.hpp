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

// Lagrangian dual of the time-average-constrained problem. Its minimum is
// an upper bound on the per-slot reward of any policy that respects the
// per-slot activation limit, i.e. a lower bound on achievable cost.

#include <vector>

#include "whittle/bandit.hpp"
#include "whittle/core.hpp"

namespace whittle::relaxation {

struct DualSolution {
  double omega_star = 0.0;
  double r_rel = 0.0;  ///< total over all N clients
  double r_rel_per_client = 0.0;
  std::vector<double> breakpoints;  ///< candidate subsidies, sorted, deduplicated
  std::vector<bandit::SubsidySolution> per_class_policy;

  double cost_lower_bound_per_client() const noexcept { return -r_rel_per_client; }
};

/// Fraction of clients that may be active, L / N. Equal to alpha whenever
/// alpha * N is integral.
double activation_fraction(const ValidScenario& s);

/// d(omega) = sum_k gamma_k N R_k(omega) - omega (1 - L/N) N, for omega >= 0.
double dual_value(const ValidScenario& s, double omega);

/// Sorted candidate subsidies: 0 and every non-negative index value, with
/// near-duplicates (relative 1e-12) removed.
std::vector<double> candidate_subsidies(const ValidScenario& s);

DualSolution relaxed_bound(const ValidScenario& s);

}  // namespace whittle::relaxation
