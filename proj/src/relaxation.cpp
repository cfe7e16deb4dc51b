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

#include "whittle/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace whittle::relaxation {

double activation_fraction(const ValidScenario& s) {
  return static_cast<double>(s.active_limit()) / static_cast<double>(s.n_clients());
}

double dual_value(const ValidScenario& s, double omega) {
  if (!(omega >= 0.0)) throw std::invalid_argument("dual_value: subsidy must be >= 0");
  const double n = static_cast<double>(s.n_clients());
  double total = 0.0;
  for (std::size_t k = 0; k < s.classes().size(); ++k) {
    const double members = static_cast<double>(s.class_counts()[k]);
    total += members * bandit::subsidy_solve(s.classes()[k], s.eta(), omega).reward;
  }
  return total - omega * (1.0 - activation_fraction(s)) * n;
}

std::vector<double> candidate_subsidies(const ValidScenario& s) {
  std::vector<double> c{0.0};
  for (const auto& cls : s.classes()) {
    for (int theta = 0; theta < cls.tau; ++theta) {
      const double w = bandit::whittle_index(cls, s.eta(), theta);
      if (w >= 0.0) c.push_back(w);
    }
  }
  std::sort(c.begin(), c.end());
  std::vector<double> out;
  for (double w : c) {
    if (out.empty() || std::abs(w - out.back()) > bandit::kTieTolerance * std::max(1.0, std::abs(w))) {
      out.push_back(w);
    }
  }
  return out;
}

DualSolution relaxed_bound(const ValidScenario& s) {
  DualSolution d;
  d.breakpoints = candidate_subsidies(s);
  d.r_rel = dual_value(s, d.breakpoints.front());
  d.omega_star = d.breakpoints.front();
  for (std::size_t k = 1; k < d.breakpoints.size(); ++k) {
    const double v = dual_value(s, d.breakpoints[k]);
    // d is convex: the first strict minimum in sweep order is kept on ties.
    if (v < d.r_rel) {
      d.r_rel = v;
      d.omega_star = d.breakpoints[k];
    }
  }
  d.r_rel_per_client = d.r_rel / static_cast<double>(s.n_clients());
  for (const auto& cls : s.classes()) d.per_class_policy.push_back(bandit::subsidy_solve(cls, s.eta(), d.omega_star));
  return d;
}

}  // namespace whittle::relaxation
