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

#include "whittle/bandit.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace whittle::bandit {

namespace {

void check_state(const ClientClass& c, int state, const char* what) {
  if (state < 0 || state > c.tau) {
    throw std::out_of_range(fmt::format("{} {} outside [0, {}]", what, state, c.tau));
  }
}

bool ties(double a, double b, double tolerance) { return std::abs(a - b) <= tolerance * std::max(1.0, std::abs(b)); }

}  // namespace

double survival_power(double p, int k) {
  if (k <= 0) return 1.0;
  const double q = 1.0 - p;
  if (q <= 0.0) return 0.0;
  if (k <= 64) return std::pow(q, k);
  const double v = std::exp(static_cast<double>(k) * std::log1p(-p));
  return v < DBL_MIN ? 0.0 : v;
}

double whittle_index(const ClientClass& c, double eta, int state) {
  check_state(c, state, "state");
  const int i = std::min(state, c.tau - 1);
  return c.p * static_cast<double>(i + 1) * survival_power(c.p, c.tau - (i + 1)) - eta * c.energy;
}

WhittleTable whittle_table(const ClientClass& c, double eta) {
  WhittleTable t{c, std::vector<double>(static_cast<std::size_t>(c.tau) + 1)};
  for (int i = 0; i < c.tau; ++i) t.values[i] = whittle_index(c, eta, i);
  t.values[c.tau] = t.values[c.tau - 1];
  return t;
}

double avg_reward_threshold(const ClientClass& c, double eta, double omega, int theta) {
  check_state(c, theta, "threshold");
  const double pt = c.p * static_cast<double>(theta);
  return (pt * omega - eta * c.energy - survival_power(c.p, c.tau - theta)) / (1.0 + pt);
}

double avg_reward_always_passive(double omega) { return omega - 1.0; }

SubsidySolution subsidy_solve(const ClientClass& c, double eta, double omega, double tie_tolerance) {
  std::vector<double> pieces(static_cast<std::size_t>(c.tau) + 1);
  for (int theta = 0; theta <= c.tau; ++theta) pieces[theta] = avg_reward_threshold(c, eta, omega, theta);
  const double passive = avg_reward_always_passive(omega);

  SubsidySolution s;
  s.subsidy = omega;
  s.reward = std::max(passive, *std::max_element(pieces.begin(), pieces.end()));
  for (int theta = 0; theta <= c.tau; ++theta) {
    if (ties(pieces[theta], s.reward, tie_tolerance)) s.optimal_thetas.push_back(theta);
  }
  s.always_passive_optimal = ties(passive, s.reward, tie_tolerance);

  // sigma(theta, 1) coincides with sigma(theta + 1, 0), and sigma(tau, 1) is
  // always passive; the family at theta is optimal when both ends are.
  auto optimal = [&](int theta) {
    return std::find(s.optimal_thetas.begin(), s.optimal_thetas.end(), theta) != s.optimal_thetas.end();
  };
  for (int theta : s.optimal_thetas) {
    const bool upper = theta < c.tau ? optimal(theta + 1) : s.always_passive_optimal;
    if (upper) s.randomized_family_thetas.push_back(theta);
  }
  return s;
}

IndexabilityReport indexability_report(const ClientClass& c, double eta) {
  IndexabilityReport r;
  const WhittleTable table = whittle_table(c, eta);
  r.breakpoints.assign(table.values.begin(), table.values.end() - 1);
  r.strictly_increasing = std::adjacent_find(r.breakpoints.begin(), r.breakpoints.end(),
                                             std::greater_equal<>()) == r.breakpoints.end();

  // Shifting the subsidy by eta * E shifts every piece of the subsidy problem
  // by the same amount, so the sweep runs on the energy-free problem where
  // the breakpoints p (i + 1) (1 - p)^(tau - i - 1) keep full relative
  // precision instead of being absorbed into -eta * E.
  const WhittleTable shifted = whittle_table(c, 0.0);
  std::vector<double> distinct(shifted.values.begin(), shifted.values.end() - 1);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> probes;
  probes.push_back(distinct.front() - 1.0 - std::abs(distinct.front()));
  for (std::size_t k = 0; k + 1 < distinct.size(); ++k) probes.push_back(0.5 * (distinct[k] + distinct[k + 1]));
  probes.push_back(distinct.back() + 1.0 + std::abs(distinct.back()));

  // Probes compare pieces exactly. States where passivity is only weakly
  // optimal still belong to the passive set, hence the largest optimal
  // threshold when pieces tie in floating point.
  for (double nu : probes) {
    const SubsidySolution s = subsidy_solve(c, 0.0, nu, 0.0);
    r.passive_set_sizes.push_back(s.always_passive_optimal ? c.tau + 1 : s.optimal_thetas.back());
  }

  const bool monotone = std::is_sorted(r.passive_set_sizes.begin(), r.passive_set_sizes.end());
  if (!monotone || r.passive_set_sizes.front() != 0 || r.passive_set_sizes.back() != c.tau + 1) {
    throw std::logic_error(fmt::format("passive set does not grow monotonically for p={} tau={} eta*E={}", c.p,
                                       c.tau, eta * c.energy));
  }
  r.indexable = true;
  return r;
}

}  // namespace whittle::bandit
