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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "whittle/bandit.hpp"
#include "whittle/core.hpp"
#include "whittle/relaxation.hpp"

namespace whittle::testing {

inline ClientClass make_class(double p, int tau, double energy, double proportion = 1.0) {
  ClientClass c;
  c.p = p;
  c.tau = tau;
  c.energy = energy;
  c.proportion = proportion;
  return c;
}

inline Scenario make_scenario(std::vector<ClientClass> classes, std::int64_t n, double alpha, double eta,
                              std::int64_t horizon = 1000, std::int64_t replications = 1, std::uint64_t seed = 1) {
  Scenario s;
  s.classes = std::move(classes);
  s.n_clients = n;
  s.alpha = alpha;
  s.eta = eta;
  s.horizon_slots = horizon;
  s.replications = replications;
  s.master_seed = seed;
  return s;
}

inline ValidScenario valid(const Scenario& s, bool degenerate_ok = false) {
  ValidationOptions o;
  o.degenerate_ok = degenerate_ok;
  return require_valid(s, o);
}

/// Renewal-cycle reward of the deterministic threshold policy, summed term by
/// term rather than from a closed form.
inline double renewal_reward(double p, int tau, double energy_cost, double omega, int theta) {
  double cycle_reward = theta * omega;
  double cycle_length = theta;
  double survive = 1.0;  // probability the active phase lasts beyond j slots
  for (int j = 0; survive > 1e-300 && j < 200000; ++j) {
    const double at_tau = theta + j >= tau ? 1.0 : 0.0;
    cycle_reward -= survive * (energy_cost + at_tau);
    cycle_length += survive;
    survive *= 1.0 - p;
  }
  return cycle_reward / cycle_length;
}

/// Random class with parameters drawn from generous ranges.
inline ClientClass random_class(std::mt19937_64& g, int max_tau = 12) {
  std::uniform_real_distribution<double> up(0.05, 0.95);
  std::uniform_int_distribution<int> ut(1, max_tau);
  std::uniform_real_distribution<double> ue(0.0, 3.0);
  return make_class(up(g), ut(g), ue(g));
}

/// Random valid scenario with 1-3 equally weighted classes.
inline ValidScenario random_scenario(std::mt19937_64& g) {
  std::uniform_int_distribution<int> uk(1, 3);
  std::uniform_int_distribution<int> um(2, 12);
  std::uniform_real_distribution<double> ua(0.05, 1.0);
  std::uniform_real_distribution<double> ueta(0.0, 0.5);
  const int k = uk(g);
  std::vector<ClientClass> classes;
  for (int i = 0; i < k; ++i) {
    auto c = random_class(g);
    c.proportion = 1.0 / k;
    classes.push_back(c);
  }
  const std::int64_t n = static_cast<std::int64_t>(k) * um(g);
  double alpha = ua(g);
  if (std::floor(alpha * n) < 1) alpha = 1.0 / static_cast<double>(n);
  auto s = make_scenario(classes, n, alpha, ueta(g));
  // equal proportions of 1/3 do not sum to exactly 1 in binary
  if (k == 3) s.classes[2].proportion = 1.0 - s.classes[0].proportion - s.classes[1].proportion;
  return require_valid(s);
}

struct GridMinimum {
  double omega = 0.0;
  double coarse = 0.0;   ///< minimum over the grid points alone
  double refined = 0.0;  ///< after golden-section refinement around the best cell
};

/// Minimum of the dual over a uniform grid on [0, max index] with the given
/// number of cells, followed by golden-section refinement inside the two
/// cells adjacent to the best grid point.
inline GridMinimum dense_grid_minimum(const ValidScenario& s, int cells = 10000) {
  double top = 0.0;
  for (const auto& c : s.classes())
    for (int i = 0; i < c.tau; ++i) top = std::max(top, bandit::whittle_index(c, s.eta(), i));
  const double step = top > 0 ? top / cells : 0.0;
  GridMinimum out;
  out.coarse = relaxation::dual_value(s, 0.0);
  int best = 0;
  for (int j = 1; j <= cells && step > 0; ++j) {
    const double v = relaxation::dual_value(s, j * step);
    if (v < out.coarse) {
      out.coarse = v;
      best = j;
    }
  }
  out.omega = best * step;
  out.refined = out.coarse;
  if (step == 0.0) return out;
  double a = std::max(0.0, (best - 1) * step), b = (best + 1) * step;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = relaxation::dual_value(s, x1), f2 = relaxation::dual_value(s, x2);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    if (f1 <= f2) {
      b = x2, x2 = x1, f2 = f1, x1 = b - phi * (b - a), f1 = relaxation::dual_value(s, x1);
    } else {
      a = x1, x1 = x2, f1 = f2, x2 = a + phi * (b - a), f2 = relaxation::dual_value(s, x2);
    }
  }
  for (double v : {f1, f2, relaxation::dual_value(s, a), relaxation::dual_value(s, b)}) {
    if (v < out.refined) out.refined = v;
  }
  return out;
}

}  // namespace whittle::testing
