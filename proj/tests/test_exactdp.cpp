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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "support.hpp"
#include "whittle/bandit.hpp"
#include "whittle/exactdp.hpp"
#include "whittle/experiments.hpp"
#include "whittle/relaxation.hpp"

using namespace whittle;
using namespace whittle::exactdp;
using whittle::testing::make_class;
using whittle::testing::make_scenario;
using whittle::testing::valid;

namespace {

double probability_of(const std::vector<Outcome>& outs, int age, bool delivered) {
  double total = 0;
  for (const auto& o : outs)
    if (o.next_age == age && o.delivered == delivered) total += o.probability;
  return total;
}

/// Independent expectimin over every action sequence and outcome tree for
/// two clients sharing one transmission slot.
double brute_force_value(const ValidScenario& s, int t, std::vector<int> ages) {
  if (t == 0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int choice = -1; choice < s.n_clients(); ++choice) {
    double cost = 0;
    for (int n = 0; n < s.n_clients(); ++n) {
      const auto& c = s.client_class(n);
      cost += ages[n] == c.tau ? 1.0 : 0.0;
      if (n == choice) cost += s.eta() * c.energy;
    }
    // Enumerate outcomes of the scheduled client; idle clients age by one.
    std::vector<int> next(ages);
    for (int n = 0; n < s.n_clients(); ++n) next[n] = std::min(ages[n] + 1, s.client_class(n).tau);
    double future;
    if (choice < 0) {
      future = brute_force_value(s, t - 1, next);
    } else {
      const double p = s.client_class(choice).p;
      auto ok = next;
      ok[choice] = 0;
      future = p * brute_force_value(s, t - 1, ok) + (1 - p) * brute_force_value(s, t - 1, next);
    }
    best = std::min(best, cost + future);
  }
  return best;
}

}  // namespace

TEST_SUITE("exactdp") {
  TEST_CASE("kernel: saturation while passive") {
    const auto c = make_class(0.8, 5, 3);
    const auto outs = kernel_outcomes(c, 5, false);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].next_age == 5);
    CHECK(outs[0].probability == 1.0);
    CHECK_FALSE(outs[0].delivered);
  }

  TEST_CASE("kernel: active transmission") {
    const auto c = make_class(0.8, 5, 3);
    const auto outs = kernel_outcomes(c, 2, true);
    CHECK(probability_of(outs, 0, true) == doctest::Approx(0.8));
    CHECK(probability_of(outs, 3, false) == doctest::Approx(0.2));
  }

  TEST_CASE("kernel: certain delivery") {
    const auto outs = kernel_outcomes(make_class(1.0, 4, 1), 3, true);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].next_age == 0);
    CHECK(outs[0].delivered);
  }

  TEST_CASE("kernel rows sum to one and sampling matches the rows") {
    for (double p : {0.05, 0.5, 0.97}) {
      const auto c = make_class(p, 6, 1);
      for (int age = 0; age <= 6; ++age) {
        for (bool active : {false, true}) {
          double sum = 0;
          for (const auto& o : kernel_outcomes(c, age, active)) sum += o.probability;
          CHECK(std::abs(sum - 1.0) <= 1e-12);
          const auto lo = kernel_sample(c, age, active, 0.0);
          const auto hi = kernel_sample(c, age, active, 0.999999);
          if (active) {
            CHECK(lo.delivered);
            CHECK_FALSE(hi.delivered);
          } else {
            CHECK(lo.next_age == std::min(age + 1, 6));
          }
        }
      }
    }
  }

  TEST_CASE("joint space round-trips and puts the all-zero state first") {
    const JointSpace space({2, 3, 1});
    CHECK(space.size() == 24);
    CHECK(space.encode(std::vector<int>{0, 0, 0}) == 0);
    for (std::size_t x = 0; x < space.size(); ++x) CHECK(space.encode(space.decode(x)) == x);
    CHECK(space.decode(1) == std::vector<int>{1, 0, 0});
  }

  TEST_CASE("action enumeration respects the limit and includes the empty set") {
    const auto acts = enumerate_actions(4, 2);
    CHECK(acts.size() == 1 + 4 + 6);
    CHECK(acts.front().mask == 0);
    for (const auto& a : acts) CHECK(a.size() <= 2);
    CHECK(JointAction::from_set(std::vector<int>{0, 3}).mask == 9);
    CHECK(JointAction{9}.active_set() == std::vector<int>{0, 3});
  }

  TEST_CASE("per-slot cost") {
    const auto s = valid(make_scenario({make_class(0.5, 3, 2)}, 2, 1.0, 0.1));
    CHECK(per_slot_cost(std::vector<int>{0, 2}, JointAction{}, s) == 0.0);
    CHECK(per_slot_cost(std::vector<int>{3, 2}, JointAction{}, s) == 1.0);
    CHECK(per_slot_cost(std::vector<int>{3, 3}, JointAction{2}, s) == doctest::Approx(2.2));
  }

  TEST_CASE("finite horizon: single deterministic client") {
    SUBCASE("fresh start costs nothing") {
      const auto s = valid(make_scenario({make_class(1.0, 1, 0)}, 1, 1.0, 0.0), true);
      const auto r = finite_horizon_dp(s, 1);
      CHECK(r.final_values()[0] == 0.0);
    }
    SUBCASE("passive beats paying more than the penalty") {
      const auto s = valid(make_scenario({make_class(1.0, 1, 2)}, 1, 1.0, 1.0), true);
      const auto r = finite_horizon_dp(s, 1);
      CHECK(r.final_values()[1] == 1.0);
      REQUIRE(r.optimal_actions[1].size() == 1);
      CHECK(r.optimal_actions[1][0].mask == 0);
    }
  }

  TEST_CASE("finite horizon matches an exhaustive expectimin for two clients") {
    const auto s = valid(make_scenario({make_class(0.5, 2, 0)}, 2, 0.5, 0.0));
    const auto r = finite_horizon_dp(s, 3);
    for (std::size_t x = 0; x < r.space.size(); ++x) {
      CHECK(r.values[3][x] == doctest::Approx(brute_force_value(s, 3, r.space.decode(x))).epsilon(1e-14));
    }
  }

  TEST_CASE("finite horizon with energy matches the expectimin") {
    const auto s = valid(experiments::small_scenario());
    const auto r = finite_horizon_dp(s, 4);
    for (std::size_t x = 0; x < r.space.size(); ++x) {
      CHECK(r.values[4][x] == doctest::Approx(brute_force_value(s, 4, r.space.decode(x))).epsilon(1e-14));
    }
  }

  TEST_CASE("finite horizon values grow with the horizon") {
    const auto s = valid(experiments::small_scenario());
    const auto r = finite_horizon_dp(s, 8);
    for (std::size_t t = 0; t + 1 < r.values.size(); ++t)
      for (std::size_t x = 0; x < r.space.size(); ++x) CHECK(r.values[t + 1][x] >= r.values[t][x]);
  }

  TEST_CASE("truncation equivalence: one client") {
    const auto s = valid(make_scenario({make_class(0.5, 2, 0)}, 1, 1.0, 0.0));
    const auto r = truncation_equivalence_check(s, 4, 3);
    CHECK(r.passed);
    CHECK(r.states_checked >= 3);
    CHECK(r.max_identity_residual <= 1e-9);
  }

  TEST_CASE("truncation equivalence: small two-class instance") {
    const auto s = valid(experiments::small_scenario());
    const auto r = truncation_equivalence_check(s, 5, 2);
    CHECK(r.passed);
    CHECK(r.counterexamples.empty());
    CHECK(r.max_truncated_residual <= 1e-9);
  }

  TEST_CASE("truncation equivalence: zero horizon") {
    const auto r = truncation_equivalence_check(valid(experiments::small_scenario()), 0, 2);
    CHECK(r.passed);
    CHECK(r.max_identity_residual == 0.0);
  }

  TEST_CASE("average cost of one deterministic client") {
    SUBCASE("cheap energy: always transmit") {
      const auto s = valid(make_scenario({make_class(1.0, 1, 0.5)}, 1, 1.0, 1.0), true);
      const auto r = average_cost_optimal(s);
      CHECK(r.average_cost == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(r.policy[0].mask == 1);
    }
    SUBCASE("expensive energy: stay passive") {
      const auto s = valid(make_scenario({make_class(1.0, 1, 2)}, 1, 1.0, 1.0), true);
      const auto r = average_cost_optimal(s);
      CHECK(r.average_cost == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("average cost of one client equals the best threshold reward at zero subsidy") {
    for (const auto& c : {make_class(0.3, 4, 1), make_class(0.8, 5, 3), make_class(0.6, 10, 2)}) {
      const auto s = valid(make_scenario({c}, 1, 1.0, 0.1));
      const auto r = average_cost_optimal(s);
      CHECK(r.average_cost == doctest::Approx(-bandit::subsidy_solve(c, 0.1, 0.0).reward).epsilon(1e-9));
      CHECK(r.bias[0] == 0.0);
      CHECK(r.span_residual < 1e-9);
    }
  }

  TEST_CASE("bias solves the average-cost optimality equation") {
    const auto s = valid(experiments::small_scenario());
    const auto r = average_cost_optimal(s);
    const auto actions = enumerate_actions(s.n_clients(), s.active_limit());
    for (std::size_t x = 0; x < r.space.size(); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& a : actions) best = std::min(best, q_value(s, r.space, r.bias, x, a));
      CHECK(best == doctest::Approx(r.average_cost + r.bias[x]).epsilon(1e-7));
      CHECK(q_value(s, r.space, r.bias, x, r.policy[x]) == doctest::Approx(best).epsilon(1e-7));
    }
  }

  TEST_CASE("swapping identical clients leaves the optimum unchanged") {
    const auto a = valid(make_scenario({make_class(0.5, 3, 1, 0.5), make_class(0.5, 2, 1, 0.5)}, 2, 0.5, 0.1));
    const auto b = valid(make_scenario({make_class(0.5, 2, 1, 0.5), make_class(0.5, 3, 1, 0.5)}, 2, 0.5, 0.1));
    CHECK(average_cost_optimal(a).average_cost == doctest::Approx(average_cost_optimal(b).average_cost).epsilon(1e-9));
    const auto sym = valid(make_scenario({make_class(0.5, 3, 1)}, 2, 0.5, 0.1));
    const auto r = average_cost_optimal(sym);
    for (std::size_t x = 0; x < r.space.size(); ++x) {
      auto ages = r.space.decode(x);
      std::swap(ages[0], ages[1]);
      CHECK(r.bias[r.space.encode(ages)] == doctest::Approx(r.bias[x]).epsilon(1e-7));
    }
  }

  TEST_CASE("oversized instances are refused") {
    const auto s = valid(make_scenario({make_class(0.5, 30, 1)}, 6, 0.5, 0.1));
    CHECK_THROWS_AS(average_cost_optimal(s), CapacityError);
    CHECK_THROWS_AS(finite_horizon_dp(s, 2), CapacityError);
  }

  TEST_CASE("chain stationary distribution under always-active") {
    const double p = 0.3;
    const auto c = make_class(p, 4, 1);
    const auto pi = chain_stationary(c, {0, 0.0});
    for (int i = 0; i < 4; ++i) CHECK(pi[i] == doctest::Approx(p * std::pow(1 - p, i)).epsilon(1e-12));
    CHECK(pi[4] == doctest::Approx(std::pow(1 - p, 4)).epsilon(1e-12));
    CHECK(chain_reward_oracle(c, 0.2, 0.7, {0, 0.0}) == doctest::Approx(-0.2 - std::pow(1 - p, 4)).epsilon(1e-12));
  }

  TEST_CASE("chain reward of a deterministic cycle") {
    const auto c = make_class(1.0, 3, 1);
    CHECK(chain_reward_oracle(c, 0.5, 0.0, {3, 0.0}) == doctest::Approx(-(1 + 0.5) / 4.0).epsilon(1e-12));
  }

  TEST_CASE("randomized threshold interpolates its endpoints") {
    const auto c = make_class(0.4, 5, 1);
    const double omega = bandit::whittle_index(c, 0.1, 2);
    const double r0 = chain_reward_oracle(c, 0.1, omega, {2, 0.0});
    const double r1 = chain_reward_oracle(c, 0.1, omega, {2, 1.0});
    const double rh = chain_reward_oracle(c, 0.1, omega, {2, 0.5});
    CHECK(r0 == doctest::Approx(r1).epsilon(1e-12));
    CHECK(rh == doctest::Approx(r0).epsilon(1e-12));
    CHECK(r1 == doctest::Approx(chain_reward_oracle(c, 0.1, omega, {3, 0.0})).epsilon(1e-12));
  }

  TEST_CASE("every single-client chain is unichain") {
    for (double p : {0.1, 0.5, 0.9})
      for (int tau : {1, 3, 8}) CHECK(unichain_witness(make_class(p, tau, 1)));
  }

  TEST_CASE("relaxed bound <= optimum on the small instance") {
    const auto s = valid(experiments::small_scenario());
    CHECK(relaxation::relaxed_bound(s).cost_lower_bound_per_client() <=
          average_cost_optimal(s).average_cost_per_client + 1e-12);
  }
}
