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

#include "whittle/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <limits>

#include <json.hpp>

#include "whittle/bandit.hpp"
#include "whittle/exactdp.hpp"
#include "whittle/io.hpp"
#include "whittle/relaxation.hpp"
#include "whittle/report.hpp"

namespace whittle::experiments {

Scenario reference_scenario() {
  Scenario s;
  s.classes = {{0.6, 10, 2.0, 0.5}, {0.8, 5, 3.0, 0.5}};
  s.n_clients = 100;
  s.alpha = 0.3;
  s.eta = 0.1;
  s.horizon_slots = 200'000;
  s.replications = 20;
  s.master_seed = 20160517;
  return s;
}

Scenario small_scenario() {
  Scenario s;
  s.classes = {{0.5, 2, 1.0, 0.5}, {0.7, 3, 1.0, 0.5}};
  s.n_clients = 2;
  s.alpha = 0.5;
  s.eta = 0.1;
  s.horizon_slots = 200'000;
  s.replications = 20;
  s.master_seed = 7;
  return s;
}

std::vector<std::int64_t> default_population_sweep() { return {10, 20, 50, 100, 200}; }

std::vector<double> default_eta_sweep() {
  std::vector<double> etas;
  constexpr int kPoints = 10;
  for (int k = 0; k < kPoints; ++k) etas.push_back(0.01 * std::pow(2.0 / 0.01, static_cast<double>(k) / (kPoints - 1)));
  etas.back() = 2.0;
  return etas;
}

void validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> errors;
  if (spec.n_clients.empty() && spec.eta.empty()) errors.emplace_back("experiment has no sweep values");
  if (!std::is_sorted(spec.n_clients.begin(), spec.n_clients.end(), std::less_equal<>())) {
    errors.emplace_back("n_clients sweep must be strictly increasing");
  }
  if (!std::is_sorted(spec.eta.begin(), spec.eta.end(), std::less_equal<>())) {
    errors.emplace_back("eta sweep must be strictly increasing");
  }
  for (auto n : spec.n_clients) {
    try {
      (void)spec.base.with_clients(n);
    } catch (const ScenarioError& e) {
      for (const auto& msg : e.errors()) errors.push_back(fmt::format("n_clients={}: {}", n, msg));
    }
  }
  for (double eta : spec.eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) errors.push_back(fmt::format("eta sweep value {} must be >= 0", eta));
  }
  if (!errors.empty()) throw ScenarioError(std::move(errors));
}

std::vector<PopulationRow> run_population_sweep(const ExperimentSpec& spec) {
  validate_spec(spec);
  if (spec.n_clients.empty()) throw ScenarioError({"population sweep needs at least one n_clients value"});
  const auto factory = sim::make_policy_factory(sim::PolicySpec{});
  std::vector<PopulationRow> rows;
  for (auto n : spec.n_clients) {
    const ValidScenario s = spec.base.with_clients(n);
    const auto bound = relaxation::relaxed_bound(s);
    const auto rep = sim::replicate(s, factory, sim::options_for(s, spec.threads));
    rows.push_back({n, bound.cost_lower_bound_per_client(), rep.pooled.cost.mean,
                    rep.pooled.cost.se.value_or(std::numeric_limits<double>::quiet_NaN())});
  }
  return rows;
}

std::vector<EtaRow> run_eta_sweep(const ExperimentSpec& spec) {
  validate_spec(spec);
  if (spec.eta.empty()) throw ScenarioError({"eta sweep needs at least one value"});
  const auto factory = sim::make_policy_factory(sim::PolicySpec{});
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<EtaRow> rows;
  for (double eta : spec.eta) {
    const ValidScenario s = spec.base.with_eta(eta);
    const auto rep = sim::replicate(s, factory, sim::options_for(s, spec.threads));
    rows.push_back({eta, rep.pooled.penalty.mean, rep.pooled.penalty.se.value_or(nan), rep.pooled.energy.mean,
                    rep.pooled.energy.se.value_or(nan)});
  }
  return rows;
}

std::string population_csv(const std::vector<PopulationRow>& rows, const Scenario& base) {
  std::string out = "N,bound,whittle_mean,whittle_se\n";
  std::vector<std::int64_t> ns;
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", r.n_clients, format_real(r.bound), format_real(r.whittle_mean),
                       format_real(r.whittle_se));
    ns.push_back(r.n_clients);
  }
  out += fmt::format("# sweep=n_clients:{} horizon={} replications={} burn_in=horizon/10\n", fmt::join(ns, ";"),
                     base.horizon_slots, base.replications);
  return out + report::csv_footer(base);
}

std::string eta_csv(const std::vector<EtaRow>& rows, const Scenario& base) {
  std::string out = "eta,penalty_mean,penalty_se,energy_mean,energy_se\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", format_real(r.eta), format_real(r.penalty_mean), format_real(r.penalty_se),
                       format_real(r.energy_mean), format_real(r.energy_se));
  }
  out += fmt::format("# sweep=eta horizon={} replications={} burn_in=horizon/10\n", base.horizon_slots,
                     base.replications);
  return out + report::csv_footer(base);
}

bool OracleSuiteReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

namespace {

struct GridPoint {
  ClientClass cls;
  double eta;
};

/// p in {0.1..0.9}, tau in {1..8}, eta*E in {0, 0.2, 1} (E = 1).
std::vector<GridPoint> parameter_grid() {
  std::vector<GridPoint> g;
  for (int pi = 1; pi <= 9; ++pi) {
    for (int tau = 1; tau <= 8; ++tau) {
      for (double ee : {0.0, 0.2, 1.0}) g.push_back({{pi / 10.0, tau, 1.0, 1.0}, ee});
    }
  }
  return g;
}

OracleCheck check_truncation(const ValidScenario& s, const OracleSuiteOptions& o) {
  const auto rep = exactdp::truncation_equivalence_check(s, o.horizon, o.extension);
  OracleCheck c{"truncation_equivalence", rep.passed,
                std::max(rep.max_identity_residual, rep.max_truncated_residual),
                fmt::format("{} states checked, T={}, K={}", rep.states_checked, o.horizon, o.extension)};
  if (!rep.counterexamples.empty()) c.detail += "; first: " + rep.counterexamples.front();
  return c;
}

OracleCheck check_closed_form_vs_chain() {
  double worst = 0.0;
  for (const auto& gp : parameter_grid()) {
    for (int theta = 0; theta <= gp.cls.tau; ++theta) {
      for (double omega : {0.0, 0.3, 1.0, 5.0}) {
        const double closed = bandit::avg_reward_threshold(gp.cls, gp.eta, omega, theta);
        const double chain = exactdp::chain_reward_oracle(gp.cls, gp.eta, omega, {theta, 0.0});
        worst = std::max(worst, std::abs(closed - chain));
      }
    }
  }
  return {"closed_form_vs_chain", worst <= 1e-10, worst, "max |closed form - stationary chain| over the grid"};
}

OracleCheck check_indifference(const IndexFunction& index) {
  double worst = 0.0;
  for (const auto& gp : parameter_grid()) {
    const auto& c = gp.cls;
    for (int theta = 0; theta + 2 <= c.tau; ++theta) {
      const double w = index(c, gp.eta, theta);
      worst = std::max(worst, std::abs(bandit::avg_reward_threshold(c, gp.eta, w, theta) -
                                       bandit::avg_reward_threshold(c, gp.eta, w, theta + 1)));
    }
    const double w = index(c, gp.eta, c.tau - 1);
    worst = std::max(worst, std::abs(bandit::avg_reward_threshold(c, gp.eta, w, c.tau) -
                                     bandit::avg_reward_always_passive(w)));
  }
  return {"indifference_identities", worst <= 1e-12, worst, "threshold rewards agree at each index value"};
}

OracleCheck check_monotone_index(const IndexFunction& index) {
  int violations = 0;
  for (const auto& gp : parameter_grid()) {
    const auto& c = gp.cls;
    for (int i = 0; i + 1 < c.tau; ++i) {
      if (!(index(c, gp.eta, i + 1) > index(c, gp.eta, i))) ++violations;
    }
    if (index(c, gp.eta, c.tau) != index(c, gp.eta, c.tau - 1)) ++violations;
  }
  return {"index_monotonicity", violations == 0, static_cast<double>(violations),
          "strictly increasing below tau, flat at tau"};
}

OracleCheck check_single_client_optimum(const ValidScenario& s) {
  double worst = 0.0;
  for (const auto& cls : s.classes()) {
    Scenario one = s.scenario();
    one.classes = {cls};
    one.classes[0].proportion = 1.0;
    one.n_clients = 1;
    one.alpha = 1.0;
    const auto v = require_valid(one);
    const double dp = exactdp::average_cost_optimal(v).average_cost;
    const double closed = -bandit::subsidy_solve(cls, s.eta(), 0.0).reward;
    worst = std::max(worst, std::abs(dp - closed));
  }
  return {"single_client_optimum", worst <= 1e-9, worst,
          "value iteration optimum equals best threshold reward at zero subsidy"};
}

OracleCheck check_relabeling(const ValidScenario& s) {
  Scenario rev = s.scenario();
  std::reverse(rev.classes.begin(), rev.classes.end());
  const auto sr = require_valid(rev);
  const auto a = exactdp::average_cost_optimal(s);
  const auto b = exactdp::average_cost_optimal(sr);

  // Client j of class k moves from offset_k + j to the reversed offset.
  const int n = s.n_clients();
  const int k_count = static_cast<int>(s.classes().size());
  std::vector<int> perm(n);
  for (int c = 0; c < n; ++c) {
    const int k = s.class_of()[c];
    const int j = c - s.class_offsets()[k];
    perm[c] = sr.class_offsets()[k_count - 1 - k] + j;
  }
  double worst_gap = 0.0;
  std::vector<int> ages(n), mapped(n);
  const auto actions = exactdp::enumerate_actions(n, sr.active_limit());
  for (std::size_t x = 0; x < a.space.size(); ++x) {
    a.space.decode(x, ages);
    for (int c = 0; c < n; ++c) mapped[perm[c]] = ages[c];
    const std::size_t y = b.space.encode(mapped);
    std::vector<int> act;
    for (int c : a.policy[x].active_set()) act.push_back(perm[c]);
    const double q = exactdp::q_value(sr, b.space, b.bias, y, exactdp::JointAction::from_set(act));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : actions) best = std::min(best, exactdp::q_value(sr, b.space, b.bias, y, u));
    worst_gap = std::max(worst_gap, q - best);
  }
  const double cost_gap = std::abs(a.average_cost - b.average_cost);
  return {"relabeling_invariance", cost_gap <= 1e-9 && worst_gap <= 1e-7, cost_gap,
          fmt::format("relabeled policy suboptimality {:.3g}", worst_gap)};
}

OracleCheck check_sandwich(const ValidScenario& s, const OracleSuiteOptions& o) {
  const double bound = relaxation::relaxed_bound(s).cost_lower_bound_per_client();
  const exactdp::DpOptions dp_options;
  const double optimum = exactdp::average_cost_optimal(s, dp_options).average_cost_per_client;
  std::vector<bandit::WhittleTable> tables;
  for (const auto& cls : s.classes()) {
    bandit::WhittleTable t{cls, {}};
    for (int i = 0; i <= cls.tau; ++i) t.values.push_back(o.index(cls, s.eta(), i));
    tables.push_back(std::move(t));
  }
  const sim::PolicyFactory factory = [&tables](const ValidScenario&, RandomStream stream) {
    return sim::make_whittle_policy(tables, sim::TieBreak::kLowestId, stream);
  };
  const auto rep = sim::replicate(s, factory, sim::options_for(s, o.threads));
  const double se = rep.pooled.cost.se.value_or(0.0);
  // the optimum is only known to within the value-iteration stopping tolerance
  const bool ok = bound <= optimum + dp_options.tolerance && optimum <= rep.pooled.cost.mean + 3.0 * se;
  return {"sandwich", ok, optimum - bound,
          fmt::format("bound {:.10g} <= optimum {:.10g} <= whittle {:.10g} + 3*{:.3g}", bound, optimum,
                      rep.pooled.cost.mean, se)};
}

OracleCheck check_unichain(const ValidScenario& s) {
  int failures = 0;
  for (const auto& cls : s.classes()) failures += exactdp::unichain_witness(cls) ? 0 : 1;
  return {"unichain_witness", failures == 0, static_cast<double>(failures),
          "saturated age reachable under every stationary policy"};
}

}  // namespace

OracleSuiteReport run_oracle_suite(const ValidScenario& small, const OracleSuiteOptions& options) {
  OracleSuiteOptions o = options;
  if (!o.index) o.index = [](const ClientClass& c, double eta, int i) { return bandit::whittle_index(c, eta, i); };
  OracleSuiteReport r;
  r.checks.push_back(check_truncation(small, o));
  r.checks.push_back(check_closed_form_vs_chain());
  r.checks.push_back(check_indifference(o.index));
  r.checks.push_back(check_monotone_index(o.index));
  r.checks.push_back(check_single_client_optimum(small));
  r.checks.push_back(check_relabeling(small));
  r.checks.push_back(check_unichain(small));
  r.checks.push_back(check_sandwich(small, o));
  return r;
}

std::string oracle_suite_json(const OracleSuiteReport& report, const Scenario& s) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"detail", c.detail}});
  }
  nlohmann::json doc = {
      {"all_passed", report.all_passed()}, {"checks", checks}, {"scenario_hash", scenario_hash_hex(s)}};
  return doc.dump(2) + "\n";
}

}  // namespace whittle::experiments
