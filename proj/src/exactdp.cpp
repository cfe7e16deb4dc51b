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

#include "whittle/exactdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <limits>

namespace whittle::exactdp {

namespace {

constexpr double kActionTieTolerance = 1e-9;

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

struct ClientView {
  double p;
  int tau;
  double energy_cost;  // eta * E
};

std::vector<ClientView> client_views(const ValidScenario& s) {
  std::vector<ClientView> v;
  v.reserve(s.n_clients());
  for (int n = 0; n < s.n_clients(); ++n) {
    const auto& c = s.client_class(n);
    v.push_back({c.p, c.tau, s.eta() * c.energy});
  }
  return v;
}

std::vector<std::size_t> strides_of(const std::vector<int>& bounds) {
  std::vector<std::size_t> strides(bounds.size());
  std::size_t stride = 1;
  for (std::size_t n = 0; n < bounds.size(); ++n) {
    strides[n] = stride;
    stride *= static_cast<std::size_t>(bounds[n]) + 1;
  }
  return strides;
}

/// Calls fn(next_index, probability) for every joint outcome of `mask`.
/// Failed or passive clients move to next_age(n, age); successful ones to 0.
template <class NextAge, class Fn>
void for_each_successor(std::span<const int> ages, std::uint64_t mask, std::span<const ClientView> clients,
                        std::span<const std::size_t> next_strides, NextAge&& next_age, Fn&& fn) {
  std::size_t base = 0;
  int active[64];
  std::size_t drop[64];  // index change when the client delivers
  int n_active = 0;
  for (std::size_t n = 0; n < ages.size(); ++n) {
    const int a = next_age(static_cast<int>(n), ages[n]);
    base += static_cast<std::size_t>(a) * next_strides[n];
    if ((mask >> n) & 1U) {
      active[n_active] = static_cast<int>(n);
      drop[n_active] = static_cast<std::size_t>(a) * next_strides[n];
      ++n_active;
    }
  }
  const std::uint64_t combos = 1ULL << n_active;
  for (std::uint64_t combo = 0; combo < combos; ++combo) {
    double prob = 1.0;
    std::size_t index = base;
    for (int k = 0; k < n_active; ++k) {
      const double p = clients[active[k]].p;
      if ((combo >> k) & 1U) {
        prob *= p;
        index -= drop[k];
      } else {
        prob *= 1.0 - p;
      }
    }
    if (prob > 0.0) fn(index, prob);
  }
}

double action_energy_cost(std::uint64_t mask, std::span<const ClientView> clients) {
  double c = 0.0;
  for (std::size_t n = 0; n < clients.size(); ++n) {
    if ((mask >> n) & 1U) c += clients[n].energy_cost;
  }
  return c;
}

double saturation_cost(std::span<const int> ages, std::span<const ClientView> clients) {
  double c = 0.0;
  for (std::size_t n = 0; n < ages.size(); ++n) c += ages[n] == clients[n].tau ? 1.0 : 0.0;
  return c;
}

void check_capacity(const JointSpace& space, std::size_t n_actions, const DpOptions& options) {
  const double work = static_cast<double>(space.size()) * static_cast<double>(n_actions);
  if (work > options.state_action_cap) {
    throw CapacityError(fmt::format("{} states x {} actions exceeds the exact-DP cap of {}; use the simulator for "
                                    "instances this large",
                                    space.size(), n_actions, options.state_action_cap));
  }
}

std::vector<int> tau_bounds(const ValidScenario& s) {
  std::vector<int> b;
  for (int n = 0; n < s.n_clients(); ++n) b.push_back(s.client_class(n).tau);
  return b;
}

/// One Bellman backup of the truncated model against `next`.
double truncated_q(std::span<const int> ages, std::uint64_t mask, std::span<const ClientView> clients,
                   std::span<const std::size_t> strides, std::span<const double> next) {
  double q = saturation_cost(ages, clients) + action_energy_cost(mask, clients);
  for_each_successor(
      ages, mask, clients, strides, [&](int n, int a) { return std::min(a + 1, clients[n].tau); },
      [&](std::size_t y, double prob) { q += prob * next[y]; });
  return q;
}

std::vector<JointAction> minimizers(std::span<const double> q, std::span<const JointAction> actions, double best) {
  std::vector<JointAction> out;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (near(q[k], best, kActionTieTolerance)) out.push_back(actions[k]);
  }
  return out;
}

std::string ages_string(std::span<const int> ages) { return fmt::format("({})", fmt::join(ages, ",")); }

std::string actions_string(std::span<const JointAction> actions) {
  std::vector<std::string> parts;
  for (const auto& a : actions) parts.push_back(fmt::format("{{{}}}", fmt::join(a.active_set(), ",")));
  return fmt::format("[{}]", fmt::join(parts, " "));
}

}  // namespace

std::vector<Outcome> kernel_outcomes(const ClientClass& c, int age, bool active) {
  const int advanced = std::min(age + 1, c.tau);
  if (!active) return {{advanced, false, 1.0}};
  std::vector<Outcome> out;
  if (c.p > 0.0) out.push_back({0, true, c.p});
  if (c.p < 1.0) out.push_back({advanced, false, 1.0 - c.p});
  return out;
}

Outcome kernel_sample(const ClientClass& c, int age, bool active, double u) {
  const int advanced = std::min(age + 1, c.tau);
  if (!active) return {advanced, false, 1.0};
  if (u < c.p) return {0, true, c.p};
  return {advanced, false, 1.0 - c.p};
}

JointSpace::JointSpace(std::vector<int> bounds) : bounds_(std::move(bounds)), strides_(strides_of(bounds_)) {
  size_ = 1;
  for (int b : bounds_) size_ *= static_cast<std::size_t>(b) + 1;
}

std::size_t JointSpace::encode(std::span<const int> ages) const {
  std::size_t index = 0;
  for (std::size_t n = 0; n < bounds_.size(); ++n) {
    if (ages[n] < 0 || ages[n] > bounds_[n]) throw std::out_of_range("JointSpace::encode: age out of range");
    index += static_cast<std::size_t>(ages[n]) * strides_[n];
  }
  return index;
}

void JointSpace::decode(std::size_t index, std::span<int> ages) const {
  for (std::size_t n = 0; n < bounds_.size(); ++n) {
    const std::size_t radix = static_cast<std::size_t>(bounds_[n]) + 1;
    ages[n] = static_cast<int>(index % radix);
    index /= radix;
  }
}

std::vector<int> JointSpace::decode(std::size_t index) const {
  std::vector<int> ages(bounds_.size());
  decode(index, ages);
  return ages;
}

std::vector<int> JointAction::active_set() const {
  std::vector<int> out;
  for (int n = 0; n < 64; ++n) {
    if (contains(n)) out.push_back(n);
  }
  return out;
}

int JointAction::size() const noexcept { return std::popcount(mask); }

JointAction JointAction::from_set(std::span<const int> clients) {
  JointAction a;
  for (int n : clients) a.mask |= 1ULL << n;
  return a;
}

std::vector<JointAction> enumerate_actions(int n, int limit) {
  if (n > 63) throw CapacityError("exact DP supports at most 63 clients");
  std::vector<JointAction> out;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    if (std::popcount(mask) <= limit) out.push_back({mask});
  }
  return out;
}

double per_slot_cost(std::span<const int> ages, const JointAction& action, const ValidScenario& s) {
  double c = 0.0;
  for (int n = 0; n < s.n_clients(); ++n) {
    const auto& cls = s.client_class(n);
    if (ages[n] == cls.tau) c += 1.0;
    if (action.contains(n)) c += s.eta() * cls.energy;
  }
  return c;
}

FiniteHorizonResult finite_horizon_dp(const ValidScenario& s, int horizon, const DpOptions& options) {
  if (horizon < 0) throw std::invalid_argument("finite_horizon_dp: horizon must be >= 0");
  const auto clients = client_views(s);
  const auto actions = enumerate_actions(s.n_clients(), s.active_limit());
  FiniteHorizonResult r;
  r.space = JointSpace(tau_bounds(s));
  check_capacity(r.space, actions.size(), options);
  const auto strides = strides_of(r.space.bounds());

  r.values.assign(1, std::vector<double>(r.space.size(), 0.0));
  r.optimal_actions.assign(r.space.size(), {});
  std::vector<int> ages(s.n_clients());
  std::vector<double> q(actions.size());
  for (int t = 1; t <= horizon; ++t) {
    const auto& prev = r.values.back();
    std::vector<double> cur(r.space.size());
    for (std::size_t x = 0; x < r.space.size(); ++x) {
      r.space.decode(x, ages);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < actions.size(); ++k) {
        q[k] = truncated_q(ages, actions[k].mask, clients, strides, prev);
        best = std::min(best, q[k]);
      }
      cur[x] = best;
      if (t == horizon) r.optimal_actions[x] = minimizers(q, actions, best);
    }
    r.values.push_back(std::move(cur));
  }
  return r;
}

namespace {

/// Untruncated recursion with delivery-time charges (x_n + 1 - tau_n)^+ and
/// the terminal charge sum_n (x_n - tau_n)^+ for the last open interval.
struct UntruncatedDp {
  std::vector<JointSpace> spaces;  // spaces[j]: bounds for j slots to go
  std::vector<std::vector<double>> values;
  std::vector<std::vector<JointAction>> top_actions;  // minimizers at j = T
};

UntruncatedDp untruncated_dp(const ValidScenario& s, int horizon, int extension, const DpOptions& options) {
  const auto clients = client_views(s);
  const auto actions = enumerate_actions(s.n_clients(), s.active_limit());
  const int n = s.n_clients();
  UntruncatedDp d;
  for (int j = 0; j <= horizon; ++j) {
    std::vector<int> bounds;
    for (int c = 0; c < n; ++c) bounds.push_back(clients[c].tau + extension + (horizon - j));
    d.spaces.emplace_back(std::move(bounds));
  }
  check_capacity(d.spaces.front(), actions.size() * static_cast<std::size_t>(horizon + 1), options);

  std::vector<int> ages(n);
  {
    const auto& sp = d.spaces[0];
    std::vector<double> v0(sp.size());
    for (std::size_t x = 0; x < sp.size(); ++x) {
      sp.decode(x, ages);
      double c = 0.0;
      for (int k = 0; k < n; ++k) c += std::max(0, ages[k] - clients[k].tau);
      v0[x] = c;
    }
    d.values.push_back(std::move(v0));
  }

  std::vector<double> q(actions.size());
  for (int j = 1; j <= horizon; ++j) {
    const auto& sp = d.spaces[j];
    const auto next_strides = strides_of(d.spaces[j - 1].bounds());
    const auto& prev = d.values[j - 1];
    std::vector<double> cur(sp.size());
    if (j == horizon) d.top_actions.assign(sp.size(), {});
    for (std::size_t x = 0; x < sp.size(); ++x) {
      sp.decode(x, ages);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < actions.size(); ++k) {
        const std::uint64_t mask = actions[k].mask;
        double v = action_energy_cost(mask, clients);
        for (int c = 0; c < n; ++c) {
          if ((mask >> c) & 1U) v += clients[c].p * std::max(0, ages[c] + 1 - clients[c].tau);
        }
        for_each_successor(
            ages, mask, clients, next_strides, [](int, int a) { return a + 1; },
            [&](std::size_t y, double prob) { v += prob * prev[y]; });
        q[k] = v;
        best = std::min(best, v);
      }
      cur[x] = best;
      if (j == horizon) d.top_actions[x] = minimizers(q, actions, best);
    }
    d.values.push_back(std::move(cur));
  }
  return d;
}

}  // namespace

TruncationReport truncation_equivalence_check(const ValidScenario& s, int horizon, int extension,
                                              const DpOptions& options) {
  if (extension < 1) throw std::invalid_argument("truncation_equivalence_check: extension must be >= 1");
  if (horizon < 0) throw std::invalid_argument("truncation_equivalence_check: horizon must be >= 0");
  TruncationReport rep;
  const auto untrunc = untruncated_dp(s, horizon, extension, options);
  const auto trunc = finite_horizon_dp(s, horizon, options);
  const auto& space = untrunc.spaces[horizon];
  const auto& values = untrunc.values[horizon];
  const int n = s.n_clients();
  const bool compare_actions = horizon > 0;

  auto fail = [&](std::string msg) {
    rep.passed = false;
    if (rep.counterexamples.size() < 20) rep.counterexamples.push_back(std::move(msg));
  };

  std::vector<int> ages(n);
  std::vector<int> capped(n);
  for (std::size_t x = 0; x < space.size(); ++x) {
    space.decode(x, ages);
    bool in_test_range = true;
    for (int k = 0; k < n; ++k) in_test_range &= ages[k] <= s.client_class(k).tau + extension;
    if (!in_test_range) continue;
    ++rep.states_checked;

    for (int i = 0; i < n; ++i) {
      const int tau = s.client_class(i).tau;
      if (ages[i] <= tau) continue;
      capped = ages;
      capped[i] = tau;
      const std::size_t y = space.encode(capped);
      const double excess = static_cast<double>(ages[i] - tau);
      const double resid = std::abs(values[x] - (excess + values[y]));
      rep.max_identity_residual = std::max(rep.max_identity_residual, resid);
      if (resid > kActionTieTolerance * std::max(1.0, std::abs(values[x]))) {
        fail(fmt::format("V{} = {} but {} + V{} = {}", ages_string(ages), values[x], excess, ages_string(capped),
                         excess + values[y]));
      }
      if (compare_actions && untrunc.top_actions[x] != untrunc.top_actions[y]) {
        fail(fmt::format("optimal actions differ: {} at {} vs {} at {}", actions_string(untrunc.top_actions[x]),
                         ages_string(ages), actions_string(untrunc.top_actions[y]), ages_string(capped)));
      }
    }

    for (int k = 0; k < n; ++k) capped[k] = std::min(ages[k], s.client_class(k).tau);
    const std::size_t t = trunc.space.encode(capped);
    bool all_within = true;
    for (int k = 0; k < n; ++k) all_within &= ages[k] <= s.client_class(k).tau;
    if (all_within) {
      const double resid = std::abs(values[x] - trunc.final_values()[t]);
      rep.max_truncated_residual = std::max(rep.max_truncated_residual, resid);
      if (resid > kActionTieTolerance * std::max(1.0, std::abs(values[x]))) {
        fail(fmt::format("untruncated V{} = {} but truncated V = {}", ages_string(ages), values[x],
                         trunc.final_values()[t]));
      }
    }
    if (compare_actions && untrunc.top_actions[x] != trunc.optimal_actions[t]) {
      fail(fmt::format("optimal actions at {} differ from truncated state {}: {} vs {}", ages_string(ages),
                       ages_string(capped), actions_string(untrunc.top_actions[x]),
                       actions_string(trunc.optimal_actions[t])));
    }
  }
  return rep;
}

double q_value(const ValidScenario& s, const JointSpace& space, std::span<const double> h, std::size_t state,
               const JointAction& action) {
  const auto clients = client_views(s);
  const auto strides = strides_of(space.bounds());
  const auto ages = space.decode(state);
  return truncated_q(ages, action.mask, clients, strides, h);
}

DPResult average_cost_optimal(const ValidScenario& s, const DpOptions& options) {
  const auto clients = client_views(s);
  const auto actions = enumerate_actions(s.n_clients(), s.active_limit());
  DPResult r;
  r.space = JointSpace(tau_bounds(s));
  check_capacity(r.space, actions.size(), options);
  const auto strides = strides_of(r.space.bounds());
  const std::size_t size = r.space.size();
  const double lambda = options.self_loop > 0.0 && options.self_loop < 1.0 ? 1.0 - options.self_loop : 1.0;

  // Precomputed immediate costs.
  std::vector<int> ages(s.n_clients());
  std::vector<double> cost(size * actions.size());
  for (std::size_t x = 0; x < size; ++x) {
    r.space.decode(x, ages);
    const double sat = saturation_cost(ages, clients);
    for (std::size_t k = 0; k < actions.size(); ++k) cost[x * actions.size() + k] = sat + action_energy_cost(actions[k].mask, clients);
  }

  std::vector<double> h(size, 0.0), th(size);
  std::vector<std::size_t> argmin(size, 0);
  double lo = 0.0, hi = 0.0;
  bool converged = false;
  for (long it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t x = 0; x < size; ++x) {
      r.space.decode(x, ages);
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < actions.size(); ++k) {
        double expect = 0.0;
        for_each_successor(
            ages, actions[k].mask, clients, strides, [&](int n, int a) { return std::min(a + 1, clients[n].tau); },
            [&](std::size_t y, double prob) { expect += prob * h[y]; });
        const double q = cost[x * actions.size() + k] + lambda * expect + (1.0 - lambda) * h[x];
        if (q < best) {
          best = q;
          best_k = k;
        }
      }
      th[x] = best;
      argmin[x] = best_k;
    }
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t x = 0; x < size; ++x) {
      lo = std::min(lo, th[x] - h[x]);
      hi = std::max(hi, th[x] - h[x]);
    }
    const double anchor = th[0];
    for (std::size_t x = 0; x < size; ++x) h[x] = th[x] - anchor;
    r.iterations = it;
    r.span_residual = hi - lo;
    if (r.span_residual < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError(fmt::format("relative value iteration did not converge in {} iterations (span {})",
                                       options.max_iterations, r.span_residual),
                           r.span_residual);
  }
  r.average_cost = 0.5 * (lo + hi);
  r.average_cost_per_client = r.average_cost / static_cast<double>(s.n_clients());
  // The transformed chain's relative values are the original ones over lambda.
  r.bias.resize(size);
  for (std::size_t x = 0; x < size; ++x) r.bias[x] = lambda * h[x];
  r.policy.resize(size);
  for (std::size_t x = 0; x < size; ++x) r.policy[x] = actions[argmin[x]];
  return r;
}

namespace {

double active_probability(const bandit::ThresholdPolicy& policy, int state) {
  if (state < policy.theta) return 0.0;
  if (state > policy.theta) return 1.0;
  return 1.0 - policy.rho;
}

}  // namespace

std::vector<double> chain_stationary(const ClientClass& c, const bandit::ThresholdPolicy& policy) {
  if (policy.theta < 0 || policy.theta > c.tau || !(policy.rho >= 0.0 && policy.rho <= 1.0)) {
    throw std::invalid_argument("chain_stationary: threshold policy out of range");
  }
  const int m = c.tau + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double u = active_probability(policy, i);
    const int advanced = std::min(i + 1, c.tau);
    P(i, 0) += u * c.p;
    P(i, advanced) += u * (1.0 - c.p) + (1.0 - u);
  }
  // pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd A = (P - Eigen::MatrixXd::Identity(m, m)).transpose();
  A.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < m) throw std::logic_error("chain_stationary: singular balance system");
  const Eigen::VectorXd pi = lu.solve(b);
  return {pi.data(), pi.data() + m};
}

double chain_reward_oracle(const ClientClass& c, double eta, double omega, const bandit::ThresholdPolicy& policy) {
  const auto pi = chain_stationary(c, policy);
  double reward = 0.0;
  for (int i = 0; i <= c.tau; ++i) {
    const double u = active_probability(policy, i);
    const double r = -(i == c.tau ? 1.0 : 0.0) - eta * c.energy * u + omega * (1.0 - u);
    reward += pi[i] * r;
  }
  return reward;
}

bool unichain_witness(const ClientClass& c) {
  if (c.tau > 20) throw CapacityError("unichain_witness: tau above 20 is not enumerated");
  const int m = c.tau + 1;
  for (std::uint32_t policy = 0; policy < (1U << m); ++policy) {
    // Reverse reachability from tau.
    std::vector<char> reaches(m, 0);
    reaches[c.tau] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i < m; ++i) {
        if (reaches[i]) continue;
        const bool active = (policy >> i) & 1U;
        for (const auto& o : kernel_outcomes(c, i, active)) {
          if (reaches[o.next_age]) {
            reaches[i] = 1;
            changed = true;
            break;
          }
        }
      }
    }
    if (std::find(reaches.begin(), reaches.end(), 0) != reaches.end()) return false;
  }
  return true;
}

}  // namespace whittle::exactdp
