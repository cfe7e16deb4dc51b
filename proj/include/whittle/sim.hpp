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

// Monte Carlo simulation of the N-client system under the per-slot
// activation limit L.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whittle/bandit.hpp"
#include "whittle/core.hpp"
#include "whittle/rng.hpp"

namespace whittle::sim {

struct SlotView {
  std::int64_t slot = 0;
  std::span<const int> ages;
  const ValidScenario* scenario = nullptr;
};

/// A scheduling rule. select() fills `active` with distinct client ids, at
/// most L of them. Implementations own any randomness they need.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void select(const SlotView& view, std::vector<int>& active) = 0;
};

/// Builds a fresh policy for one replication. `stream` is the policy's own
/// random stream for that replication.
using PolicyFactory = std::function<std::unique_ptr<Policy>(const ValidScenario&, RandomStream stream)>;

enum class TieBreak { kLowestId, kSeededRandom };

/// Picks up to `limit` clients by rank (0 is best, negative is ineligible).
/// Within the last admitted rank, ties go to the lowest ids or to a uniform
/// random subset drawn from `rng`. Output is sorted by id.
void select_by_rank(std::span<const int> ranks, int n_ranks, int limit, TieBreak tie, RandomStream* rng,
                    std::vector<int>& out);

/// Whittle selection on raw index values: strictly positive indices only,
/// highest first, at most `limit`.
std::vector<int> whittle_select(std::span<const double> indices, int limit, TieBreak tie = TieBreak::kLowestId,
                                RandomStream* rng = nullptr);

struct PolicySpec {
  enum class Kind { kWhittle, kRandom, kGreedy, kThreshold, kPassive };
  Kind kind = Kind::kWhittle;
  int theta = 0;  ///< for kThreshold
  TieBreak tie = TieBreak::kLowestId;

  /// Parses "whittle", "random", "greedy", "passive" or "threshold:<theta>".
  static PolicySpec parse(const std::string& text);
  std::string to_string() const;
};

std::unique_ptr<Policy> make_whittle_policy(std::vector<bandit::WhittleTable> tables, TieBreak tie,
                                            RandomStream stream);
std::unique_ptr<Policy> make_random_policy(RandomStream stream);
std::unique_ptr<Policy> make_greedy_age_policy();
std::unique_ptr<Policy> make_threshold_policy(int theta);
std::unique_ptr<Policy> make_passive_policy();

PolicyFactory make_policy_factory(const PolicySpec& spec);

enum class InitialState { kFresh, kSaturated };

struct SimOptions {
  std::int64_t horizon = 200'000;
  /// Slots excluded from the averages; defaults to horizon / 10.
  std::optional<std::int64_t> burn_in;
  InitialState initial = InitialState::kFresh;
  /// Record running averages every `stride` slots; 0 disables.
  std::int64_t stride = 0;
  int threads = 1;

  std::int64_t effective_burn_in() const { return burn_in.value_or(horizon / 10); }
};

/// Per-client, per-slot averages.
struct Metrics {
  double cost = 0.0;
  double penalty = 0.0;  ///< fraction of client-slots spent at age tau
  double energy = 0.0;   ///< unweighted energy units per client-slot
};

struct TimePoint {
  std::int64_t slot = 0;  ///< slots completed
  Metrics running;        ///< averaged from slot 0, burn-in included
};

struct ReplicationResult {
  std::uint64_t replication = 0;
  Metrics overall;
  std::vector<Metrics> per_class;
  std::vector<TimePoint> series;
};

struct PooledStat {
  double mean = 0.0;
  std::optional<double> se;  ///< absent for a single replication
};

struct PooledMetrics {
  PooledStat cost, penalty, energy;
};

struct SimReport {
  Scenario scenario;
  std::string policy;
  std::int64_t horizon = 0;
  std::int64_t burn_in = 0;
  InitialState initial = InitialState::kFresh;
  std::vector<ReplicationResult> replications;
  PooledMetrics pooled;
  std::vector<PooledMetrics> per_class;
  std::vector<TimePoint> series;  ///< replication means
};

/// One replication. Throws std::logic_error if the policy breaks the
/// activation limit or returns an invalid id.
ReplicationResult simulate(const ValidScenario& s, Policy& policy, const SimOptions& options,
                           std::uint64_t replication);

/// All scenario replications, run on up to options.threads workers. The
/// report does not depend on the thread count.
SimReport replicate(const ValidScenario& s, const PolicyFactory& factory, const SimOptions& options);

/// Sim options implied by a scenario (its horizon, default burn-in).
SimOptions options_for(const ValidScenario& s, int threads = 1);

std::vector<bandit::WhittleTable> whittle_tables(const ValidScenario& s);

}  // namespace whittle::sim
