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

#include "whittle/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace whittle::sim {

void select_by_rank(std::span<const int> ranks, int n_ranks, int limit, TieBreak tie, RandomStream* rng,
                    std::vector<int>& out) {
  out.clear();
  if (limit <= 0 || n_ranks <= 0) return;
  thread_local std::vector<int> counts;
  counts.assign(static_cast<std::size_t>(n_ranks), 0);
  for (int r : ranks) {
    if (r >= 0) ++counts[r];
  }
  int remaining = limit;
  int cut = n_ranks;
  int take_at_cut = 0;
  for (int r = 0; r < n_ranks; ++r) {
    if (counts[r] <= remaining) {
      remaining -= counts[r];
    } else {
      cut = r;
      take_at_cut = remaining;
      break;
    }
  }

  const int n = static_cast<int>(ranks.size());
  if (cut == n_ranks || tie == TieBreak::kLowestId || rng == nullptr) {
    for (int id = 0; id < n; ++id) {
      const int r = ranks[id];
      if (r < 0) continue;
      if (r < cut) {
        out.push_back(id);
      } else if (r == cut && take_at_cut > 0) {
        out.push_back(id);
        --take_at_cut;
      }
    }
    return;
  }

  thread_local std::vector<int> group;
  group.clear();
  for (int id = 0; id < n; ++id) {
    const int r = ranks[id];
    if (r >= 0 && r < cut) out.push_back(id);
    if (r == cut) group.push_back(id);
  }
  for (int k = 0; k < take_at_cut; ++k) {
    const auto j = k + static_cast<int>(rng->below(static_cast<std::uint64_t>(group.size() - k)));
    std::swap(group[k], group[j]);
    out.push_back(group[k]);
  }
  std::sort(out.begin(), out.end());
}

std::vector<int> whittle_select(std::span<const double> indices, int limit, TieBreak tie, RandomStream* rng) {
  std::vector<double> levels;
  for (double w : indices) {
    if (w > 0.0) levels.push_back(w);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<int> ranks(indices.size(), -1);
  for (std::size_t n = 0; n < indices.size(); ++n) {
    if (indices[n] > 0.0) {
      ranks[n] = static_cast<int>(std::lower_bound(levels.begin(), levels.end(), indices[n], std::greater<>()) -
                                  levels.begin());
    }
  }
  std::vector<int> out;
  select_by_rank(ranks, static_cast<int>(levels.size()), limit, tie, rng, out);
  return out;
}

namespace {

class WhittlePolicy final : public Policy {
 public:
  WhittlePolicy(std::vector<bandit::WhittleTable> tables, TieBreak tie, RandomStream stream)
      : tables_(std::move(tables)), tie_(tie), stream_(stream) {
    std::vector<double> levels;
    for (const auto& t : tables_) {
      for (double w : t.values) {
        if (w > 0.0) levels.push_back(w);
      }
    }
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    n_ranks_ = static_cast<int>(levels.size());
    for (const auto& t : tables_) {
      std::vector<int> r;
      for (double w : t.values) {
        r.push_back(w > 0.0 ? static_cast<int>(std::lower_bound(levels.begin(), levels.end(), w, std::greater<>()) -
                                                levels.begin())
                            : -1);
      }
      rank_of_.push_back(std::move(r));
    }
  }

  std::string name() const override { return tie_ == TieBreak::kLowestId ? "whittle" : "whittle(random-ties)"; }

  void select(const SlotView& view, std::vector<int>& active) override {
    const auto& class_of = view.scenario->class_of();
    ranks_.resize(view.ages.size());
    for (std::size_t n = 0; n < view.ages.size(); ++n) ranks_[n] = rank_of_[class_of[n]][view.ages[n]];
    select_by_rank(ranks_, n_ranks_, view.scenario->active_limit(), tie_, &stream_, active);
  }

 private:
  std::vector<bandit::WhittleTable> tables_;
  TieBreak tie_;
  RandomStream stream_;
  int n_ranks_ = 0;
  std::vector<std::vector<int>> rank_of_;
  std::vector<int> ranks_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(RandomStream stream) : stream_(stream) {}
  std::string name() const override { return "random"; }

  void select(const SlotView& view, std::vector<int>& active) override {
    const int n = static_cast<int>(view.ages.size());
    if (static_cast<int>(perm_.size()) != n) {
      perm_.resize(n);
      std::iota(perm_.begin(), perm_.end(), 0);
    }
    const int limit = std::min(n, view.scenario->active_limit());
    active.clear();
    for (int k = 0; k < limit; ++k) {
      const auto j = k + static_cast<int>(stream_.below(static_cast<std::uint64_t>(n - k)));
      std::swap(perm_[k], perm_[j]);
      active.push_back(perm_[k]);
    }
    std::sort(active.begin(), active.end());
  }

 private:
  RandomStream stream_;
  std::vector<int> perm_;
};

class GreedyAgePolicy final : public Policy {
 public:
  std::string name() const override { return "greedy"; }

  void select(const SlotView& view, std::vector<int>& active) override {
    const auto& s = *view.scenario;
    const int n = static_cast<int>(view.ages.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    const int limit = std::min(n, s.active_limit());
    // age_a / tau_a > age_b / tau_b, compared without division.
    auto before = [&](int a, int b) {
      const long lhs = static_cast<long>(view.ages[a]) * s.client_class(b).tau;
      const long rhs = static_cast<long>(view.ages[b]) * s.client_class(a).tau;
      return lhs != rhs ? lhs > rhs : a < b;
    };
    std::partial_sort(order_.begin(), order_.begin() + limit, order_.end(), before);
    active.assign(order_.begin(), order_.begin() + limit);
    std::sort(active.begin(), active.end());
  }

 private:
  std::vector<int> order_;
};

class ThresholdPolicyImpl final : public Policy {
 public:
  explicit ThresholdPolicyImpl(int theta) : theta_(theta) {}
  std::string name() const override { return fmt::format("threshold:{}", theta_); }

  void select(const SlotView& view, std::vector<int>& active) override {
    const auto& s = *view.scenario;
    active.clear();
    for (int n = 0; n < static_cast<int>(view.ages.size()) && static_cast<int>(active.size()) < s.active_limit();
         ++n) {
      if (view.ages[n] >= std::min(theta_, s.client_class(n).tau)) active.push_back(n);
    }
  }

 private:
  int theta_;
};

class PassivePolicy final : public Policy {
 public:
  std::string name() const override { return "passive"; }
  void select(const SlotView&, std::vector<int>& active) override { active.clear(); }
};

}  // namespace

std::unique_ptr<Policy> make_whittle_policy(std::vector<bandit::WhittleTable> tables, TieBreak tie,
                                            RandomStream stream) {
  return std::make_unique<WhittlePolicy>(std::move(tables), tie, stream);
}
std::unique_ptr<Policy> make_random_policy(RandomStream stream) { return std::make_unique<RandomPolicy>(stream); }
std::unique_ptr<Policy> make_greedy_age_policy() { return std::make_unique<GreedyAgePolicy>(); }
std::unique_ptr<Policy> make_threshold_policy(int theta) {
  if (theta < 0) throw std::invalid_argument("threshold policy: theta must be >= 0");
  return std::make_unique<ThresholdPolicyImpl>(theta);
}
std::unique_ptr<Policy> make_passive_policy() { return std::make_unique<PassivePolicy>(); }

PolicySpec PolicySpec::parse(const std::string& text) {
  PolicySpec spec;
  if (text == "whittle") {
    spec.kind = Kind::kWhittle;
  } else if (text == "random") {
    spec.kind = Kind::kRandom;
  } else if (text == "greedy") {
    spec.kind = Kind::kGreedy;
  } else if (text == "passive") {
    spec.kind = Kind::kPassive;
  } else if (text.rfind("threshold:", 0) == 0) {
    spec.kind = Kind::kThreshold;
    const std::string digits = text.substr(10);
    std::size_t used = 0;
    int theta = -1;
    try {
      theta = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (digits.empty() || used != digits.size() || theta < 0) {
      throw std::invalid_argument(fmt::format("bad threshold policy '{}'", text));
    }
    spec.theta = theta;
  } else {
    throw std::invalid_argument(
        fmt::format("unknown policy '{}' (expected whittle, random, greedy, passive or threshold:<theta>)", text));
  }
  return spec;
}

std::string PolicySpec::to_string() const {
  switch (kind) {
    case Kind::kWhittle:
      return tie == TieBreak::kLowestId ? "whittle" : "whittle(random-ties)";
    case Kind::kRandom:
      return "random";
    case Kind::kGreedy:
      return "greedy";
    case Kind::kThreshold:
      return fmt::format("threshold:{}", theta);
    case Kind::kPassive:
      return "passive";
  }
  return "unknown";
}

std::vector<bandit::WhittleTable> whittle_tables(const ValidScenario& s) {
  std::vector<bandit::WhittleTable> t;
  for (const auto& c : s.classes()) t.push_back(bandit::whittle_table(c, s.eta()));
  return t;
}

PolicyFactory make_policy_factory(const PolicySpec& spec) {
  return [spec](const ValidScenario& s, RandomStream stream) -> std::unique_ptr<Policy> {
    switch (spec.kind) {
      case PolicySpec::Kind::kWhittle:
        return make_whittle_policy(whittle_tables(s), spec.tie, stream);
      case PolicySpec::Kind::kRandom:
        return make_random_policy(stream);
      case PolicySpec::Kind::kGreedy:
        return make_greedy_age_policy();
      case PolicySpec::Kind::kThreshold:
        return make_threshold_policy(spec.theta);
      case PolicySpec::Kind::kPassive:
        return make_passive_policy();
    }
    throw std::logic_error("unhandled policy kind");
  };
}

SimOptions options_for(const ValidScenario& s, int threads) {
  SimOptions o;
  o.horizon = s.scenario().horizon_slots;
  o.threads = threads;
  return o;
}

namespace {

Metrics metrics_from(std::span<const std::int64_t> saturated, std::span<const std::int64_t> attempts,
                     std::span<const double> energy, double eta, double client_slots) {
  double sat = 0.0, en = 0.0;
  for (std::size_t k = 0; k < saturated.size(); ++k) {
    sat += static_cast<double>(saturated[k]);
    en += static_cast<double>(attempts[k]) * energy[k];
  }
  Metrics m;
  m.penalty = sat / client_slots;
  m.energy = en / client_slots;
  m.cost = m.penalty + eta * m.energy;
  return m;
}

}  // namespace

ReplicationResult simulate(const ValidScenario& s, Policy& policy, const SimOptions& options,
                           std::uint64_t replication) {
  if (options.horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
  const std::int64_t burn_in = options.effective_burn_in();
  if (burn_in < 0 || burn_in >= options.horizon) {
    throw std::invalid_argument("simulate: burn-in must lie in [0, horizon)");
  }
  const int n = s.n_clients();
  const int limit = s.active_limit();
  const std::size_t n_classes = s.classes().size();
  const auto& class_of = s.class_of();

  std::vector<int> tau(n);
  std::vector<double> p(n);
  std::vector<RandomStream> streams(n);
  for (int c = 0; c < n; ++c) {
    tau[c] = s.client_class(c).tau;
    p[c] = s.client_class(c).p;
    streams[c] = spawn_rng(s.scenario().master_seed, replication, static_cast<std::uint64_t>(c));
  }
  std::vector<double> class_energy;
  for (const auto& c : s.classes()) class_energy.push_back(c.energy);

  std::vector<int> ages(n, 0);
  if (options.initial == InitialState::kSaturated) ages = tau;

  std::vector<std::int64_t> sat_total(n_classes, 0), att_total(n_classes, 0);
  std::vector<std::int64_t> sat_before(n_classes, 0), att_before(n_classes, 0);
  std::vector<int> active;
  active.reserve(static_cast<std::size_t>(limit));
  std::vector<std::int64_t> stamp(n, -1);

  ReplicationResult result;
  result.replication = replication;

  for (std::int64_t t = 0; t < options.horizon; ++t) {
    SlotView view{t, ages, &s};
    policy.select(view, active);
    if (static_cast<int>(active.size()) > limit) {
      throw std::logic_error(fmt::format("policy '{}' scheduled {} clients in slot {} (limit {})", policy.name(),
                                         active.size(), t, limit));
    }
    for (int c : active) {
      if (c < 0 || c >= n || stamp[c] == t) {
        throw std::logic_error(fmt::format("policy '{}' returned invalid or repeated client {}", policy.name(), c));
      }
      stamp[c] = t;
    }

    if (t == burn_in) {
      sat_before = sat_total;
      att_before = att_total;
    }
    for (int c = 0; c < n; ++c) {
      if (ages[c] == tau[c]) ++sat_total[class_of[c]];
    }
    for (int c : active) ++att_total[class_of[c]];

    for (int c = 0; c < n; ++c) ages[c] = std::min(ages[c] + 1, tau[c]);
    for (int c : active) {
      if (streams[c].uniform_at(static_cast<std::uint64_t>(t)) < p[c]) ages[c] = 0;
    }

    if (options.stride > 0 && (t + 1) % options.stride == 0) {
      result.series.push_back(
          {t + 1, metrics_from(sat_total, att_total, class_energy, s.eta(), static_cast<double>(n) * (t + 1))});
    }
  }
  std::vector<std::int64_t> sat_measured(n_classes), att_measured(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    sat_measured[k] = sat_total[k] - sat_before[k];
    att_measured[k] = att_total[k] - att_before[k];
  }

  const double measured = static_cast<double>(options.horizon - burn_in);
  result.overall = metrics_from(sat_measured, att_measured, class_energy, s.eta(), static_cast<double>(n) * measured);
  for (std::size_t k = 0; k < n_classes; ++k) {
    result.per_class.push_back(metrics_from(std::span(sat_measured).subspan(k, 1), std::span(att_measured).subspan(k, 1),
                                            std::span(class_energy).subspan(k, 1), s.eta(),
                                            static_cast<double>(s.class_counts()[k]) * measured));
  }
  return result;
}

namespace {

PooledStat pool(const std::vector<double>& xs) {
  PooledStat st;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / n;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return st;
}

PooledMetrics pool_metrics(const std::vector<const Metrics*>& ms) {
  std::vector<double> c, p, e;
  for (const Metrics* m : ms) {
    c.push_back(m->cost);
    p.push_back(m->penalty);
    e.push_back(m->energy);
  }
  return {pool(c), pool(p), pool(e)};
}

}  // namespace

SimReport replicate(const ValidScenario& s, const PolicyFactory& factory, const SimOptions& options) {
  const auto reps = static_cast<std::size_t>(s.scenario().replications);
  SimReport report;
  report.scenario = s.scenario();
  report.horizon = options.horizon;
  report.burn_in = options.effective_burn_in();
  report.initial = options.initial;
  report.replications.resize(reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::string policy_name;
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        auto policy = factory(s, spawn_rng(s.scenario().master_seed, r, kPolicyStreamBase));
        report.replications[r] = simulate(s, *policy, options, r);
        if (r == 0) policy_name = policy->name();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = reps;
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, static_cast<int>(reps));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (int k = 0; k < threads; ++k) pool_threads.emplace_back(worker);
    for (auto& th : pool_threads) th.join();
  }
  if (error) std::rethrow_exception(error);
  report.policy = policy_name;

  std::vector<const Metrics*> overall;
  for (const auto& r : report.replications) overall.push_back(&r.overall);
  report.pooled = pool_metrics(overall);
  for (std::size_t k = 0; k < s.classes().size(); ++k) {
    std::vector<const Metrics*> ms;
    for (const auto& r : report.replications) ms.push_back(&r.per_class[k]);
    report.per_class.push_back(pool_metrics(ms));
  }

  const std::size_t points = report.replications.front().series.size();
  for (std::size_t i = 0; i < points; ++i) {
    TimePoint tp;
    tp.slot = report.replications.front().series[i].slot;
    for (const auto& r : report.replications) {
      tp.running.cost += r.series[i].running.cost;
      tp.running.penalty += r.series[i].running.penalty;
      tp.running.energy += r.series[i].running.energy;
    }
    tp.running.cost /= static_cast<double>(reps);
    tp.running.penalty /= static_cast<double>(reps);
    tp.running.energy /= static_cast<double>(reps);
    report.series.push_back(tp);
  }
  return report;
}

}  // namespace whittle::sim
