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

#include "whittle/core.hpp"

#include <cmath>
#include <fmt/format.h>

#include "whittle/rng.hpp"

namespace whittle {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid scenario:";
  for (const auto& e : errors) {
    out += "\n  - ";
    out += e;
  }
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

Validation validate_scenario(const Scenario& s, const ValidationOptions& options) {
  Validation result;
  auto& errors = result.errors;

  if (s.classes.empty()) errors.emplace_back("scenario has no client classes");
  if (s.n_clients < 1) errors.push_back(fmt::format("n_clients must be >= 1 (got {})", s.n_clients));
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) errors.push_back(fmt::format("alpha must lie in (0, 1] (got {})", s.alpha));
  if (!(s.eta >= 0.0) || !std::isfinite(s.eta)) errors.push_back(fmt::format("eta must be finite and >= 0 (got {})", s.eta));
  if (s.horizon_slots < 1) errors.push_back(fmt::format("horizon_slots must be >= 1 (got {})", s.horizon_slots));
  if (s.replications < 1) errors.push_back(fmt::format("replications must be >= 1 (got {})", s.replications));

  double proportion_sum = 0.0;
  for (std::size_t k = 0; k < s.classes.size(); ++k) {
    const auto& c = s.classes[k];
    const bool p_ok = options.degenerate_ok ? (c.p > 0.0 && c.p <= 1.0) : (c.p > 0.0 && c.p < 1.0);
    if (!p_ok) {
      errors.push_back(fmt::format("class {}: p must lie in (0, 1){} (got {})", k,
                                   options.degenerate_ok ? " or equal 1" : "", c.p));
    }
    if (c.tau < 1) errors.push_back(fmt::format("class {}: tau must be >= 1 (got {})", k, c.tau));
    if (!(c.energy >= 0.0) || !std::isfinite(c.energy)) {
      errors.push_back(fmt::format("class {}: energy must be finite and >= 0 (got {})", k, c.energy));
    }
    if (!(c.proportion > 0.0 && c.proportion <= 1.0)) {
      errors.push_back(fmt::format("class {}: proportion must lie in (0, 1] (got {})", k, c.proportion));
    }
    proportion_sum += c.proportion;
  }
  if (!s.classes.empty() && std::abs(proportion_sum - 1.0) > 1e-12) {
    errors.push_back(fmt::format("class proportions sum to {:.17g}, expected 1", proportion_sum));
  }

  std::vector<int> counts;
  if (s.n_clients >= 1) {
    for (std::size_t k = 0; k < s.classes.size(); ++k) {
      const double members = s.classes[k].proportion * static_cast<double>(s.n_clients);
      const double rounded = std::round(members);
      if (std::abs(members - rounded) > 1e-9 * std::max(1.0, members)) {
        errors.push_back(fmt::format("class {}: proportion * n_clients = {} is not an integer", k, members));
      } else {
        counts.push_back(static_cast<int>(rounded));
      }
    }
  }

  std::int64_t limit = 0;
  if (s.n_clients >= 1 && s.alpha > 0.0 && s.alpha <= 1.0) {
    // Guard against alpha * N landing just below an integer through rounding.
    limit = static_cast<std::int64_t>(std::floor(s.alpha * static_cast<double>(s.n_clients) + 1e-9));
    if (limit < 1) errors.push_back(fmt::format("floor(alpha * n_clients) = {} must be >= 1", limit));
  }

  if (errors.empty()) {
    int total = 0;
    for (int c : counts) total += c;
    if (total != s.n_clients) {
      errors.push_back(fmt::format("class sizes sum to {} but n_clients is {}", total, s.n_clients));
    }
  }
  if (!errors.empty()) return result;

  ValidScenario v;
  v.scenario_ = s;
  v.options_ = options;
  v.active_limit_ = static_cast<int>(limit);
  v.class_counts_ = counts;
  int offset = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    v.class_offsets_.push_back(offset);
    for (int i = 0; i < counts[k]; ++i) v.class_of_.push_back(static_cast<int>(k));
    offset += counts[k];
  }
  result.scenario = std::move(v);
  return result;
}

ValidScenario require_valid(const Scenario& s, const ValidationOptions& options) {
  auto v = validate_scenario(s, options);
  if (!v.ok()) throw ScenarioError(std::move(v.errors));
  return std::move(*v.scenario);
}

ValidScenario ValidScenario::with_seed(std::uint64_t seed) const {
  Scenario s = scenario_;
  s.master_seed = seed;
  return require_valid(s, options_);
}

ValidScenario ValidScenario::with_clients(std::int64_t n_clients) const {
  Scenario s = scenario_;
  s.n_clients = n_clients;
  return require_valid(s, options_);
}

ValidScenario ValidScenario::with_eta(double eta) const {
  Scenario s = scenario_;
  s.eta = eta;
  return require_valid(s, options_);
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % bound;
}

RandomStream spawn_rng(std::uint64_t master_seed, std::uint64_t replication_index,
                       std::uint64_t client_index) noexcept {
  // Two independent 64-bit keys; the (replication, client) pair enters both
  // so streams differ even when one key collides.
  const std::uint64_t seed_key = mix64(master_seed ^ 0x6a09e667f3bcc908ULL);
  const std::uint64_t pair_key = mix64(replication_index * 0xd1b54a32d192ed03ULL + 0x3c6ef372fe94f82bULL) ^
                                 mix64(client_index * 0x8cb92ba72f3d8dd7ULL + 0xa54ff53a5f1d36f1ULL);
  const std::uint64_t hi = mix64(seed_key ^ pair_key);
  const std::uint64_t lo = mix64(seed_key + mix64(pair_key ^ 0x510e527fade682d1ULL));
  return RandomStream(hi, lo);
}

}  // namespace whittle
