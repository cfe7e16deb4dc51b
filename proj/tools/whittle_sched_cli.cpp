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

// whittle-sched: command-line front end over the C library interface.
//
// Exit codes: 0 success, 2 validation or usage error, 3 oracle-suite
// failure, 1 anything else.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

#include "whittle_sched.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitOracle = 3;

struct CliError {
  int code;
};

int exit_code_for(ws_status st) {
  switch (st) {
    case WS_OK:
      return kExitOk;
    case WS_ERR_VALIDATION:
    case WS_ERR_INVALID_ARGUMENT:
      return kExitValidation;
    case WS_ERR_ORACLE_FAILED:
      return kExitOracle;
    default:
      return kExitOther;
  }
}

void check(ws_status st) {
  if (st != WS_OK) {
    std::cerr << "whittle-sched: " << ws_last_error() << "\n";
    throw CliError{exit_code_for(st)};
  }
}

struct StringDeleter {
  void operator()(char* s) const { ws_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

template <class T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Scenario = std::unique_ptr<ws_scenario, HandleDeleter<ws_scenario, ws_scenario_free>>;
using Bound = std::unique_ptr<ws_bound, HandleDeleter<ws_bound, ws_bound_free>>;
using DpResult = std::unique_ptr<ws_dp_result, HandleDeleter<ws_dp_result, ws_dp_free>>;
using SimReport = std::unique_ptr<ws_sim_report, HandleDeleter<ws_sim_report, ws_sim_report_free>>;

/// Writes to a sibling temporary file and renames it over the target.
void write_atomically(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "whittle-sched: cannot write " << tmp << "\n";
      throw CliError{kExitOther};
    }
    out << content;
    if (!out.flush()) {
      std::cerr << "whittle-sched: write failed for " << tmp << "\n";
      throw CliError{kExitOther};
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    std::cerr << "whittle-sched: cannot move output into place: " << ec.message() << "\n";
    throw CliError{kExitOther};
  }
}

/// Runs a document-producing call and writes its result to path.
template <class Fn>
void emit(const std::string& path, Fn&& produce) {
  char* raw = nullptr;
  const ws_status st = produce(&raw);
  CString s(raw);
  check(st);
  write_atomically(path, s.get());
}

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool degenerate_ok = false;
};

Scenario load_scenario(const GlobalOptions& g, const char* builtin) {
  ws_scenario* raw = nullptr;
  if (!g.config.empty()) {
    check(ws_scenario_from_file(g.config.c_str(), g.degenerate_ok ? 1 : 0, &raw));
  } else if (builtin != nullptr) {
    check(ws_scenario_builtin(builtin, &raw));
  } else {
    std::cerr << "whittle-sched: --config is required for this command\n";
    throw CliError{kExitValidation};
  }
  Scenario s(raw);
  if (g.seed) {
    ws_scenario* reseeded = nullptr;
    check(ws_scenario_with_seed(s.get(), *g.seed, &reseeded));
    s.reset(reseeded);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whittle-index scheduling for regular, energy-aware packet delivery"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Scenario JSON file");
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--seed", g.seed, "Override the scenario master_seed");
  app.add_option("--threads", g.threads, "Worker threads for replications")->check(CLI::PositiveNumber);
  app.add_flag("--degenerate-ok", g.degenerate_ok, "Accept delivery probability p = 1");

  auto* index = app.add_subcommand("index", "Whittle index table as CSV");
  auto* bound = app.add_subcommand("bound", "Relaxed-constraint cost lower bound as JSON");

  auto* dp = app.add_subcommand("dp", "Exact average-cost optimum for small instances");
  std::string dump_policy;
  dp->add_option("--dump-policy", dump_policy, "Write the optimal stationary policy as CSV");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of one policy");
  std::string policy = "whittle";
  std::string timeseries;
  std::int64_t stride = 1000;
  std::int64_t horizon = 0;
  bool random_ties = false;
  bool start_saturated = false;
  simulate->add_option("--policy", policy, "whittle | random | greedy | passive | threshold:<theta>");
  simulate->add_option("--csv", timeseries, "Write running averages as CSV");
  simulate->add_option("--stride", stride, "Slots between CSV samples")->check(CLI::PositiveNumber);
  simulate->add_option("--horizon", horizon, "Override horizon_slots");
  simulate->add_flag("--random-ties", random_ties, "Break Whittle ties with a seeded random draw");
  simulate->add_flag("--start-saturated", start_saturated, "Start every client at age tau");

  auto* fig1 = app.add_subcommand("fig1", "Cost per client vs population size against the relaxed bound");
  std::vector<std::int64_t> n_list;
  fig1->add_option("--n-list", n_list, "Population sizes (default 10,20,50,100,200)")->delimiter(',');

  auto* fig2 = app.add_subcommand("fig2", "Penalty vs energy trade-off over an eta sweep");
  std::vector<double> eta_list;
  fig2->add_option("--eta-list", eta_list, "Energy weights (default: 10 geometric points in [0.01, 2])")
      ->delimiter(',');

  auto* oracle = app.add_subcommand("oracle-suite", "Exact-oracle consistency checks on a small instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (index->parsed()) {
      auto s = load_scenario(g, nullptr);
      emit(g.out, [&](char** o) { return ws_index_csv(s.get(), o); });
    } else if (bound->parsed()) {
      auto s = load_scenario(g, nullptr);
      ws_bound* raw = nullptr;
      check(ws_bound_compute(s.get(), &raw));
      Bound b(raw);
      emit(g.out, [&](char** o) { return ws_bound_to_json(b.get(), o); });
    } else if (dp->parsed()) {
      auto s = load_scenario(g, nullptr);
      ws_dp_result* raw = nullptr;
      check(ws_dp_compute(s.get(), &raw));
      DpResult r(raw);
      emit(g.out, [&](char** o) { return ws_dp_to_json(r.get(), o); });
      if (!dump_policy.empty()) {
        emit(dump_policy, [&](char** o) { return ws_dp_policy_csv(r.get(), o); });
      }
    } else if (simulate->parsed()) {
      auto s = load_scenario(g, nullptr);
      ws_sim_options o;
      ws_sim_options_init(&o);
      o.policy = policy.c_str();
      o.horizon = horizon;
      o.stride = timeseries.empty() ? 0 : stride;
      o.threads = g.threads;
      o.random_ties = random_ties ? 1 : 0;
      o.start_saturated = start_saturated ? 1 : 0;
      ws_sim_report* raw = nullptr;
      check(ws_simulate(s.get(), &o, &raw));
      SimReport r(raw);
      emit(g.out, [&](char** o) { return ws_sim_report_to_json(r.get(), o); });
      if (!timeseries.empty()) {
        emit(timeseries, [&](char** o) { return ws_sim_timeseries_csv(r.get(), o); });
      }
    } else if (fig1->parsed()) {
      auto s = load_scenario(g, "reference");
      emit(g.out, [&](char** o) {
        return ws_run_population_sweep(s.get(), n_list.empty() ? nullptr : n_list.data(), n_list.size(), g.threads, o);
      });
    } else if (fig2->parsed()) {
      auto s = load_scenario(g, "reference");
      emit(g.out, [&](char** o) {
        return ws_run_eta_sweep(s.get(), eta_list.empty() ? nullptr : eta_list.data(), eta_list.size(), g.threads, o);
      });
    } else if (oracle->parsed()) {
      auto s = load_scenario(g, "small");
      char* out = nullptr;
      const ws_status st = ws_run_oracle_suite(s.get(), g.threads, &out);
      CString verdict(out);
      if (verdict) write_atomically(g.out, verdict.get());
      check(st);
    }
  } catch (const CliError& e) {
    return e.code;
  }
  return kExitOk;
}
