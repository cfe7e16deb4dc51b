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

#include "whittle/io.hpp"

#include <fmt/format.h>

#include <json.hpp>
#include <set>

namespace whittle {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                std::vector<std::string>& errors) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) errors.push_back(fmt::format("{}: unknown key '{}'", where, key));
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) errors.push_back(fmt::format("{}: missing key '{}'", where, key));
  }
}

template <class T>
void read_field(const json& obj, const char* key, T& out, const std::string& where,
                std::vector<std::string>& errors) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) {
      errors.push_back(fmt::format("{}: '{}' must be a number", where, key));
      return;
    }
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      errors.push_back(fmt::format("{}: '{}' must be a non-negative integer", where, key));
      return;
    }
  } else {
    if (!v.is_number_integer()) {
      errors.push_back(fmt::format("{}: '{}' must be an integer", where, key));
      return;
    }
  }
  out = v.get<T>();
}

}  // namespace

Scenario scenario_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError({fmt::format("malformed JSON: {}", e.what())});
  }
  if (!doc.is_object()) throw ScenarioError({"scenario document must be a JSON object"});

  std::vector<std::string> errors;
  check_keys(doc, {"classes", "n_clients", "alpha", "eta", "horizon_slots", "replications", "master_seed"},
             "scenario", errors);

  Scenario s;
  read_field(doc, "n_clients", s.n_clients, "scenario", errors);
  read_field(doc, "alpha", s.alpha, "scenario", errors);
  read_field(doc, "eta", s.eta, "scenario", errors);
  read_field(doc, "horizon_slots", s.horizon_slots, "scenario", errors);
  read_field(doc, "replications", s.replications, "scenario", errors);
  read_field(doc, "master_seed", s.master_seed, "scenario", errors);

  if (doc.contains("classes")) {
    const json& classes = doc.at("classes");
    if (!classes.is_array()) {
      errors.emplace_back("scenario: 'classes' must be an array");
    } else {
      for (std::size_t k = 0; k < classes.size(); ++k) {
        const std::string where = fmt::format("classes[{}]", k);
        const json& c = classes[k];
        if (!c.is_object()) {
          errors.push_back(where + ": must be an object");
          continue;
        }
        check_keys(c, {"p", "tau", "energy", "proportion"}, where, errors);
        ClientClass cc;
        read_field(c, "p", cc.p, where, errors);
        read_field(c, "tau", cc.tau, where, errors);
        read_field(c, "energy", cc.energy, where, errors);
        read_field(c, "proportion", cc.proportion, where, errors);
        s.classes.push_back(cc);
      }
    }
  }
  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  json classes = json::array();
  for (const auto& c : s.classes) {
    classes.push_back({{"p", c.p}, {"tau", c.tau}, {"energy", c.energy}, {"proportion", c.proportion}});
  }
  doc["classes"] = std::move(classes);
  doc["n_clients"] = s.n_clients;
  doc["alpha"] = s.alpha;
  doc["eta"] = s.eta;
  doc["horizon_slots"] = s.horizon_slots;
  doc["replications"] = s.replications;
  doc["master_seed"] = s.master_seed;
  return doc.dump(2);
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string canonical = scenario_to_json(s);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_hash_hex(const Scenario& s) { return fmt::format("{:016x}", scenario_hash(s)); }

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

}  // namespace whittle
