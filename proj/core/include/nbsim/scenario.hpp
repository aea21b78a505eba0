// Copyright 2026 The nbsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBSIM_SCENARIO_HPP_
#define NBSIM_SCENARIO_HPP_

// Scripted life-cycle scenarios.
//
// Grammar, one statement per line (`#` starts a comment):
//
//   node <name> <dotted-quad>          alias usable wherever an address is
//   config <key>=<value> ...           critical_mass cluster_size min_clients
//                                      min_uptime min_capacity beacon_interval
//                                      beacon_timeout intro_timeout
//                                      excerpt_cap horizon
//   at=<units> event=<name> addr=<a> [key=value ...]
//   expect <what> [key=value ...]      must be observed / must hold
//   expect-not <what> [key=value ...]  must never be observed
//
// Events: download [domain uptime capacity metric], up, down,
// send to=<a> [payload], subdivide, commit key value [timeout],
// set key value [scope class], round, refresh [span=<a>-<a>].
//
// Observations are matched by name; `from`/`addr` match the subject, `to`
// the object, `count=<n>` the number of matches, `before=`/`after=` the
// time (exclusive) and anything else an observation field.
// `current-router addr`, `same-neighborhood a b` and `member addr` are
// checked against the final state instead.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nbsim/address.hpp"
#include "nbsim/discovery.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/topology.hpp"

namespace nbsim {

enum class ScriptAction : std::uint8_t {
  kDownload,
  kUp,
  kDown,
  kSend,
  kSubdivide,
  kCommit,
  kSet,
  kRound,
  kRefresh,
};

std::string_view to_string(ScriptAction a);

struct ScenarioConfig {
  // 0 disables automatic subdivision.
  std::size_t critical_mass = 0;
  std::size_t cluster_size = 5;
  RouterCriteria router_criteria;
  VirtualTime beacon_interval{5};
  VirtualTime beacon_timeout{15};
  VirtualTime intro_timeout{500};
  std::size_t excerpt_cap = kDefaultExcerptCap;
  std::optional<VirtualTime> horizon;
};

struct ScriptLine {
  std::size_t line = 0;
  VirtualTime at;
  ScriptAction action = ScriptAction::kDownload;
  NodeAddress addr;
  std::map<std::string, std::string> args;
};

struct Expectation {
  std::size_t line = 0;
  std::string text;
  bool negated = false;
  std::string what;
  std::map<std::string, std::string> args;
};

struct Scenario {
  std::string name;
  std::map<std::string, NodeAddress> aliases;
  ScenarioConfig config;
  std::vector<ScriptLine> events;
  std::vector<Expectation> expectations;

  // Alias if one was declared, dotted quad otherwise.
  std::string display_name(NodeAddress a) const;
};

// Throws ParseError carrying the offending line number.
Scenario parse_scenario(std::istream& in, std::string name = {});
Scenario load_scenario(const std::filesystem::path& path);

struct Observation {
  VirtualTime at;
  std::string what;
  NodeAddress subject;
  std::optional<NodeAddress> object;
  std::map<std::string, std::string> fields;
};

struct ExpectationResult {
  Expectation expectation;
  bool passed = false;
  std::size_t matches = 0;
};

struct ScenarioReport {
  EventTrace trace;
  std::vector<Observation> observations;
  std::vector<ExpectationResult> results;
  // Final neighborhoods (sorted members) and their routers.
  std::vector<std::vector<NodeAddress>> neighborhoods;
  std::vector<std::optional<NodeAddress>> routers;

  bool passed() const;
};

ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed);

// Trace, observations and one PASS/FAIL line per expectation.
std::string format_report(const Scenario& scenario,
                          const ScenarioReport& report);

}  // namespace nbsim

#endif  // NBSIM_SCENARIO_HPP_
