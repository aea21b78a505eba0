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

#ifndef NBSIM_TOOLS_COMMANDS_HPP_
#define NBSIM_TOOLS_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nbsim/timing.hpp"

namespace nbsim::cli {

// Seed used when --seed is not given.
inline constexpr std::uint64_t kDefaultSeed = 5489;
inline constexpr std::size_t kDefaultTrials = 1000;

enum class OutputFormat { kCsv, kPlot, kTable };

// Accepts "csv", "plot" (or "plot-data") and "table". Throws
// InvalidArgument.
OutputFormat parse_format(const std::string& text);

struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = kDefaultTrials;
  TimingMode mode = TimingMode::kTableConsistent;
  OutputFormat format = OutputFormat::kCsv;
  bool percentiles = false;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnstable = 2;

// Totals reproduced by `timing tables` and `timing optimum`.
const std::vector<std::size_t>& standard_totals();

int cmd_timing_tables(const RunConfig& cfg, std::ostream& out);
int cmd_timing_sweep(const RunConfig& cfg, std::size_t total,
                     std::ostream& out);
int cmd_timing_optimum(const RunConfig& cfg, std::ostream& out);
int cmd_timing_figure9(const RunConfig& cfg,
                       const std::vector<std::size_t>& totals,
                       std::ostream& out);

struct MM1Args {
  std::optional<double> g;  // mean interarrival time, s
  std::optional<double> a;  // arrival rate, 1/s
  std::optional<double> l;  // message length, bits
  std::optional<double> b;  // link rate, bits/s
  std::optional<double> s;  // service time, s
  bool broadcast = false;
  std::optional<std::uint64_t> clients;
  std::optional<double> bytes;
  double interval = 1.0;
};

int cmd_mm1(const MM1Args& args, std::ostream& out, std::ostream& err);

int cmd_scenario_run(const std::string& path, const RunConfig& cfg,
                     std::ostream& out, std::ostream& err);

int cmd_topology_clusters(const std::string& plan_path,
                          std::size_t cluster_size, std::size_t critical_mass,
                          std::ostream& out, std::ostream& err);

int cmd_sync_round(const std::string& plan_path,
                   const std::string& attributes_path,
                   std::size_t cluster_size, const RunConfig& cfg,
                   std::ostream& out, std::ostream& err);

}  // namespace nbsim::cli

#endif  // NBSIM_TOOLS_COMMANDS_HPP_
