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

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "nbsim/error.hpp"

namespace {

using nbsim::cli::RunConfig;

struct GlobalFlags {
  std::uint64_t seed = nbsim::cli::kDefaultSeed;
  std::size_t trials = nbsim::cli::kDefaultTrials;
  std::string mode = "table_consistent";
  std::string format = "csv";
  std::string out;
  bool percentiles = false;
};

void add_run_flags(CLI::App* app, GlobalFlags& f) {
  app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app->add_option("--trials", f.trials, "Monte Carlo trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--mode", f.mode, "Leader-hop accounting")
      ->check(CLI::IsMember({"table_consistent", "equation_literal"}))
      ->capture_default_str();
  app->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"csv", "plot", "plot-data", "table"}))
      ->capture_default_str();
  app->add_option("--out", f.out, "Write output to this file");
  app->add_flag("--percentiles", f.percentiles,
                "Include 0.5/99.5 percentile bands");
}

RunConfig to_config(const GlobalFlags& f) {
  RunConfig cfg;
  cfg.seed = f.seed;
  cfg.trials = f.trials;
  cfg.mode = nbsim::parse_timing_mode(f.mode);
  cfg.format = nbsim::cli::parse_format(f.format);
  cfg.percentiles = f.percentiles;
  return cfg;
}

// Runs `body` against stdout or the --out file.
int with_output(const std::string& path,
                const std::function<int(std::ostream&)>& body) {
  if (path.empty()) return body(std::cout);
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot write " << path << '\n';
    return nbsim::cli::kExitFailure;
  }
  const int rc = body(file);
  file.close();
  if (!file) {
    std::cerr << "error: write to " << path << " failed\n";
    return nbsim::cli::kExitFailure;
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nbsim: neighborhood overlay simulator and timing model"};
  app.require_subcommand(1);
  GlobalFlags flags;
  int rc = 0;

  auto* timing = app.add_subcommand("timing", "Hops-array timing model");
  timing->require_subcommand(1);

  auto* tables = timing->add_subcommand("tables", "Sweep totals 256..2048");
  add_run_flags(tables, flags);
  tables->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_timing_tables(to_config(flags), o);
    });
  });

  std::size_t total = 0;
  auto* sweep = timing->add_subcommand("sweep", "Sweep one total");
  add_run_flags(sweep, flags);
  sweep->add_option("--total", total, "Total hops (power of two >= 16)")
      ->required();
  sweep->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_timing_sweep(to_config(flags), total, o);
    });
  });

  auto* optimum = timing->add_subcommand("optimum", "Optimal dimensions");
  add_run_flags(optimum, flags);
  optimum->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_timing_optimum(to_config(flags), o);
    });
  });

  std::vector<std::size_t> totals = nbsim::cli::standard_totals();
  auto* fig9 = timing->add_subcommand("figure9", "Update time vs total hops");
  add_run_flags(fig9, flags);
  fig9->add_option("--totals", totals, "Totals to evaluate")
      ->capture_default_str();
  fig9->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_timing_figure9(to_config(flags), totals, o);
    });
  });

  nbsim::cli::MM1Args mm;
  auto* mm1 = app.add_subcommand("mm1", "M/M/1 calculator");
  mm1->add_option("--g", mm.g, "Mean interarrival time G (s)");
  mm1->add_option("--a", mm.a, "Arrival rate A (1/s)");
  mm1->add_option("--l", mm.l, "Message length L (bits)");
  mm1->add_option("--b", mm.b, "Link rate B (bits/s)");
  mm1->add_option("--s", mm.s, "Service time S (s)");
  mm1->add_flag("--broadcast", mm.broadcast, "Naive broadcast load");
  mm1->add_option("--clients", mm.clients, "Clients in the neighborhood");
  mm1->add_option("--bytes", mm.bytes, "Payload bytes per client");
  mm1->add_option("--interval", mm.interval, "Broadcast interval (s)")
      ->capture_default_str();
  mm1->add_option("--out", flags.out, "Write output to this file");
  mm1->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_mm1(mm, o, std::cerr);
    });
  });

  std::string file;
  auto* scenario = app.add_subcommand("scenario", "Scripted scenarios");
  scenario->require_subcommand(1);
  auto* srun = scenario->add_subcommand("run", "Run a scenario file");
  srun->add_option("file", file, "Scenario file")->required();
  srun->add_option("--seed", flags.seed, "Master seed")->capture_default_str();
  srun->add_option("--out", flags.out, "Write output to this file");
  srun->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_scenario_run(file, to_config(flags), o,
                                          std::cerr);
    });
  });

  std::string plan;
  std::size_t cluster_size = 5;
  std::size_t critical_mass = 0;
  auto* topology = app.add_subcommand("topology", "Neighborhood layout");
  topology->require_subcommand(1);
  auto* clusters = topology->add_subcommand("clusters", "Form clusters");
  clusters->add_option("--plan", plan, "Address-plan file")->required();
  clusters->add_option("--cluster-size", cluster_size)->capture_default_str();
  clusters->add_option("--critical-mass", critical_mass,
                       "Subdivide above this size (0: never)")
      ->capture_default_str();
  clusters->add_option("--out", flags.out, "Write output to this file");
  clusters->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_topology_clusters(plan, cluster_size,
                                               critical_mass, o, std::cerr);
    });
  });

  std::string attributes;
  auto* sync = app.add_subcommand("sync", "Attribute synchronisation");
  sync->require_subcommand(1);
  auto* round = sync->add_subcommand("round", "Run one update round");
  round->add_option("--plan", plan, "Address-plan file")->required();
  round->add_option("--attributes", attributes, "Attribute seed file");
  round->add_option("--cluster-size", cluster_size)->capture_default_str();
  round->add_option("--seed", flags.seed, "Master seed")->capture_default_str();
  round->add_option("--out", flags.out, "Write output to this file");
  round->callback([&] {
    rc = with_output(flags.out, [&](std::ostream& o) {
      return nbsim::cli::cmd_sync_round(plan, attributes, cluster_size,
                                        to_config(flags), o, std::cerr);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const nbsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nbsim::cli::kExitFailure;
  }
  return rc;
}
