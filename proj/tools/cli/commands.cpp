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

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nbsim/attributes.hpp"
#include "nbsim/error.hpp"
#include "nbsim/queueing.hpp"
#include "nbsim/scenario.hpp"
#include "nbsim/topology.hpp"
#include "nbsim/update_round.hpp"

namespace nbsim::cli {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string with_commas(std::uint64_t v) {
  auto s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) {
    s.insert(static_cast<std::size_t>(i), ",");
  }
  return s;
}

void csv_header(std::ostream& out, bool percentiles) {
  out << "rows,columns";
  for (const char* c : {"t_c", "t_cl", "t_c_prime", "T_u"}) {
    out << ',' << c;
    if (percentiles) out << ',' << c << "_p005," << c << "_p995";
  }
  out << '\n';
}

void csv_row(std::ostream& out, const SweepRow& r, bool percentiles) {
  out << r.dims.rows << ',' << r.dims.columns;
  for (const auto* s : {&r.t_c, &r.t_cl, &r.t_c_prime, &r.T_u}) {
    out << ',' << fixed(s->mean);
    if (percentiles) out << ',' << fixed(s->p005, 1) << ',' << fixed(s->p995, 1);
  }
  out << '\n';
}

void emit_table(std::ostream& out, const RunConfig& cfg, std::size_t total,
                const std::vector<SweepRow>& rows) {
  switch (cfg.format) {
    case OutputFormat::kCsv:
      csv_header(out, cfg.percentiles);
      for (const auto& r : rows) csv_row(out, r, cfg.percentiles);
      break;
    case OutputFormat::kPlot:
      out << "# rows/columns T_u (total_hops=" << total << ")\n";
      for (const auto& r : rows) {
        out << fixed(r.dims.ratio(), 6) << ' ' << fixed(r.T_u.mean) << '\n';
      }
      break;
    case OutputFormat::kTable: {
      out << "Hops array " << total << " (mean of " << cfg.trials
          << " trials)\n";
      out << std::setw(6) << "Rows" << std::setw(9) << "Columns"
          << std::setw(11) << "t_c" << std::setw(11) << "t_cl"
          << std::setw(11) << "t_c'" << std::setw(11) << "T_u" << '\n';
      for (const auto& r : rows) {
        out << std::setw(6) << r.dims.rows << std::setw(9) << r.dims.columns
            << std::setw(11) << fixed(r.t_c.mean, 1) << std::setw(11)
            << fixed(r.t_cl.mean, 1) << std::setw(11)
            << fixed(r.t_c_prime.mean, 1) << std::setw(11)
            << fixed(r.T_u.mean, 1) << '\n';
        if (cfg.percentiles) {
          out << std::setw(15) << "[0.5,99.5]";
          for (const auto* s : {&r.t_c, &r.t_cl, &r.t_c_prime, &r.T_u}) {
            out << std::setw(11)
                << (fixed(s->p005, 0) + "-" + fixed(s->p995, 0));
          }
          out << '\n';
        }
      }
      break;
    }
  }
}

void run_header(std::ostream& out, const RunConfig& cfg) {
  out << "# seed=" << cfg.seed << " trials=" << cfg.trials
      << " mode=" << to_string(cfg.mode) << '\n';
}

}  // namespace

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "plot" || text == "plot-data") return OutputFormat::kPlot;
  if (text == "table") return OutputFormat::kTable;
  throw InvalidArgument("unknown format '" + text + "'");
}

const std::vector<std::size_t>& standard_totals() {
  static const std::vector<std::size_t> totals{256, 512, 1024, 2048};
  return totals;
}

int cmd_timing_tables(const RunConfig& cfg, std::ostream& out) {
  run_header(out, cfg);
  bool first = true;
  for (auto total : standard_totals()) {
    if (!first) out << '\n';
    first = false;
    out << "# total_hops=" << total << '\n';
    emit_table(out, cfg, total,
               sweep(total, power_of_two_pairs(total), cfg.trials, cfg.seed,
                     cfg.mode));
  }
  return out ? kExitOk : kExitFailure;
}

int cmd_timing_sweep(const RunConfig& cfg, std::size_t total,
                     std::ostream& out) {
  run_header(out, cfg);
  out << "# total_hops=" << total << '\n';
  emit_table(out, cfg, total,
             sweep(total, power_of_two_pairs(total), cfg.trials, cfg.seed,
                   cfg.mode));
  return out ? kExitOk : kExitFailure;
}

int cmd_timing_optimum(const RunConfig& cfg, std::ostream& out) {
  run_header(out, cfg);
  std::vector<OptimumResult> results;
  for (auto total : standard_totals()) {
    results.push_back(find_optimum(total, cfg.trials, cfg.seed, cfg.mode));
  }
  auto units = [](const OptimumResult& r) {
    return static_cast<std::uint64_t>(std::llround(r.row.T_u.mean));
  };
  switch (cfg.format) {
    case OutputFormat::kCsv:
    case OutputFormat::kPlot:
      out << "total_hops,rows,columns,ratio,T_u_units,T_u_ms\n";
      for (const auto& r : results) {
        out << r.dims.total_hops() << ',' << r.dims.rows << ','
            << r.dims.columns << ',' << fixed(r.ratio, 4) << ',' << units(r)
            << ',' << units_to_ms(VirtualTime{units(r)}) << '\n';
      }
      break;
    case OutputFormat::kTable:
      out << std::setw(11) << "Hops array" << std::setw(20)
          << "Optimal dims" << std::setw(9) << "Units" << std::setw(14)
          << "Time (ms)" << '\n';
      for (const auto& r : results) {
        out << std::setw(11) << r.dims.total_hops() << std::setw(20)
            << (std::to_string(r.dims.rows) + " rows x " +
                std::to_string(r.dims.columns))
            << std::setw(9) << units(r) << std::setw(14)
            << with_commas(units_to_ms(VirtualTime{units(r)})) << '\n';
      }
      break;
  }
  return out ? kExitOk : kExitFailure;
}

int cmd_timing_figure9(const RunConfig& cfg,
                       const std::vector<std::size_t>& totals,
                       std::ostream& out) {
  run_header(out, cfg);
  const auto curve = figure9_curve(totals, cfg.trials, cfg.seed, cfg.mode);
  switch (cfg.format) {
    case OutputFormat::kCsv:
      out << "total_hops,rows,columns,T_u_units,T_u_ms\n";
      for (const auto& p : curve) {
        out << p.total_hops << ',' << p.dims.rows << ',' << p.dims.columns
            << ',' << p.T_u_units << ',' << p.T_u_ms << '\n';
      }
      break;
    case OutputFormat::kPlot:
      out << "# total_hops T_u_ms\n";
      for (const auto& p : curve) {
        out << p.total_hops << ' ' << p.T_u_ms << '\n';
      }
      break;
    case OutputFormat::kTable:
      out << std::setw(11) << "Hops" << std::setw(10) << "Dims"
          << std::setw(14) << "T_u (ms)" << '\n';
      for (const auto& p : curve) {
        out << std::setw(11) << p.total_hops << std::setw(10)
            << p.dims.to_string() << std::setw(14) << with_commas(p.T_u_ms)
            << '\n';
      }
      break;
  }
  return out ? kExitOk : kExitFailure;
}

int cmd_mm1(const MM1Args& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.broadcast) {
      if (!args.clients || !args.bytes) {
        err << "error: --broadcast needs --clients and --bytes\n";
        return kExitFailure;
      }
      const double load =
          naive_broadcast_load(*args.clients, *args.bytes, args.interval);
      out << "clients=" << *args.clients << " bytes=" << fixed(*args.bytes, 0)
          << " interval=" << fixed(args.interval, 3) << " s\n";
      out << "load=" << fixed(load, 0) << " bits/s per client\n";
      return kExitOk;
    }
    if (args.g.has_value() == args.a.has_value()) {
      err << "error: give exactly one of --g or --a\n";
      return kExitFailure;
    }
    const bool link = args.l || args.b;
    if (link == args.s.has_value() || (link && !(args.l && args.b))) {
      err << "error: give either --l and --b, or --s\n";
      return kExitFailure;
    }
    if (args.g && *args.g <= 0) {
      err << "error: --g must be positive\n";
      return kExitFailure;
    }
    const double A = args.a ? *args.a : 1.0 / *args.g;
    const double S = args.s ? *args.s : *args.l / *args.b;
    const auto m = mm1_metrics(MMOneInputs::from_rates(A, S));
    out << "A=" << fixed(m.A, 4) << " /s\n"
        << "S=" << fixed(m.S, 4) << " s\n"
        << "D=" << fixed(m.D, 4) << " /s\n"
        << "U=" << fixed(m.U, 4) << '\n'
        << "T_w=" << fixed(m.T_w, 4) << " s\n"
        << "T=" << fixed(m.T, 4) << " s\n"
        << "N=" << fixed(m.N, 4) << '\n'
        << "Q=" << fixed(m.Q, 4) << '\n';
    for (unsigned k = 0; k < 4; ++k) {
      out << "P_" << k << '=' << fixed(m.P(k), 4) << '\n';
    }
    return kExitOk;
  } catch (const UnstableSystem& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_scenario_run(const std::string& path, const RunConfig& cfg,
                     std::ostream& out, std::ostream& err) {
  try {
    const auto scenario = load_scenario(path);
    const auto report = run_scenario(scenario, cfg.seed);
    out << "# seed=" << cfg.seed << '\n' << format_report(scenario, report);
    return report.passed() ? kExitOk : kExitFailure;
  } catch (const Error& e) {
    err << path << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

namespace {

std::vector<NodeRecord> load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open address plan " + path);
  return parse_address_plan(in);
}

}  // namespace

int cmd_topology_clusters(const std::string& plan_path,
                          std::size_t cluster_size, std::size_t critical_mass,
                          std::ostream& out, std::ostream& err) {
  try {
    const NeighborhoodMap map(load_plan(plan_path));
    const auto hoods = critical_mass == 0
                           ? std::vector<NeighborhoodMap>{map}
                           : subdivide_all(map, critical_mass);
    for (std::size_t h = 0; h < hoods.size(); ++h) {
      const auto plan = form_clusters(hoods[h], cluster_size);
      out << "neighborhood " << h << ": " << hoods[h].size() << " members, "
          << plan.clusters.size() << " clusters, head leader "
          << plan.head_leader.to_string() << '\n';
      for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
        out << "  cluster " << c << ':';
        for (auto a : plan.clusters[c]) out << ' ' << a.to_string();
        out << '\n';
      }
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_sync_round(const std::string& plan_path,
                   const std::string& attributes_path,
                   std::size_t cluster_size, const RunConfig& cfg,
                   std::ostream& out, std::ostream& err) {
  try {
    const NeighborhoodMap map(load_plan(plan_path));
    std::map<NodeAddress, AttributeList> seeds;
    if (!attributes_path.empty()) {
      std::ifstream in(attributes_path);
      if (!in) throw ConfigError("cannot open attributes " + attributes_path);
      seeds = parse_attribute_seeds(in);
    }
    const auto plan = form_clusters(map, cluster_size);
    std::map<NodeAddress, AttributeList> lists;
    for (auto m : plan.members()) lists[m] = seeds[m];
    auto round = start_round(plan, lists);
    Engine engine(cfg.seed);
    const auto done = run_round(round, engine);
    out << "members=" << plan.member_count()
        << " clusters=" << plan.clusters.size() << '\n';
    for (auto p : {RoundPhase::kIntraForward, RoundPhase::kIntraReverse,
                   RoundPhase::kLeaderRing, RoundPhase::kRedistribute}) {
      out << to_string(p) << '=' << round.messages_in(p) << '\n';
    }
    out << "messages=" << round.messages_sent() << '\n'
        << "finished_at=" << done.units << " units ("
        << units_to_ms(done) << " ms)\n"
        << "final list:\n";
    for (const auto& [k, e] : round.neighborhood_list()) {
      out << "  " << e.owner.to_string() << ' ' << e.key << ' '
          << e.scope.to_string() << ' ' << to_string(e.update_class) << " v"
          << e.version << ' ' << e.value << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace nbsim::cli
