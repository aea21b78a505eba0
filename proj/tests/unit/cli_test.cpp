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

#include <gtest/gtest.h>

#include <sstream>

namespace nbsim::cli {
namespace {

RunConfig quick() {
  RunConfig c;
  c.trials = 100;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(Cli, TimingTablesHaveOneRowPerLayout) {
  std::ostringstream out;
  ASSERT_EQ(cmd_timing_tables(quick(), out), kExitOk);
  std::size_t headers = 0, data = 0;
  for (const auto& l : lines(out.str())) {
    if (l == "rows,columns,t_c,t_cl,t_c_prime,T_u") ++headers;
    else if (!l.empty() && l[0] != '#') ++data;
  }
  EXPECT_EQ(headers, 4u);
  EXPECT_EQ(data, 5u + 6 + 7 + 8);
}

TEST(Cli, CsvMeansAddUp) {
  std::ostringstream out;
  RunConfig c;  // 1000 trials: means are exact to three decimals
  cmd_timing_sweep(c, 256, out);
  for (const auto& l : lines(out.str())) {
    if (l.empty() || l[0] == '#' || l[0] == 'r') continue;
    std::istringstream f(l);
    double v[6];
    char comma;
    f >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >>
        v[4] >> comma >> v[5];
    EXPECT_NEAR(v[5], v[2] + v[3] + v[4], 1e-6) << l;
  }
}

TEST(Cli, PercentileVariantHeader) {
  auto c = quick();
  c.percentiles = true;
  std::ostringstream out;
  cmd_timing_sweep(c, 256, out);
  EXPECT_NE(out.str().find("rows,columns,t_c,t_c_p005,t_c_p995,t_cl"),
            std::string::npos);
}

TEST(Cli, OptimumMillisecondsAreFiftyTimesUnits) {
  std::ostringstream out;
  ASSERT_EQ(cmd_timing_optimum(quick(), out), kExitOk);
  std::size_t rows = 0;
  for (const auto& l : lines(out.str())) {
    if (l.empty() || l[0] == '#' || l[0] == 't') continue;
    unsigned long long total, r, c, units, ms;
    double ratio;
    ASSERT_EQ(std::sscanf(l.c_str(), "%llu,%llu,%llu,%lf,%llu,%llu", &total, &r,
                          &c, &ratio, &units, &ms),
              6);
    EXPECT_EQ(ms, units * 50);
    EXPECT_EQ(total, r * c);
    ++rows;
  }
  EXPECT_EQ(rows, 4u);
}

TEST(Cli, Figure9PlotData) {
  auto c = quick();
  c.format = OutputFormat::kPlot;
  std::ostringstream out;
  cmd_timing_figure9(c, standard_totals(), out);
  std::size_t points = 0;
  for (const auto& l : lines(out.str())) {
    if (l.empty() || l[0] == '#') continue;
    unsigned long long x, y;
    ASSERT_EQ(std::sscanf(l.c_str(), "%llu %llu", &x, &y), 2) << l;
    ++points;
  }
  EXPECT_EQ(points, 4u);
}

TEST(Cli, Mm1) {
  MM1Args a;
  a.g = 2;
  a.l = 8000;
  a.b = 16000;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_mm1(a, out, err), kExitOk);
  EXPECT_NE(out.str().find("U=0.2500"), std::string::npos);
  EXPECT_NE(out.str().find("T=0.6667 s"), std::string::npos);

  MM1Args hot;
  hot.a = 4;
  hot.s = 0.5;
  std::ostringstream o2, e2;
  EXPECT_EQ(cmd_mm1(hot, o2, e2), kExitUnstable);
  EXPECT_NE(e2.str().find("unstable"), std::string::npos);

  MM1Args both;
  both.a = 1;
  both.g = 1;
  both.s = 0.1;
  std::ostringstream o3, e3;
  EXPECT_EQ(cmd_mm1(both, o3, e3), kExitFailure);
}

TEST(Cli, Broadcast) {
  MM1Args a;
  a.broadcast = true;
  a.clients = 256;
  a.bytes = 64;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_mm1(a, out, err), kExitOk);
  EXPECT_NE(out.str().find("load=130560 bits/s"), std::string::npos);
}

TEST(Cli, ScenarioExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_scenario_run(std::string(NBSIM_DATA_DIR) + "/fig3.scenario",
                             RunConfig{}, out, err),
            kExitOk);
  EXPECT_NE(out.str().find("\nPASS\n"), std::string::npos);
  std::ostringstream o2, e2;
  EXPECT_EQ(cmd_scenario_run("/nonexistent.scenario", RunConfig{}, o2, e2),
            kExitFailure);
  EXPECT_FALSE(e2.str().empty());
}

TEST(Cli, TopologyAndSyncOnSamplePlan) {
  const std::string plan = std::string(NBSIM_DATA_DIR) + "/sample.plan";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_topology_clusters(plan, 5, 0, out, err), kExitOk);
  EXPECT_NE(out.str().find("24 members, 5 clusters"), std::string::npos);
  std::ostringstream o2, e2;
  EXPECT_EQ(cmd_sync_round(plan, std::string(NBSIM_DATA_DIR) + "/sample.attributes",
                           5, RunConfig{}, o2, e2),
            kExitOk)
      << e2.str();
  EXPECT_NE(o2.str().find("messages=65"), std::string::npos);
}

TEST(Cli, ByteIdenticalReruns) {
  for (auto fmt : {OutputFormat::kCsv, OutputFormat::kPlot, OutputFormat::kTable}) {
    auto c = quick();
    c.format = fmt;
    std::ostringstream a, b;
    cmd_timing_tables(c, a);
    cmd_timing_tables(c, b);
    EXPECT_EQ(a.str(), b.str());
  }
}

}  // namespace
}  // namespace nbsim::cli
