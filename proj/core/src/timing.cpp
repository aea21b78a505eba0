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

#include "nbsim/timing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nbsim/error.hpp"

namespace nbsim {

void HopsArrayDims::validate() const {
  if (rows < 1 || columns < 1) {
    throw InvalidArgument("hops array needs rows >= 1 and columns >= 1");
  }
}

std::string HopsArrayDims::to_string() const {
  return std::to_string(rows) + "x" + std::to_string(columns);
}

std::string_view to_string(TimingMode m) {
  return m == TimingMode::kTableConsistent ? "table_consistent"
                                           : "equation_literal";
}

TimingMode parse_timing_mode(std::string_view text) {
  if (text == "table_consistent") return TimingMode::kTableConsistent;
  if (text == "equation_literal") return TimingMode::kEquationLiteral;
  throw InvalidArgument("unknown timing mode '" + std::string(text) + "'");
}

std::size_t leader_hops(HopsArrayDims dims, TimingMode mode) {
  const auto n = dims.columns - 1;
  return mode == TimingMode::kTableConsistent ? n : 2 * n;
}

UpdateTiming simulate_once(HopsArrayDims dims, RandomStream& stream,
                           TimingMode mode, const LatencyModel& latency) {
  dims.validate();
  std::uniform_int_distribution<std::uint32_t> hop(latency.hop_low,
                                                   latency.hop_high);
  auto& engine = stream.engine();
  return simulate_with(dims, mode, [&] { return hop(engine); });
}

RandomStream trial_stream(std::uint64_t seed, HopsArrayDims dims,
                          std::size_t index) {
  return RandomStream(seed, "timing/" + dims.to_string() + "/" +
                                std::to_string(index));
}

double percentile(std::vector<std::uint64_t>& values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(values[lo]) +
         frac * (static_cast<double>(values[hi]) -
                 static_cast<double>(values[lo]));
}

namespace {

ComponentStats summarize(std::vector<std::uint64_t>& v) {
  ComponentStats s;
  const auto n = static_cast<double>(v.size());
  // Integer sums keep the mean of T_u exactly the sum of component means.
  std::uint64_t total = 0;
  for (auto x : v) total += x;
  s.mean = static_cast<double>(total) / n;
  double ss = 0.0;
  for (auto x : v) {
    const double d = static_cast<double>(x) - s.mean;
    ss += d * d;
  }
  s.stddev = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.p005 = percentile(v, 0.005);
  s.p995 = percentile(v, 0.995);
  s.min = v.front();
  s.max = v.back();
  return s;
}

}  // namespace

SweepRow monte_carlo(HopsArrayDims dims, std::size_t trials,
                     std::uint64_t seed, TimingMode mode) {
  dims.validate();
  if (trials == 0) throw InvalidArgument("monte_carlo needs trials >= 1");
  std::vector<std::uint64_t> tc, tcl, tcp, tu;
  tc.reserve(trials);
  tcl.reserve(trials);
  tcp.reserve(trials);
  tu.reserve(trials);
  std::uint64_t cluster_total = 0;
  const LatencyModel latency;
  for (std::size_t i = 0; i < trials; ++i) {
    auto stream = trial_stream(seed, dims, i);
    std::uniform_int_distribution<std::uint32_t> hop(latency.hop_low,
                                                     latency.hop_high);
    auto& engine = stream.engine();
    std::uint64_t cluster0 = 0;
    const auto t =
        simulate_with(dims, mode, [&] { return hop(engine); }, &cluster0);
    cluster_total += cluster0;
    tc.push_back(t.t_c);
    tcl.push_back(t.t_cl);
    tcp.push_back(t.t_c_prime);
    tu.push_back(t.T_u);
  }
  SweepRow row;
  row.dims = dims;
  row.trials = trials;
  row.t_c = summarize(tc);
  row.t_cl = summarize(tcl);
  row.t_c_prime = summarize(tcp);
  row.T_u = summarize(tu);
  row.cluster_sum_mean =
      static_cast<double>(cluster_total) / static_cast<double>(trials);
  return row;
}

std::vector<HopsArrayDims> power_of_two_pairs(std::size_t total_hops) {
  if (total_hops < 16 || !std::has_single_bit(total_hops)) {
    throw InvalidArgument("total hops must be a power of two >= 16, got " +
                          std::to_string(total_hops));
  }
  std::vector<HopsArrayDims> out;
  for (std::size_t rows = total_hops / 4; rows >= 4; rows /= 2) {
    out.push_back({rows, total_hops / rows});
  }
  return out;
}

std::vector<SweepRow> sweep(std::size_t total_hops,
                            std::vector<HopsArrayDims> pairs,
                            std::size_t trials, std::uint64_t seed,
                            TimingMode mode) {
  for (const auto& p : pairs) {
    p.validate();
    if (p.total_hops() != total_hops) {
      throw InvalidArgument(p.to_string() + " does not factor " +
                            std::to_string(total_hops));
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const HopsArrayDims& a, const HopsArrayDims& b) {
                     return a.rows > b.rows;
                   });
  std::vector<SweepRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(monte_carlo(p, trials, seed, mode));
  return rows;
}

OptimumResult find_optimum(std::size_t total_hops, std::size_t trials,
                           std::uint64_t seed, TimingMode mode) {
  OptimumResult out;
  out.candidates =
      sweep(total_hops, power_of_two_pairs(total_hops), trials, seed, mode);
  const auto best = std::min_element(
      out.candidates.begin(), out.candidates.end(),
      [](const SweepRow& a, const SweepRow& b) {
        return a.T_u.mean < b.T_u.mean;
      });
  out.row = *best;
  out.dims = best->dims;
  out.ratio = best->dims.ratio();
  return out;
}

std::vector<CurvePoint> figure9_curve(const std::vector<std::size_t>& totals,
                                      std::size_t trials, std::uint64_t seed,
                                      TimingMode mode) {
  std::vector<CurvePoint> out;
  for (auto total : totals) {
    auto opt = find_optimum(total, trials, seed, mode);
    CurvePoint p;
    p.total_hops = total;
    p.dims = opt.dims;
    p.T_u_units = static_cast<std::uint64_t>(std::llround(opt.row.T_u.mean));
    p.T_u_ms = units_to_ms(VirtualTime{p.T_u_units});
    out.push_back(p);
  }
  return out;
}

}  // namespace nbsim
