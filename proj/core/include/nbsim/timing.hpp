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

#ifndef NBSIM_TIMING_HPP_
#define NBSIM_TIMING_HPP_

// Statistical model of a neighborhood-wide update over a hops array.
//
// Rows are the hops inside one cluster chain (n - 1 for n members) and
// columns are the clusters; the leaders form the top row. With t_ij the
// delay of hop i in cluster j:
//
//   t_c  = 2 * max_j sum_i t_ij        forward pass, reverse reuses the times
//   t_cl = sum of the leader-ring hops  N-1 draws (tables) or 2(N-1) (literal)
//   t_c' = max_j sum_i t'_ij           redistribution with fresh draws
//   T_u  = t_c + t_cl + t_c'

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nbsim/simcore.hpp"

namespace nbsim {

struct HopsArrayDims {
  std::size_t rows = 1;
  std::size_t columns = 1;

  // Throws InvalidArgument unless both sides are >= 1.
  void validate() const;
  std::size_t total_hops() const { return rows * columns; }
  double ratio() const {
    return static_cast<double>(rows) / static_cast<double>(columns);
  }
  std::string to_string() const;  // "8x32"

  friend bool operator==(const HopsArrayDims&, const HopsArrayDims&) = default;
};

struct UpdateTiming {
  std::uint64_t t_c = 0;
  std::uint64_t t_cl = 0;
  std::uint64_t t_c_prime = 0;
  std::uint64_t T_u = 0;

  friend bool operator==(const UpdateTiming&, const UpdateTiming&) = default;
};

enum class TimingMode : std::uint8_t {
  // N-1 leader hops: the accounting the reference tables follow.
  kTableConsistent,
  // 2(N-1) leader hops, as the leader-ring equation is written.
  kEquationLiteral,
};

std::string_view to_string(TimingMode m);
// Accepts "table_consistent" / "equation_literal". Throws InvalidArgument.
TimingMode parse_timing_mode(std::string_view text);

std::size_t leader_hops(HopsArrayDims dims, TimingMode mode);

// Core of the model over an arbitrary hop sampler returning units >= 0.
// `cluster0_sum` (optional) receives the forward sum of the first cluster.
template <typename Sampler>
UpdateTiming simulate_with(HopsArrayDims dims, TimingMode mode,
                           Sampler&& sample,
                           std::uint64_t* cluster0_sum = nullptr) {
  UpdateTiming t;
  std::uint64_t worst = 0;
  for (std::size_t j = 0; j < dims.columns; ++j) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < dims.rows; ++i) sum += sample();
    if (j == 0 && cluster0_sum) *cluster0_sum = sum;
    if (sum > worst) worst = sum;
  }
  t.t_c = 2 * worst;
  const auto ring = leader_hops(dims, mode);
  for (std::size_t i = 0; i < ring; ++i) t.t_cl += sample();
  worst = 0;
  for (std::size_t j = 0; j < dims.columns; ++j) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < dims.rows; ++i) sum += sample();
    if (sum > worst) worst = sum;
  }
  t.t_c_prime = worst;
  t.T_u = t.t_c + t.t_cl + t.t_c_prime;
  return t;
}

UpdateTiming simulate_once(HopsArrayDims dims, RandomStream& stream,
                           TimingMode mode = TimingMode::kTableConsistent,
                           const LatencyModel& latency = {});

// Stream used for trial `index` of a Monte Carlo run over `dims`.
RandomStream trial_stream(std::uint64_t seed, HopsArrayDims dims,
                          std::size_t index);

struct ComponentStats {
  double mean = 0.0;
  double stddev = 0.0;
  double p005 = 0.0;  // 0.5th percentile
  double p995 = 0.0;  // 99.5th percentile
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

struct SweepRow {
  HopsArrayDims dims;
  std::size_t trials = 0;
  ComponentStats t_c;
  ComponentStats t_cl;
  ComponentStats t_c_prime;
  ComponentStats T_u;
  // Mean forward sum of a single cluster (rows hops).
  double cluster_sum_mean = 0.0;
};

// Linear-interpolated percentile of `values` (q in [0,1]). `values` is
// sorted in place.
double percentile(std::vector<std::uint64_t>& values, double q);

// Throws InvalidArgument when trials is zero.
SweepRow monte_carlo(HopsArrayDims dims, std::size_t trials,
                     std::uint64_t seed,
                     TimingMode mode = TimingMode::kTableConsistent);

// Power-of-two factor pairs of `total_hops` with both sides >= 4, most rows
// first. Throws InvalidArgument unless total_hops is a power of two >= 16.
std::vector<HopsArrayDims> power_of_two_pairs(std::size_t total_hops);

// One row per pair, most rows first. Throws InvalidArgument when a pair does
// not multiply to total_hops.
std::vector<SweepRow> sweep(std::size_t total_hops,
                            std::vector<HopsArrayDims> pairs,
                            std::size_t trials, std::uint64_t seed,
                            TimingMode mode = TimingMode::kTableConsistent);

struct OptimumResult {
  HopsArrayDims dims;
  double ratio = 0.0;
  SweepRow row;
  std::vector<SweepRow> candidates;
};

// Minimises mean T_u over power_of_two_pairs(total_hops).
OptimumResult find_optimum(std::size_t total_hops, std::size_t trials,
                           std::uint64_t seed,
                           TimingMode mode = TimingMode::kTableConsistent);

struct CurvePoint {
  std::size_t total_hops = 0;
  HopsArrayDims dims;
  std::uint64_t T_u_units = 0;  // mean optimal T_u, rounded
  std::uint64_t T_u_ms = 0;
};

std::vector<CurvePoint> figure9_curve(const std::vector<std::size_t>& totals,
                                      std::size_t trials, std::uint64_t seed,
                                      TimingMode mode =
                                          TimingMode::kTableConsistent);

}  // namespace nbsim

#endif  // NBSIM_TIMING_HPP_
