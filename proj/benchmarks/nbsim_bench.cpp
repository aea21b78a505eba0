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


#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "nbsim/attributes.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/timing.hpp"
#include "nbsim/topology.hpp"
#include "nbsim/update_round.hpp"

namespace {

using namespace nbsim;

void BM_SimulateOnce(benchmark::State& state) {
  const HopsArrayDims dims{static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(1))};
  std::size_t i = 0;
  for (auto _ : state) {
    auto stream = trial_stream(5489, dims, i++);
    benchmark::DoNotOptimize(simulate_once(dims, stream));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(dims.rows * dims.columns));
}
BENCHMARK(BM_SimulateOnce)->Args({8, 32})->Args({32, 64})->Args({512, 4});

void BM_MonteCarlo(benchmark::State& state) {
  const HopsArrayDims dims{16, 64};
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo(dims, state.range(0), 5489));
  }
}
BENCHMARK(BM_MonteCarlo)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

AttributeList list_for(NodeAddress owner, std::size_t entries) {
  AttributeList list;
  for (std::size_t k = 0; k < entries; ++k) {
    list.put({"k" + std::to_string(k), AttributeScope::global(),
              owner.to_string(), 1, owner, UpdateClass::kModerate});
  }
  return list;
}

void BM_MergeLists(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = list_for(NodeAddress(0x0a000001u), n);
  const auto b = list_for(NodeAddress(0x0a000002u), n);
  for (auto _ : state) benchmark::DoNotOptimize(merge_lists(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}
BENCHMARK(BM_MergeLists)->Arg(16)->Arg(256);

void BM_UpdateRound(benchmark::State& state) {
  const auto members = static_cast<std::size_t>(state.range(0));
  std::vector<NodeAddress> addrs;
  std::map<NodeAddress, AttributeList> lists;
  for (std::size_t i = 0; i < members; ++i) {
    addrs.emplace_back(0x0a000000u + static_cast<std::uint32_t>(i + 1));
    lists[addrs.back()] = list_for(addrs.back(), 4);
  }
  const auto plan = form_clusters(addrs, 8);
  for (auto _ : state) {
    auto round = start_round(plan, lists);
    Engine engine(5489);
    benchmark::DoNotOptimize(run_round(round, engine));
  }
}
BENCHMARK(BM_UpdateRound)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
