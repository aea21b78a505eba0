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

#include "nbsim/update_round.hpp"

#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "nbsim/error.hpp"
#include "properties.hpp"

namespace nbsim {
namespace {

using testing::nth;

std::map<NodeAddress, AttributeList> one_entry_each(const ClusterPlan& plan) {
  std::map<NodeAddress, AttributeList> lists;
  for (auto m : plan.members()) {
    AttributeEntry e;
    e.key = "id";
    e.owner = m;
    e.value = m.to_string();
    lists[m].put(e);
  }
  return lists;
}

ClusterPlan plan_of(std::uint32_t members, std::size_t size) {
  std::vector<NodeAddress> addrs;
  for (std::uint32_t i = 0; i < members; ++i) addrs.push_back(nth(i + 1));
  return form_clusters(addrs, size);
}

TEST(UpdateRound, EqualClustersMessageCount) {
  // k = N = 3 clusters of n = 4: 3*2*3 + 2*2 + 3*3 = 31.
  const auto plan = plan_of(12, 4);
  auto round = start_round(plan, one_entry_each(plan));
  Engine engine(1);
  run_round(round, engine);
  EXPECT_EQ(round.messages_sent(), 31u);
  EXPECT_EQ(round.messages_in(RoundPhase::kIntraForward), 9u);
  EXPECT_EQ(round.messages_in(RoundPhase::kIntraReverse), 9u);
  EXPECT_EQ(round.messages_in(RoundPhase::kLeaderRing), 4u);
  EXPECT_EQ(round.messages_in(RoundPhase::kRedistribute), 9u);
  EXPECT_EQ(round.phase(), RoundPhase::kDone);
  EXPECT_EQ(round.neighborhood_list().size(), 12u);
  for (auto m : plan.members()) {
    EXPECT_EQ(round.list_of(m), round.neighborhood_list());
  }
}

TEST(UpdateRound, UnequalLastCluster) {
  const auto plan = plan_of(11, 4);  // 4, 4, 3
  auto round = start_round(plan, one_entry_each(plan));
  Engine engine(2);
  run_round(round, engine);
  EXPECT_EQ(round.messages_sent(), testing::expected_round_messages(plan));
  EXPECT_EQ(round.messages_sent(), 3u * (3 + 3 + 2) + 4u);
}

TEST(UpdateRound, SingleMemberAndSingleCluster) {
  const auto solo = plan_of(1, 5);
  auto r1 = start_round(solo, one_entry_each(solo));
  Engine e1(3);
  run_round(r1, e1);
  EXPECT_EQ(r1.messages_sent(), 0u);
  EXPECT_EQ(r1.neighborhood_list().size(), 1u);

  const auto one = plan_of(5, 5);
  auto r2 = start_round(one, one_entry_each(one));
  Engine e2(3);
  run_round(r2, e2);
  EXPECT_EQ(r2.messages_sent(), 12u);
  EXPECT_EQ(r2.messages_in(RoundPhase::kLeaderRing), 0u);
}

TEST(UpdateRound, PhasesAdvanceInOrder) {
  const auto plan = plan_of(9, 3);
  auto round = start_round(plan, one_entry_each(plan));
  Engine engine(4);
  EXPECT_EQ(round.phase(), RoundPhase::kIntraForward);
  EXPECT_FALSE(round.started());
  auto last = static_cast<int>(round.phase());
  while (round.phase() != RoundPhase::kDone) {
    step(round, engine);
    const auto now = static_cast<int>(round.phase());
    EXPECT_GE(now, last);
    last = now;
  }
  EXPECT_TRUE(round.finished_at());
  EXPECT_THROW(step(round, engine), InvalidArgument);
}

TEST(UpdateRound, ClusterListsBeforeRing) {
  const auto plan = plan_of(6, 3);
  auto round = start_round(plan, one_entry_each(plan));
  Engine engine(5);
  run_round(round, engine);
  EXPECT_EQ(round.cluster_list(0).size(), 3u);
  EXPECT_EQ(round.cluster_list(1).size(), 3u);
  EXPECT_EQ(round.cluster_stage(0), RoundPhase::kDone);
}

TEST(UpdateRound, MissingListIsAConfigError) {
  const auto plan = plan_of(3, 3);
  auto lists = one_entry_each(plan);
  lists.erase(nth(2));
  EXPECT_THROW(UpdateRound(plan, lists), ConfigError);
}

TEST(UpdateRound, DeadMemberIsSkippedAndFlaggedStale) {
  const auto plan = plan_of(9, 3);
  auto lists = one_entry_each(plan);
  auto round = start_round(plan, lists);
  round.set_live(nth(2), false);  // middle of the first chain
  round.set_live(nth(4), false);  // a leader
  Engine engine(6);
  run_round(round, engine);
  EXPECT_EQ(round.phase(), RoundPhase::kDone);
  EXPECT_TRUE(round.stale().contains(nth(2)));
  EXPECT_TRUE(round.stale().contains(nth(4)));

  AttributeList live_merge;
  for (auto m : plan.members()) {
    if (m != nth(2) && m != nth(4)) live_merge = merge_lists(live_merge, lists[m]);
  }
  EXPECT_EQ(round.neighborhood_list(), live_merge);
  for (auto m : plan.members()) {
    if (round.live(m)) EXPECT_EQ(round.list_of(m), live_merge) << m.to_string();
  }
  EXPECT_LT(round.messages_sent(), testing::expected_round_messages(plan));
}

TEST(UpdateRound, Deterministic) {
  const auto plan = plan_of(20, 4);
  auto a = start_round(plan, one_entry_each(plan));
  auto b = start_round(plan, one_entry_each(plan));
  Engine ea(9), eb(9);
  EXPECT_EQ(run_round(a, ea), run_round(b, eb));
  EXPECT_EQ(format_trace(ea.trace()), format_trace(eb.trace()));
}

TEST(UpdateRound, RandomRoundsConvergeToTheOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t members = 2 + rng() % 63;
    const std::size_t size = 2 + rng() % 8;
    const auto r = testing::random_round(rng, members, size, 1000 + trial);
    EXPECT_TRUE(r.converged) << members << " / " << size;
    EXPECT_EQ(r.messages, r.expected_messages) << members << " / " << size;
  }
}

}  // namespace
}  // namespace nbsim
