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

#include "nbsim/attributes.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "nbsim/error.hpp"
#include "properties.hpp"

namespace nbsim {
namespace {

using testing::nth;
using testing::record;

AttributeEntry entry(std::string key, NodeAddress owner, std::string value,
                     std::uint64_t version = 1,
                     AttributeScope scope = AttributeScope::global()) {
  AttributeEntry e;
  e.key = std::move(key);
  e.owner = owner;
  e.value = std::move(value);
  e.version = version;
  e.scope = std::move(scope);
  return e;
}

TEST(AttributeScope, ParsesTextForms) {
  EXPECT_EQ(AttributeScope::parse("local"), AttributeScope::local());
  EXPECT_EQ(AttributeScope::parse("global"), AttributeScope::global());
  EXPECT_EQ(AttributeScope::parse("group:jazz"), AttributeScope::in_group("jazz"));
  EXPECT_EQ(AttributeScope::in_group("x").to_string(), "group:x");
  EXPECT_THROW(AttributeScope::parse("group:"), InvalidArgument);
  EXPECT_THROW(AttributeScope::parse("planet"), InvalidArgument);
}

TEST(UpdateClass, RoundTrips) {
  for (auto c : {UpdateClass::kAggressive, UpdateClass::kModerate,
                 UpdateClass::kLight}) {
    EXPECT_EQ(parse_update_class(to_string(c)), c);
  }
  EXPECT_THROW(parse_update_class("lazy"), InvalidArgument);
}

TEST(AttributeList, PutNeedsStrictlyNewerVersion) {
  AttributeList l;
  EXPECT_TRUE(l.put(entry("nick", nth(1), "a", 1)));
  EXPECT_FALSE(l.put(entry("nick", nth(1), "b", 1)));
  EXPECT_TRUE(l.put(entry("nick", nth(1), "c", 2)));
  EXPECT_EQ(l.find("nick", nth(1))->value, "c");
  EXPECT_THROW(l.put(entry("nick", nth(1), "d", 3, AttributeScope::local())),
               InvalidArgument);
  EXPECT_EQ(l.find("nick", nth(2)), nullptr);
}

TEST(AttributeList, OfferAppliesConflictRule) {
  AttributeList l;
  l.offer(entry("nick", nth(1), "b", 2));
  EXPECT_FALSE(l.offer(entry("nick", nth(1), "a", 1)));
  EXPECT_TRUE(l.offer(entry("nick", nth(1), "a", 2)));  // same version, smaller value
  EXPECT_EQ(l.find("nick", nth(1))->value, "a");
  EXPECT_FALSE(l.offer(entry("nick", nth(1), "b", 2)));
}

TEST(Supersedes, IsAStrictTotalOrderOnDistinctEntries) {
  const std::vector<AttributeEntry> es{
      entry("k", nth(1), "a", 1), entry("k", nth(1), "b", 1),
      entry("k", nth(1), "a", 2), entry("k", nth(1), "a", 1, AttributeScope::local()),
      entry("k", nth(2), "a", 1)};
  for (const auto& a : es) {
    EXPECT_FALSE(supersedes(a, a));
    for (const auto& b : es) {
      if (a == b) continue;
      EXPECT_NE(supersedes(a, b), supersedes(b, a));
    }
  }
}

AttributeList random_list(std::mt19937_64& rng) {
  AttributeList l;
  for (int i = 0, n = static_cast<int>(rng() % 6); i < n; ++i) {
    l.offer(entry("k" + std::to_string(rng() % 3), nth(rng() % 3),
                  "v" + std::to_string(rng() % 3), 1 + rng() % 2));
  }
  return l;
}

TEST(MergeLists, CommutativeAssociativeIdempotent) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_list(rng);
    const auto b = random_list(rng);
    const auto c = random_list(rng);
    EXPECT_EQ(merge_lists(a, b), merge_lists(b, a));
    EXPECT_EQ(merge_lists(merge_lists(a, b), c), merge_lists(a, merge_lists(b, c)));
    EXPECT_EQ(merge_lists(a, a), a);
  }
}

TEST(AttributeSeeds, ParsesValuesToEndOfLine) {
  std::istringstream in(
      "# owner key scope class value\n"
      "10.0.0.1 topic group:jazz moderate be-bop and cool\n"
      "10.0.0.2 nick global light bob\n");
  const auto seeds = parse_attribute_seeds(in);
  ASSERT_EQ(seeds.size(), 2u);
  const auto* e = seeds.at(nth(1)).find("topic", nth(1));
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->value, "be-bop and cool");
  EXPECT_EQ(e->scope, AttributeScope::in_group("jazz"));
}

TEST(AttributeSeeds, ErrorsCarryLineNumbers) {
  std::istringstream dup("10.0.0.1 a local light x\n10.0.0.1 a local light y\n");
  try {
    parse_attribute_seeds(dup);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad("\n10.0.0.1 a local fast x\n");
  try {
    parse_attribute_seeds(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(PendingCommit, CommitsOnceEveryReceiptArrives) {
  auto c = propose_commit(nth(1), {nth(1), nth(2), nth(3)}, "k", "v",
                          VirtualTime{0}, VirtualTime{10});
  EXPECT_EQ(c.deadline(), VirtualTime{10});
  EXPECT_EQ(c.ack(nth(2), VirtualTime{1}), AckResult::kAccepted);
  EXPECT_FALSE(c.visible_value());
  EXPECT_EQ(c.ack(nth(2), VirtualTime{2}), AckResult::kDuplicate);
  EXPECT_EQ(c.ack(nth(9), VirtualTime{2}), AckResult::kNotAMember);
  EXPECT_EQ(c.ack(nth(3), VirtualTime{3}), AckResult::kAccepted);
  EXPECT_TRUE(c.committed());
  EXPECT_EQ(c.visible_value(), "v");
  EXPECT_EQ(c.resolved_at(), VirtualTime{3});
  EXPECT_EQ(c.ack(nth(3), VirtualTime{4}), AckResult::kAfterResolution);
}

TEST(PendingCommit, DeadlineFlagsAbsentees) {
  auto c = propose_commit(nth(1), {nth(1), nth(2), nth(3)}, "k", "v",
                          VirtualTime{0}, VirtualTime{10});
  c.ack(nth(2), VirtualTime{1});
  EXPECT_FALSE(c.tick(VirtualTime{9}));
  EXPECT_TRUE(c.tick(VirtualTime{10}));
  EXPECT_TRUE(c.committed());
  EXPECT_EQ(c.absentees(), std::set<NodeAddress>{nth(3)});
  EXPECT_FALSE(c.tick(VirtualTime{11}));
}

TEST(PendingCommit, SingletonAndAbandon) {
  auto solo = propose_commit(nth(1), {nth(1)}, "k", "v", VirtualTime{4},
                             VirtualTime{10});
  EXPECT_TRUE(solo.committed());
  EXPECT_EQ(solo.resolved_at(), VirtualTime{4});

  auto c = propose_commit(nth(1), {nth(1), nth(2)}, "k", "v", VirtualTime{0},
                          VirtualTime{10});
  EXPECT_TRUE(c.abandon(VirtualTime{5}));
  EXPECT_EQ(c.state(), CommitState::kExpired);
  EXPECT_FALSE(c.visible_value());
  EXPECT_FALSE(c.tick(VirtualTime{10}));
  EXPECT_THROW(propose_commit(nth(1), {nth(2)}, "k", "v", VirtualTime{0},
                              VirtualTime{1}),
               InvalidArgument);
}

TEST(PendingCommit, ExhaustiveInterleavingsAreSafe) {
  const auto r = testing::check_commit_interleavings(3);
  EXPECT_EQ(r.violations, 0u) << r.first_violation;
  EXPECT_GT(r.schedules, 500u);
  EXPECT_GT(r.commits, 0u);
}

TEST(UpdatePeriod, ScalesWithMedianMetric) {
  const std::vector<double> zero{0.0};
  EXPECT_EQ(update_period(UpdateClass::kAggressive, zero), VirtualTime{10});
  EXPECT_EQ(update_period(UpdateClass::kModerate, zero), VirtualTime{50});
  EXPECT_EQ(update_period(UpdateClass::kLight, zero), VirtualTime{250});
  const std::vector<double> ms{300, 50, 100, 1000};  // median 200
  EXPECT_EQ(update_period(UpdateClass::kAggressive, ms), VirtualTime{30});
  EXPECT_THROW(update_period(UpdateClass::kLight, std::vector<double>{}),
               InvalidArgument);
  EXPECT_THROW(update_period(UpdateClass::kLight, std::vector<double>{-1}),
               InvalidArgument);
}

TEST(UpdatePeriod, ClassesStayOrdered) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> m(1 + rng() % 9);
    for (auto& x : m) x = static_cast<double>(rng() % 500);
    const auto a = update_period(UpdateClass::kAggressive, m);
    const auto b = update_period(UpdateClass::kModerate, m);
    const auto c = update_period(UpdateClass::kLight, m);
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
  }
}

// --- lookup -----------------------------------------------------------------

NeighborhoodState hood(std::string name, std::uint32_t first,
                       std::uint32_t count, std::optional<std::uint32_t> router) {
  NeighborhoodState s;
  s.name = std::move(name);
  std::vector<NodeRecord> recs;
  for (std::uint32_t i = 0; i < count; ++i) recs.push_back(record(nth(first + i)));
  s.map = NeighborhoodMap(recs);
  if (router) s.router = nth(*router);
  return s;
}

TEST(Lookup, FindsLocalAndRemoteMatches) {
  Overlay o;
  o.neighborhoods.push_back(hood("a", 1, 3, 1));
  o.neighborhoods.push_back(hood("b", 100, 3, 100));
  o.neighborhoods[0].map.add_remote_router(nth(100));
  auto put = [&](std::size_t h, std::uint32_t holder, AttributeEntry e) {
    o.neighborhoods[h].lists[nth(holder)].offer(e);
  };
  put(0, 1, entry("topic", nth(1), "jazz"));
  put(0, 2, entry("topic", nth(2), "jazz"));
  put(0, 3, entry("topic", nth(3), "jazz", 1, AttributeScope::local()));
  put(1, 100, entry("topic", nth(101), "jazz"));
  put(1, 100, entry("topic", nth(102), "jazz", 1, AttributeScope::local()));

  const auto r = lookup_by_attribute(o, 0, nth(1), "topic", "jazz");
  EXPECT_FALSE(r.partial);
  const std::vector<AttributeMatch> want{{nth(2), 0}, {nth(3), 0}, {nth(101), 1}};
  EXPECT_EQ(r.matches, want);
  ASSERT_EQ(r.connections.size(), 1u);
  EXPECT_EQ(r.connections[0].remote_router, nth(100));
  EXPECT_EQ(r.connections[0].local_router, nth(1));
  EXPECT_EQ(r.connections[0].target, nth(101));
}

TEST(Lookup, PartialWithoutRouters) {
  Overlay o;
  o.neighborhoods.push_back(hood("a", 1, 2, std::nullopt));
  o.neighborhoods[0].lists[nth(2)].offer(entry("t", nth(2), "x"));
  auto r = lookup_by_attribute(o, 0, nth(1), "t", "x");
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.matches.size(), 1u);

  o.neighborhoods[0].map.add_remote_router(nth(500));  // unknown router
  r = lookup_by_attribute(o, 0, nth(1), "t", "x");
  EXPECT_TRUE(r.partial);
  EXPECT_THROW(lookup_by_attribute(o, 5, nth(1), "t", "x"), InvalidArgument);
}

// Brute force over every (holder, entry) pair agrees with the lookup.
TEST(Lookup, AgreesWithBruteForce) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Overlay o;
    const std::size_t hoods = 1 + rng() % 4;
    for (std::size_t h = 0; h < hoods; ++h) {
      const auto first = static_cast<std::uint32_t>(h * 100 + 1);
      o.neighborhoods.push_back(hood("h" + std::to_string(h), first, 5, first));
      for (std::uint32_t i = 0; i < 5; ++i) {
        if (rng() % 5 == 0) o.neighborhoods[h].map.set_active(nth(first + i), false);
        for (int k = 0; k < 3; ++k) {
          const auto owner = nth(first + static_cast<std::uint32_t>(rng() % 5));
          o.neighborhoods[h].lists[nth(first + i)].offer(entry(
              "t", owner, "x", 1,
              rng() % 2 ? AttributeScope::local() : AttributeScope::global()));
        }
      }
    }
    for (std::size_t h = 1; h < hoods; ++h) {
      if (rng() % 4) o.neighborhoods[0].map.add_remote_router(*o.neighborhoods[h].router);
    }
    const auto requester = nth(1 + static_cast<std::uint32_t>(rng() % 5));

    std::set<AttributeMatch> want;
    for (std::size_t h = 0; h < hoods; ++h) {
      const auto& hs = o.neighborhoods[h];
      const auto& remotes = o.neighborhoods[0].map.remote_routers();
      const bool reachable =
          h == 0 || std::find(remotes.begin(), remotes.end(), *hs.router) != remotes.end();
      if (!reachable) continue;
      for (const auto& [holder, list] : hs.lists) {
        for (const auto& [k, e] : list) {
          if (h != 0 && e.scope.kind == ScopeKind::kLocal) continue;
          if (e.owner == requester) continue;
          if (!hs.map.at(e.owner).active) continue;
          want.insert({e.owner, h});
        }
      }
    }
    const auto got = lookup_by_attribute(o, 0, requester, "t", "x");
    EXPECT_EQ(std::set<AttributeMatch>(got.matches.begin(), got.matches.end()), want);
    EXPECT_TRUE(std::is_sorted(got.matches.begin(), got.matches.end()));
  }
}

}  // namespace
}  // namespace nbsim
