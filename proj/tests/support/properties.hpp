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

#ifndef NBSIM_TESTS_PROPERTIES_HPP_
#define NBSIM_TESTS_PROPERTIES_HPP_

// Property checks shared by the unit and acceptance suites.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nbsim/attributes.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/topology.hpp"
#include "nbsim/update_round.hpp"

namespace nbsim::testing {

// ---------------------------------------------------------------------------
// Commit safety by exhaustive interleaving.

struct CommitCheck {
  std::size_t schedules = 0;
  std::size_t commits = 0;
  std::size_t violations = 0;
  std::string first_violation;
};

namespace detail {

enum class Step : std::uint8_t { kAck, kDuplicateAck, kTick, kAbandon };

struct Action {
  Step step;
  std::size_t member;  // kAck / kDuplicateAck
};

inline std::string describe(const std::vector<Action>& seq, std::size_t g) {
  std::string s = "group=" + std::to_string(g) + ":";
  for (const auto& a : seq) {
    switch (a.step) {
      case Step::kAck: s += " ack" + std::to_string(a.member); break;
      case Step::kDuplicateAck: s += " dup" + std::to_string(a.member); break;
      case Step::kTick: s += " deadline"; break;
      case Step::kAbandon: s += " abandon"; break;
    }
  }
  return s;
}

// Replays one schedule and checks the safety rule after every step: a
// committed proposal has a receipt from every group member except those
// the deadline flagged as absent, and nobody is flagged before the deadline.
inline bool replay(const std::vector<Action>& seq, std::size_t g,
                   CommitCheck& out) {
  std::vector<NodeAddress> group;
  for (std::size_t i = 0; i < g; ++i) group.push_back(NodeAddress(100 + i));
  constexpr VirtualTime kDeadline{10};
  PendingCommit c(group[0], group, "k", "v", VirtualTime{0}, kDeadline);
  std::set<NodeAddress> acked{group[0]};
  bool deadline_passed = false;
  std::uint64_t now = 0;

  auto check = [&]() {
    if (!c.committed()) return c.visible_value() == std::nullopt;
    for (auto m : group) {
      const bool timed_out = deadline_passed && c.absentees().contains(m);
      if (!acked.contains(m) && !timed_out) return false;
      if (acked.contains(m) && c.absentees().contains(m)) return false;
    }
    if (!deadline_passed && !c.absentees().empty()) return false;
    return c.visible_value() == std::optional<std::string>("v");
  };

  bool ok = check();
  for (const auto& a : seq) {
    if (!ok) break;
    switch (a.step) {
      case Step::kAck:
      case Step::kDuplicateAck: {
        const auto res = c.ack(group[a.member], VirtualTime{++now});
        if (res == AckResult::kAccepted) acked.insert(group[a.member]);
        if (a.step == Step::kDuplicateAck && res == AckResult::kAccepted) {
          ok = false;
        }
        break;
      }
      case Step::kTick:
        now = std::max<std::uint64_t>(now, kDeadline.units);
        deadline_passed = true;
        c.tick(VirtualTime{now});
        break;
      case Step::kAbandon:
        c.abandon(VirtualTime{++now});
        break;
    }
    ok = ok && check();
  }
  ++out.schedules;
  if (c.committed()) ++out.commits;
  if (!ok) {
    if (out.violations == 0) out.first_violation = describe(seq, g);
    ++out.violations;
  }
  return ok;
}

inline void enumerate(std::vector<Action>& prefix, std::vector<bool>& used,
                      const std::vector<Action>& pool, std::size_t g,
                      CommitCheck& out) {
  replay(prefix, g, out);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    // A duplicate only makes sense after the original receipt.
    if (pool[i].step == Step::kDuplicateAck) {
      const bool original_sent = std::any_of(
          prefix.begin(), prefix.end(), [&](const Action& a) {
            return a.step == Step::kAck && a.member == pool[i].member;
          });
      if (!original_sent) continue;
    }
    used[i] = true;
    prefix.push_back(pool[i]);
    enumerate(prefix, used, pool, g, out);
    prefix.pop_back();
    used[i] = false;
  }
}

}  // namespace detail

// Every ordered subset of {receipts, duplicate receipts, deadline, proposer
// abandon} for groups of 1..max_group members.
inline CommitCheck check_commit_interleavings(std::size_t max_group) {
  CommitCheck out;
  for (std::size_t g = 1; g <= max_group; ++g) {
    std::vector<detail::Action> pool;
    for (std::size_t m = 1; m < g; ++m) {
      pool.push_back({detail::Step::kAck, m});
      pool.push_back({detail::Step::kDuplicateAck, m});
    }
    pool.push_back({detail::Step::kTick, 0});
    pool.push_back({detail::Step::kAbandon, 0});
    std::vector<detail::Action> prefix;
    std::vector<bool> used(pool.size(), false);
    detail::enumerate(prefix, used, pool, g, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Update-round convergence on random neighborhoods.

inline AttributeList random_list(std::mt19937_64& rng, NodeAddress owner,
                                 const std::vector<NodeAddress>& others) {
  AttributeList list;
  const std::size_t own = rng() % 4;
  for (std::size_t i = 0; i < own; ++i) {
    AttributeEntry e;
    e.key = "k" + std::to_string(rng() % 5);
    e.owner = owner;
    e.value = "v" + std::to_string(rng() % 7);
    e.version = 1 + rng() % 3;
    e.scope = e.key == "k0" ? AttributeScope::local() : AttributeScope::global();
    list.offer(e);
  }
  // Stale or conflicting copies of other members' entries.
  if (!others.empty() && rng() % 3 == 0) {
    AttributeEntry e;
    e.key = "k1";
    e.owner = others[rng() % others.size()];
    e.value = "w" + std::to_string(rng() % 3);
    e.version = 1 + rng() % 3;
    e.scope = AttributeScope::global();
    list.offer(e);
  }
  return list;
}

struct RoundCheck {
  std::size_t members = 0;
  std::size_t cluster_size = 0;
  std::size_t expected_messages = 0;
  std::size_t messages = 0;
  bool converged = false;
};

// Sum over clusters of 3(n_j - 1) plus 2(N - 1) for the leader ring.
inline std::size_t expected_round_messages(const ClusterPlan& plan) {
  std::size_t total = 2 * (plan.clusters.size() - 1);
  for (const auto& c : plan.clusters) total += 3 * (c.size() - 1);
  return total;
}

inline RoundCheck random_round(std::mt19937_64& rng, std::size_t members,
                               std::size_t cluster_size, std::uint64_t seed) {
  std::set<NodeAddress> picked;
  while (picked.size() < members) {
    picked.insert(NodeAddress(0x0a000000u + static_cast<std::uint32_t>(rng() % 4096)));
  }
  const std::vector<NodeAddress> addrs(picked.begin(), picked.end());
  std::map<NodeAddress, AttributeList> lists;
  AttributeList oracle;
  for (auto a : addrs) {
    lists[a] = random_list(rng, a, addrs);
    oracle = merge_lists(oracle, lists[a]);
  }
  const auto plan = form_clusters(addrs, cluster_size);
  auto round = start_round(plan, lists);
  Engine engine(seed);
  run_round(round, engine);

  RoundCheck out;
  out.members = members;
  out.cluster_size = cluster_size;
  out.expected_messages = expected_round_messages(plan);
  out.messages = round.messages_sent();
  out.converged = round.neighborhood_list() == oracle;
  for (auto a : addrs) {
    out.converged = out.converged && round.list_of(a) == oracle;
  }
  return out;
}

}  // namespace nbsim::testing

#endif  // NBSIM_TESTS_PROPERTIES_HPP_
