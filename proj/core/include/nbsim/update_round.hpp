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

#ifndef NBSIM_UPDATE_ROUND_HPP_
#define NBSIM_UPDATE_ROUND_HPP_

// Hierarchical divide-and-conquer attribute update.
//
// Each cluster chain runs concurrently: the lowest address forwards its list
// up the chain, every hop merging the receiver's own entries, and the
// highest address sends the cluster-final list back down. The cluster
// leaders then repeat the same forward/reverse pass among themselves,
// started by the head leader, which yields the neighborhood-final list.
// Finally each leader pushes that list up its own chain once.
//
// A failure-free round over clusters of sizes n_1..n_N sends
//   sum_j 2(n_j - 1)  +  2(N - 1)  +  sum_j (n_j - 1)
// messages. A hop whose target is down is skipped: the sender moves on to
// the next live member in chain order and the target is flagged stale.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nbsim/attributes.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/topology.hpp"

namespace nbsim {

enum class RoundPhase : std::uint8_t {
  kIntraForward,
  kIntraReverse,
  kLeaderRing,
  kRedistribute,
  kDone,
};

std::string_view to_string(RoundPhase p);

class UpdateRound {
 public:
  // Engine channel used for every round message.
  static constexpr std::uint32_t kChannel = 0x524e44;

  // Throws ConfigError when a plan member has no list.
  UpdateRound(ClusterPlan plan, std::map<NodeAddress, AttributeList> lists,
              std::uint32_t round_id = 0);

  RoundPhase phase() const;
  bool started() const { return started_; }
  const ClusterPlan& plan() const { return plan_; }
  std::uint32_t id() const { return id_; }

  // Liveness as seen by the senders. Members start live.
  void set_live(NodeAddress member, bool live);
  bool live(NodeAddress member) const { return !down_.contains(member); }

  // Sends the first hop of every cluster chain.
  void begin(Engine& engine);

  // Consumes a delivery belonging to this round; returns false otherwise.
  bool deliver(const SimEvent& ev, Engine& engine);

  const std::map<NodeAddress, AttributeList>& lists() const { return held_; }
  const AttributeList& list_of(NodeAddress member) const;
  // Cluster-final list for cluster `c`, once its reverse pass completed.
  const AttributeList& cluster_list(std::size_t c) const;
  const AttributeList& neighborhood_list() const { return final_; }

  // Position of the current holder in cluster `c`'s chain.
  std::size_t cluster_cursor(std::size_t c) const;
  RoundPhase cluster_stage(std::size_t c) const;

  std::size_t messages_sent() const;
  std::size_t messages_in(RoundPhase p) const;
  const std::set<NodeAddress>& stale() const { return stale_; }
  std::optional<VirtualTime> finished_at() const { return finished_at_; }

 private:
  struct Cluster {
    std::vector<NodeAddress> chain;
    RoundPhase stage = RoundPhase::kIntraForward;
    std::size_t cursor = 0;
    AttributeList acc;
    AttributeList final_list;
    std::optional<std::size_t> leader_pos;
  };

  struct InFlight {
    RoundPhase phase;
    std::size_t lane;  // cluster index, or ring index in the leader ring
    std::size_t from;
    std::size_t to;
    AttributeList payload;
  };

  enum class Dir { kUp, kDown };

  std::optional<std::size_t> next_live(const std::vector<NodeAddress>& chain,
                                       std::size_t from, Dir dir);
  void send(Engine& engine, RoundPhase phase, std::size_t lane,
            std::size_t from, std::size_t to, AttributeList payload);

  void forward_reached_top(Engine& engine, std::size_t c, std::size_t pos,
                           AttributeList acc);
  void cluster_done(Engine& engine, std::size_t c, std::size_t leader_pos);
  void start_ring(Engine& engine);
  void ring_reached_top(Engine& engine, std::size_t pos, AttributeList acc);
  void ring_done(Engine& engine);
  void redistribute_done(Engine& engine, std::size_t c);

  ClusterPlan plan_;
  std::uint32_t id_;
  std::map<NodeAddress, AttributeList> initial_;
  std::map<NodeAddress, AttributeList> held_;
  std::vector<Cluster> clusters_;
  std::set<NodeAddress> down_;
  std::set<NodeAddress> stale_;

  RoundPhase phase_ = RoundPhase::kIntraForward;
  bool started_ = false;
  std::vector<NodeAddress> ring_;
  std::vector<std::size_t> ring_cluster_;
  AttributeList final_;
  std::size_t pending_clusters_ = 0;

  std::uint64_t next_msg_ = 0;
  std::unordered_map<std::uint64_t, InFlight> in_flight_;
  std::array<std::size_t, 5> sent_{};
  std::optional<VirtualTime> finished_at_;
};

// Validates the inputs and returns a round in IntraForward.
UpdateRound start_round(const ClusterPlan& plan,
                        const std::map<NodeAddress, AttributeList>& lists,
                        std::uint32_t round_id = 0);

// Advances one message hop: the first call sends the opening hops, later
// calls deliver the next queued event. Throws InvalidArgument once Done.
void step(UpdateRound& round, Engine& engine);

// Steps until Done and returns the completion time.
VirtualTime run_round(UpdateRound& round, Engine& engine);

}  // namespace nbsim

#endif  // NBSIM_UPDATE_ROUND_HPP_
