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

#include <algorithm>
#include <utility>

#include "nbsim/error.hpp"

namespace nbsim {
namespace {

constexpr std::size_t index_of(RoundPhase p) {
  return static_cast<std::size_t>(p);
}

constexpr int kRefShift = 40;

}  // namespace

std::string_view to_string(RoundPhase p) {
  switch (p) {
    case RoundPhase::kIntraForward: return "intra-forward";
    case RoundPhase::kIntraReverse: return "intra-reverse";
    case RoundPhase::kLeaderRing: return "leader-ring";
    case RoundPhase::kRedistribute: return "redistribute";
    case RoundPhase::kDone: return "done";
  }
  return "?";
}

UpdateRound::UpdateRound(ClusterPlan plan,
                         std::map<NodeAddress, AttributeList> lists,
                         std::uint32_t round_id)
    : plan_(std::move(plan)), id_(round_id) {
  if (plan_.clusters.empty()) throw ConfigError("round needs a non-empty plan");
  for (const auto& chain : plan_.clusters) {
    Cluster c;
    c.chain = chain;
    for (auto m : chain) {
      auto it = lists.find(m);
      if (it == lists.end()) {
        throw ConfigError("member " + m.to_string() + " has no attribute list");
      }
      initial_.emplace(m, it->second);
    }
    clusters_.push_back(std::move(c));
  }
  held_ = initial_;
}

RoundPhase UpdateRound::phase() const {
  if (phase_ != RoundPhase::kIntraForward) return phase_;
  // Intra phases are tracked per cluster; the round reports the earliest.
  bool any_reverse = false;
  for (const auto& c : clusters_) {
    if (c.stage == RoundPhase::kIntraForward) return RoundPhase::kIntraForward;
    if (c.stage == RoundPhase::kIntraReverse) any_reverse = true;
  }
  return any_reverse ? RoundPhase::kIntraReverse : RoundPhase::kIntraForward;
}

void UpdateRound::set_live(NodeAddress member, bool live) {
  if (live) {
    down_.erase(member);
  } else {
    down_.insert(member);
  }
}

const AttributeList& UpdateRound::list_of(NodeAddress member) const {
  auto it = held_.find(member);
  if (it == held_.end()) {
    throw NotAMember(member.to_string() + " is not part of this round");
  }
  return it->second;
}

const AttributeList& UpdateRound::cluster_list(std::size_t c) const {
  return clusters_.at(c).final_list;
}

std::size_t UpdateRound::cluster_cursor(std::size_t c) const {
  return clusters_.at(c).cursor;
}

RoundPhase UpdateRound::cluster_stage(std::size_t c) const {
  return clusters_.at(c).stage;
}

std::size_t UpdateRound::messages_sent() const {
  std::size_t n = 0;
  for (auto s : sent_) n += s;
  return n;
}

std::size_t UpdateRound::messages_in(RoundPhase p) const {
  return sent_[index_of(p)];
}

std::optional<std::size_t> UpdateRound::next_live(
    const std::vector<NodeAddress>& chain, std::size_t from, Dir dir) {
  if (dir == Dir::kUp) {
    for (std::size_t i = from + 1; i < chain.size(); ++i) {
      if (live(chain[i])) return i;
      stale_.insert(chain[i]);
    }
  } else {
    for (std::size_t i = from; i-- > 0;) {
      if (live(chain[i])) return i;
      stale_.insert(chain[i]);
    }
  }
  return std::nullopt;
}

void UpdateRound::send(Engine& engine, RoundPhase phase, std::size_t lane,
                       std::size_t from, std::size_t to,
                       AttributeList payload) {
  const auto& chain =
      phase == RoundPhase::kLeaderRing ? ring_ : clusters_[lane].chain;
  const std::uint64_t ref = (std::uint64_t{id_} << kRefShift) | next_msg_++;
  in_flight_.emplace(ref, InFlight{phase, lane, from, to, std::move(payload)});
  ++sent_[index_of(phase)];
  engine.send(chain[from], chain[to], kChannel, ref,
              std::string(to_string(phase)));
}

void UpdateRound::begin(Engine& engine) {
  if (started_) throw InvalidArgument("round already started");
  started_ = true;
  pending_clusters_ = clusters_.size();
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    auto& cl = clusters_[c];
    std::optional<std::size_t> first =
        live(cl.chain[0]) ? std::optional<std::size_t>{0}
                          : next_live(cl.chain, 0, Dir::kUp);
    if (!first) {
      // Nobody left to speak for this cluster.
      cl.stage = RoundPhase::kDone;
      --pending_clusters_;
      continue;
    }
    cl.cursor = *first;
    cl.acc = initial_.at(cl.chain[*first]);
    if (auto to = next_live(cl.chain, *first, Dir::kUp)) {
      send(engine, RoundPhase::kIntraForward, c, *first, *to, cl.acc);
    } else {
      forward_reached_top(engine, c, *first, cl.acc);
    }
  }
  if (pending_clusters_ == 0) start_ring(engine);
}

void UpdateRound::forward_reached_top(Engine& engine, std::size_t c,
                                      std::size_t pos, AttributeList acc) {
  auto& cl = clusters_[c];
  cl.final_list = std::move(acc);
  cl.cursor = pos;
  held_[cl.chain[pos]] = cl.final_list;
  if (auto to = next_live(cl.chain, pos, Dir::kDown)) {
    cl.stage = RoundPhase::kIntraReverse;
    send(engine, RoundPhase::kIntraReverse, c, pos, *to, cl.final_list);
  } else {
    cluster_done(engine, c, pos);
  }
}

void UpdateRound::cluster_done(Engine& engine, std::size_t c,
                               std::size_t leader_pos) {
  auto& cl = clusters_[c];
  cl.stage = RoundPhase::kDone;
  cl.cursor = leader_pos;
  cl.leader_pos = leader_pos;
  if (--pending_clusters_ == 0) start_ring(engine);
}

void UpdateRound::start_ring(Engine& engine) {
  phase_ = RoundPhase::kLeaderRing;
  ring_.clear();
  ring_cluster_.clear();
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    if (clusters_[c].leader_pos) {
      ring_.push_back(clusters_[c].chain[*clusters_[c].leader_pos]);
      ring_cluster_.push_back(c);
    }
  }
  if (ring_.empty()) {
    ring_done(engine);
    return;
  }
  AttributeList acc = clusters_[ring_cluster_[0]].final_list;
  if (auto to = next_live(ring_, 0, Dir::kUp)) {
    send(engine, RoundPhase::kLeaderRing, 0, 0, *to, std::move(acc));
  } else {
    ring_reached_top(engine, 0, std::move(acc));
  }
}

void UpdateRound::ring_reached_top(Engine& engine, std::size_t pos,
                                   AttributeList acc) {
  final_ = std::move(acc);
  held_[ring_[pos]] = final_;
  if (auto to = next_live(ring_, pos, Dir::kDown)) {
    send(engine, RoundPhase::kLeaderRing, pos, pos, *to, final_);
  } else {
    ring_done(engine);
  }
}

void UpdateRound::ring_done(Engine& engine) {
  phase_ = RoundPhase::kRedistribute;
  pending_clusters_ = 0;
  for (std::size_t i = 0; i < ring_.size(); ++i) {
    const auto c = ring_cluster_[i];
    if (!live(ring_[i])) continue;  // skipped leader: its cluster keeps the
                                    // cluster-level list
    auto& cl = clusters_[c];
    held_[ring_[i]] = final_;
    cl.stage = RoundPhase::kRedistribute;
    ++pending_clusters_;
  }
  if (pending_clusters_ == 0) {
    phase_ = RoundPhase::kDone;
    finished_at_ = engine.now();
    return;
  }
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    auto& cl = clusters_[c];
    if (cl.stage != RoundPhase::kRedistribute) continue;
    if (auto to = next_live(cl.chain, *cl.leader_pos, Dir::kUp)) {
      send(engine, RoundPhase::kRedistribute, c, *cl.leader_pos, *to, final_);
    } else {
      redistribute_done(engine, c);
    }
  }
}

void UpdateRound::redistribute_done(Engine& engine, std::size_t c) {
  clusters_[c].stage = RoundPhase::kDone;
  if (--pending_clusters_ == 0) {
    phase_ = RoundPhase::kDone;
    finished_at_ = engine.now();
  }
}

bool UpdateRound::deliver(const SimEvent& ev, Engine& engine) {
  if (ev.kind != EventKind::kMessageDelivery || ev.channel != kChannel ||
      (ev.ref >> kRefShift) != id_) {
    return false;
  }
  auto node = in_flight_.extract(ev.ref);
  if (node.empty()) return false;
  InFlight msg = std::move(node.mapped());

  if (msg.phase == RoundPhase::kLeaderRing) {
    const bool ascending = msg.to > msg.from;
    auto to = msg.to;
    if (!live(ring_[to])) {
      // Lost hop: the sender moves on past the dead leader.
      stale_.insert(ring_[to]);
      auto next = next_live(ring_, to, ascending ? Dir::kUp : Dir::kDown);
      if (next) {
        send(engine, RoundPhase::kLeaderRing, msg.from, msg.from, *next,
             std::move(msg.payload));
      } else if (ascending) {
        ring_reached_top(engine, msg.from, std::move(msg.payload));
      } else {
        ring_done(engine);
      }
      return true;
    }
    if (ascending) {
      AttributeList acc = merge_lists(msg.payload,
                                      clusters_[ring_cluster_[to]].final_list);
      if (auto next = next_live(ring_, to, Dir::kUp)) {
        send(engine, RoundPhase::kLeaderRing, to, to, *next, std::move(acc));
      } else {
        ring_reached_top(engine, to, std::move(acc));
      }
    } else {
      held_[ring_[to]] = final_;
      if (auto next = next_live(ring_, to, Dir::kDown)) {
        send(engine, RoundPhase::kLeaderRing, to, to, *next, final_);
      } else {
        ring_done(engine);
      }
    }
    return true;
  }

  const auto c = msg.lane;
  auto& cl = clusters_[c];
  const auto target = cl.chain[msg.to];
  const bool target_live = live(target);
  if (!target_live) stale_.insert(target);

  switch (msg.phase) {
    case RoundPhase::kIntraForward: {
      if (!target_live) {
        if (auto next = next_live(cl.chain, msg.to, Dir::kUp)) {
          send(engine, RoundPhase::kIntraForward, c, msg.from, *next,
               std::move(msg.payload));
        } else {
          forward_reached_top(engine, c, msg.from, std::move(msg.payload));
        }
        break;
      }
      cl.cursor = msg.to;
      AttributeList acc = merge_lists(msg.payload, initial_.at(target));
      if (auto next = next_live(cl.chain, msg.to, Dir::kUp)) {
        send(engine, RoundPhase::kIntraForward, c, msg.to, *next,
             std::move(acc));
      } else {
        forward_reached_top(engine, c, msg.to, std::move(acc));
      }
      break;
    }
    case RoundPhase::kIntraReverse: {
      const auto holder = target_live ? msg.to : msg.from;
      if (target_live) {
        cl.cursor = msg.to;
        held_[target] = cl.final_list;
      }
      if (auto next = next_live(cl.chain, msg.to, Dir::kDown)) {
        send(engine, RoundPhase::kIntraReverse, c, holder, *next,
             cl.final_list);
      } else {
        cluster_done(engine, c, holder);
      }
      break;
    }
    case RoundPhase::kRedistribute: {
      const auto holder = target_live ? msg.to : msg.from;
      if (target_live) {
        cl.cursor = msg.to;
        held_[target] = final_;
      }
      if (auto next = next_live(cl.chain, msg.to, Dir::kUp)) {
        send(engine, RoundPhase::kRedistribute, c, holder, *next, final_);
      } else {
        redistribute_done(engine, c);
      }
      break;
    }
    default:
      break;
  }
  return true;
}

UpdateRound start_round(const ClusterPlan& plan,
                        const std::map<NodeAddress, AttributeList>& lists,
                        std::uint32_t round_id) {
  return UpdateRound(plan, lists, round_id);
}

void step(UpdateRound& round, Engine& engine) {
  if (round.phase() == RoundPhase::kDone) {
    throw InvalidArgument("round already done");
  }
  if (!round.started()) {
    round.begin(engine);
    return;
  }
  while (auto ev = engine.pop()) {
    if (round.deliver(*ev, engine)) return;
  }
  throw InvalidArgument("round stalled: no pending messages");
}

VirtualTime run_round(UpdateRound& round, Engine& engine) {
  while (round.phase() != RoundPhase::kDone) step(round, engine);
  return round.finished_at().value_or(engine.now());
}

}  // namespace nbsim
