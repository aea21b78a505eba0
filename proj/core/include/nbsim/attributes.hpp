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

#ifndef NBSIM_ATTRIBUTES_HPP_
#define NBSIM_ATTRIBUTES_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nbsim/address.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/topology.hpp"

namespace nbsim {

enum class ScopeKind : std::uint8_t { kGroup, kLocal, kGlobal };

// Visibility of an attribute: a named group, the owner's neighborhood, or
// every neighborhood.
struct AttributeScope {
  ScopeKind kind = ScopeKind::kLocal;
  std::string group;  // kGroup only

  static AttributeScope local() { return {ScopeKind::kLocal, {}}; }
  static AttributeScope global() { return {ScopeKind::kGlobal, {}}; }
  static AttributeScope in_group(std::string id) {
    return {ScopeKind::kGroup, std::move(id)};
  }

  // Text form: `local`, `global` or `group:<id>`. Throws InvalidArgument.
  static AttributeScope parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const AttributeScope&,
                          const AttributeScope&) = default;
};

enum class UpdateClass : std::uint8_t { kAggressive, kModerate, kLight };

std::string_view to_string(UpdateClass c);
// Throws InvalidArgument.
UpdateClass parse_update_class(std::string_view text);

struct AttributeEntry {
  std::string key;
  AttributeScope scope;
  std::string value;
  std::uint64_t version = 1;
  NodeAddress owner;
  UpdateClass update_class = UpdateClass::kModerate;

  friend bool operator==(const AttributeEntry&,
                         const AttributeEntry&) = default;
};

// Conflict rule for two entries with the same (key, owner): the higher
// version wins; equal versions fall back to the lower owner, then the
// smaller (value, scope, class) so that the choice is a total order.
bool supersedes(const AttributeEntry& a, const AttributeEntry& b);

using AttributeKey = std::pair<std::string, NodeAddress>;

// At most one entry per (key, owner).
class AttributeList {
 public:
  using Map = std::map<AttributeKey, AttributeEntry>;

  // Owner-side change: accepted only when `e.version` is strictly newer.
  // Throws InvalidArgument if `e` would change the scope of an existing
  // entry.
  bool put(AttributeEntry e);

  // Gossip-side insert under the conflict rule. Returns true if `e` won.
  bool offer(const AttributeEntry& e);

  const AttributeEntry* find(const std::string& key, NodeAddress owner) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Map& entries() const { return entries_; }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  friend bool operator==(const AttributeList&, const AttributeList&) = default;

 private:
  Map entries_;
};

// Union over (key, owner) under `supersedes`. Commutative and associative.
AttributeList merge_lists(const AttributeList& a, const AttributeList& b);

// Attribute seed file: one `owner key scope class value` entry per line.
// The value is the rest of the line. Throws ParseError.
std::map<NodeAddress, AttributeList> parse_attribute_seeds(std::istream& in);

// ---------------------------------------------------------------------------
// Receipt-based commit.

enum class CommitState : std::uint8_t { kPending, kCommitted, kExpired };
enum class AckResult : std::uint8_t {
  kAccepted,
  kDuplicate,
  kNotAMember,
  kAfterResolution,
};

std::string_view to_string(CommitState s);

// A proposed attribute change that becomes visible only once every group
// member that was active at proposal time has returned a receipt, or the
// deadline passes. At the deadline the silent members are flagged offline
// and the change commits over the remaining actives. If the proposer itself
// drops out first the proposal expires uncommitted.
class PendingCommit {
 public:
  PendingCommit(NodeAddress proposer, std::vector<NodeAddress> group,
                std::string key, std::string value, VirtualTime now,
                VirtualTime deadline);

  AckResult ack(NodeAddress from, VirtualTime now);
  // Resolves the commit once `now` reaches the deadline. Returns true if
  // this call resolved it.
  bool tick(VirtualTime now);
  // Proposer went away before resolution.
  bool abandon(VirtualTime now);

  CommitState state() const { return state_; }
  bool committed() const { return state_ == CommitState::kCommitted; }
  bool resolved() const { return state_ != CommitState::kPending; }
  // The new value is only observable after commit.
  std::optional<std::string> visible_value() const;

  NodeAddress proposer() const { return proposer_; }
  const std::string& key() const { return key_; }
  const std::string& value() const { return value_; }
  const std::set<NodeAddress>& group() const { return group_; }
  const std::set<NodeAddress>& acks() const { return acks_; }
  // Members flagged offline by the timeout.
  const std::set<NodeAddress>& absentees() const { return absentees_; }
  VirtualTime deadline() const { return deadline_; }
  std::optional<VirtualTime> resolved_at() const { return resolved_at_; }

 private:
  void resolve(CommitState s, VirtualTime now);

  NodeAddress proposer_;
  std::set<NodeAddress> group_;
  std::string key_;
  std::string value_;
  VirtualTime deadline_;
  std::set<NodeAddress> acks_;
  std::set<NodeAddress> absentees_;
  CommitState state_ = CommitState::kPending;
  std::optional<VirtualTime> resolved_at_;
};

// `group` lists the members believed active; it must contain `proposer`,
// whose own receipt is implicit. Throws InvalidArgument otherwise.
PendingCommit propose_commit(NodeAddress proposer,
                             std::vector<NodeAddress> group, std::string key,
                             std::string value, VirtualTime now,
                             VirtualTime timeout);

// ---------------------------------------------------------------------------
// Update-frequency classes.

struct UpdatePeriodConfig {
  VirtualTime aggressive{10};
  VirtualTime moderate{50};
  VirtualTime light{250};
  double reference_metric = 100.0;
};

// base(class) * (1 + median(metrics) / reference_metric), rounded to the
// nearest unit. Throws InvalidArgument on empty or negative metrics.
VirtualTime update_period(UpdateClass cls, std::span<const double> metrics,
                          const UpdatePeriodConfig& config = {});

// ---------------------------------------------------------------------------
// Cross-neighborhood lookup by shared attribute.

struct NeighborhoodState {
  std::string name;
  NeighborhoodMap map;
  std::optional<NodeAddress> router;
  // Finalized attribute list held by each member.
  std::map<NodeAddress, AttributeList> lists;
};

struct Overlay {
  std::vector<NeighborhoodState> neighborhoods;

  std::optional<std::size_t> find_by_router(NodeAddress router) const;
};

struct AttributeMatch {
  NodeAddress instance;
  std::size_t neighborhood = 0;

  friend auto operator<=>(const AttributeMatch&,
                          const AttributeMatch&) = default;
};

struct RoutedConnection {
  NodeAddress requester;
  std::optional<NodeAddress> local_router;
  NodeAddress remote_router;
  NodeAddress target;

  friend bool operator==(const RoutedConnection&,
                         const RoutedConnection&) = default;
};

struct LookupResult {
  std::vector<AttributeMatch> matches;
  std::vector<RoutedConnection> connections;
  // Remote neighborhoods could not be consulted.
  bool partial = false;
};

// Finds every instance (other than `requester`) whose attribute (key, value)
// appears in the finalized lists of its neighborhood. Remote neighborhoods
// are reached through the origin's remote-router list and never expose
// local-scope attributes. Throws InvalidArgument when the origin has
// neither a router nor members.
LookupResult lookup_by_attribute(const Overlay& overlay, std::size_t origin,
                                 NodeAddress requester, const std::string& key,
                                 const std::string& value);

}  // namespace nbsim

#endif  // NBSIM_ATTRIBUTES_HPP_
