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

#ifndef NBSIM_TOPOLOGY_HPP_
#define NBSIM_TOPOLOGY_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nbsim/address.hpp"
#include "nbsim/simcore.hpp"

namespace nbsim {

struct NodeRecord {
  NodeAddress address;
  std::string domain;
  double uptime_fraction = 1.0;
  double link_capacity_bps = 128'000.0;
  bool active = true;
  // Network distance from the neighborhood router. Opaque, non-negative.
  double metric = 0.0;

  // Throws InvalidArgument on uptime outside [0,1], non-positive capacity
  // or negative metric.
  void validate() const;
};

// Membership snapshot of one neighborhood: records strictly sorted by
// address plus the routers of other neighborhoods. Every mutation bumps
// `version()`.
class NeighborhoodMap {
 public:
  NeighborhoodMap() = default;
  // Sorts `members`; throws DuplicateAddress on a repeated address.
  explicit NeighborhoodMap(std::vector<NodeRecord> members,
                           std::vector<NodeAddress> remote_routers = {});

  const std::vector<NodeRecord>& members() const { return members_; }
  const std::vector<NodeAddress>& remote_routers() const {
    return remote_routers_;
  }
  std::uint64_t version() const { return version_; }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::size_t active_count() const;
  std::vector<NodeAddress> active_addresses() const;
  std::vector<NodeAddress> addresses() const;

  bool contains(NodeAddress a) const;
  const NodeRecord* find(NodeAddress a) const;
  // Throws NotAMember.
  const NodeRecord& at(NodeAddress a) const;

  // Inserts or replaces the record with the same address.
  void upsert(NodeRecord rec);
  bool erase(NodeAddress a);
  // Throws NotAMember.
  void set_active(NodeAddress a, bool active);
  void add_remote_router(NodeAddress router);
  bool remove_remote_router(NodeAddress router);

 private:
  std::vector<NodeRecord> members_;
  std::vector<NodeAddress> remote_routers_;
  std::uint64_t version_ = 0;

  friend std::pair<NeighborhoodMap, NeighborhoodMap> split_at(
      const NeighborhoodMap&, std::size_t);
};

// Deterministic partition of the sorted active members into contiguous
// chunks; every chunk is led by its lowest address.
struct ClusterPlan {
  std::size_t cluster_size = 0;
  std::vector<std::vector<NodeAddress>> clusters;
  std::vector<NodeAddress> leaders;
  NodeAddress head_leader;

  std::size_t member_count() const;
  // Concatenation of `clusters`, i.e. the sorted member list.
  std::vector<NodeAddress> members() const;
};

// Throws NoActiveInstances when no member is active and InvalidArgument
// when cluster_size is zero.
ClusterPlan form_clusters(const NeighborhoodMap& map, std::size_t cluster_size);
// Same rule over a bare address list in any order. Throws DuplicateAddress.
ClusterPlan form_clusters(std::span<const NodeAddress> addresses,
                          std::size_t cluster_size);

// Index of the cluster holding `a`, from the sorted member list alone.
// Throws NotAMember.
std::size_t cluster_of(NodeAddress a, const ClusterPlan& plan);

// Splits at the sorted midpoint; the lower-address half takes the extra
// member of an odd count. Returns nothing when size() <= critical_mass.
std::optional<std::pair<NeighborhoodMap, NeighborhoodMap>> subdivide(
    const NeighborhoodMap& map, std::size_t critical_mass);

// Repeatedly subdivides until every piece is at or below critical_mass.
std::vector<NeighborhoodMap> subdivide_all(const NeighborhoodMap& map,
                                           std::size_t critical_mass);

struct RouterCriteria {
  std::size_t min_clients = 100;
  double min_uptime_fraction = 0.9;
  double min_capacity_bps = 128'000.0;

  // Throws ConfigError unless every threshold is positive.
  void validate() const;
};

// Ranking key: higher uptime, then higher capacity, then lower metric.
struct RouterScore {
  double uptime_fraction = 0.0;
  double capacity_bps = 0.0;
  double negated_metric = 0.0;

  friend auto operator<=>(const RouterScore&, const RouterScore&) = default;
};

struct RouterEligibility {
  bool eligible = false;
  RouterScore score;
};

// Throws NotAMember when rec is not in map.
RouterEligibility router_eligibility(const NodeRecord& rec,
                                     const NeighborhoodMap& map,
                                     const RouterCriteria& criteria);

// Eligible active members, best first: descending score, ties by ascending
// address. The head is the router; the rest is the failover line.
std::vector<NodeAddress> router_succession(const NeighborhoodMap& map,
                                           const RouterCriteria& criteria);

std::optional<NodeAddress> elect_router(const NeighborhoodMap& map,
                                        const RouterCriteria& criteria);

// Beacon-driven router replacement. The current router refreshes a beacon
// attribute; nobody else takes over while it is fresh. Once it lapses the
// router is marked inactive in the map, router-mediated traffic holds back,
// and the next in the succession line assumes the role.
class RouterMonitor {
 public:
  RouterMonitor(RouterCriteria criteria, VirtualTime beacon_timeout);

  const std::optional<NodeAddress>& router() const { return router_; }
  VirtualTime beacon_timeout() const { return timeout_; }
  std::optional<VirtualTime> beacon_expiry() const;

  // Clients hold back router-mediated traffic while this is true.
  bool holding_back(VirtualTime now) const;

  // Installs the elected router if none is set. Returns the new router.
  std::optional<NodeAddress> ensure_router(const NeighborhoodMap& map,
                                           VirtualTime now);

  // Records a beacon from `from`. Beacons from non-routers are ignored.
  bool on_beacon(NodeAddress from, VirtualTime now);

  // Detects beacon expiry: marks the lapsed router inactive in `map` and
  // elects its replacement. Returns the replacement, if a handover happened.
  struct Handover {
    NodeAddress failed;
    std::optional<NodeAddress> replacement;
  };
  std::optional<Handover> check(NeighborhoodMap& map, VirtualTime now);

 private:
  RouterCriteria criteria_;
  VirtualTime timeout_;
  std::optional<NodeAddress> router_;
  VirtualTime last_beacon_;
  bool awaiting_beacon_ = false;
  bool lapsed_ = false;
};

// Address-plan file: one `address domain uptime capacity metric` record per
// line; blank lines and `#` comments are skipped. Throws ParseError.
std::vector<NodeRecord> parse_address_plan(std::istream& in);
void write_address_plan(std::ostream& out, std::span<const NodeRecord> records);

}  // namespace nbsim

#endif  // NBSIM_TOPOLOGY_HPP_
