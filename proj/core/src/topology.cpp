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

#include "nbsim/topology.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "nbsim/error.hpp"

namespace nbsim {
namespace {

bool by_address(const NodeRecord& a, const NodeRecord& b) {
  return a.address < b.address;
}

auto lower(std::vector<NodeRecord>& members, NodeAddress a) {
  return std::lower_bound(
      members.begin(), members.end(), a,
      [](const NodeRecord& r, NodeAddress x) { return r.address < x; });
}

auto lower(const std::vector<NodeRecord>& members, NodeAddress a) {
  return std::lower_bound(
      members.begin(), members.end(), a,
      [](const NodeRecord& r, NodeAddress x) { return r.address < x; });
}

ClusterPlan chunk(std::vector<NodeAddress> sorted, std::size_t cluster_size) {
  if (cluster_size == 0) throw InvalidArgument("cluster_size must be >= 1");
  if (sorted.empty()) throw NoActiveInstances();
  ClusterPlan plan;
  plan.cluster_size = cluster_size;
  for (std::size_t i = 0; i < sorted.size(); i += cluster_size) {
    const auto end = std::min(sorted.size(), i + cluster_size);
    plan.clusters.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                               sorted.begin() + static_cast<std::ptrdiff_t>(end));
    plan.leaders.push_back(sorted[i]);
  }
  plan.head_leader = plan.leaders.front();
  return plan;
}

}  // namespace

void NodeRecord::validate() const {
  if (!(uptime_fraction >= 0.0 && uptime_fraction <= 1.0)) {
    throw InvalidArgument("uptime_fraction of " + address.to_string() +
                          " outside [0,1]");
  }
  if (!(link_capacity_bps > 0.0)) {
    throw InvalidArgument("link capacity of " + address.to_string() +
                          " must be positive");
  }
  if (!(metric >= 0.0)) {
    throw InvalidArgument("metric of " + address.to_string() +
                          " must be non-negative");
  }
}

NeighborhoodMap::NeighborhoodMap(std::vector<NodeRecord> members,
                                 std::vector<NodeAddress> remote_routers)
    : members_(std::move(members)), remote_routers_(std::move(remote_routers)) {
  for (const auto& m : members_) m.validate();
  std::sort(members_.begin(), members_.end(), by_address);
  auto dup = std::adjacent_find(
      members_.begin(), members_.end(),
      [](const NodeRecord& a, const NodeRecord& b) {
        return a.address == b.address;
      });
  if (dup != members_.end()) {
    throw DuplicateAddress("duplicate member " + dup->address.to_string());
  }
  std::sort(remote_routers_.begin(), remote_routers_.end());
  remote_routers_.erase(
      std::unique(remote_routers_.begin(), remote_routers_.end()),
      remote_routers_.end());
}

std::size_t NeighborhoodMap::active_count() const {
  return static_cast<std::size_t>(std::count_if(
      members_.begin(), members_.end(),
      [](const NodeRecord& r) { return r.active; }));
}

std::vector<NodeAddress> NeighborhoodMap::active_addresses() const {
  std::vector<NodeAddress> out;
  for (const auto& m : members_) {
    if (m.active) out.push_back(m.address);
  }
  return out;
}

std::vector<NodeAddress> NeighborhoodMap::addresses() const {
  std::vector<NodeAddress> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.address);
  return out;
}

bool NeighborhoodMap::contains(NodeAddress a) const {
  return find(a) != nullptr;
}

const NodeRecord* NeighborhoodMap::find(NodeAddress a) const {
  auto it = lower(members_, a);
  return it != members_.end() && it->address == a ? &*it : nullptr;
}

const NodeRecord& NeighborhoodMap::at(NodeAddress a) const {
  if (const auto* r = find(a)) return *r;
  throw NotAMember(a.to_string() + " is not a neighborhood member");
}

void NeighborhoodMap::upsert(NodeRecord rec) {
  rec.validate();
  auto it = lower(members_, rec.address);
  if (it != members_.end() && it->address == rec.address) {
    *it = std::move(rec);
  } else {
    members_.insert(it, std::move(rec));
  }
  ++version_;
}

bool NeighborhoodMap::erase(NodeAddress a) {
  auto it = lower(members_, a);
  if (it == members_.end() || it->address != a) return false;
  members_.erase(it);
  ++version_;
  return true;
}

void NeighborhoodMap::set_active(NodeAddress a, bool active) {
  auto it = lower(members_, a);
  if (it == members_.end() || it->address != a) {
    throw NotAMember(a.to_string() + " is not a neighborhood member");
  }
  it->active = active;
  ++version_;
}

void NeighborhoodMap::add_remote_router(NodeAddress router) {
  auto it = std::lower_bound(remote_routers_.begin(), remote_routers_.end(),
                             router);
  if (it != remote_routers_.end() && *it == router) return;
  remote_routers_.insert(it, router);
  ++version_;
}

bool NeighborhoodMap::remove_remote_router(NodeAddress router) {
  auto it = std::lower_bound(remote_routers_.begin(), remote_routers_.end(),
                             router);
  if (it == remote_routers_.end() || *it != router) return false;
  remote_routers_.erase(it);
  ++version_;
  return true;
}

std::size_t ClusterPlan::member_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.size();
  return n;
}

std::vector<NodeAddress> ClusterPlan::members() const {
  std::vector<NodeAddress> out;
  out.reserve(member_count());
  for (const auto& c : clusters) out.insert(out.end(), c.begin(), c.end());
  return out;
}

ClusterPlan form_clusters(const NeighborhoodMap& map,
                          std::size_t cluster_size) {
  // Members are already sorted and unique.
  return chunk(map.active_addresses(), cluster_size);
}

ClusterPlan form_clusters(std::span<const NodeAddress> addresses,
                          std::size_t cluster_size) {
  std::vector<NodeAddress> sorted(addresses.begin(), addresses.end());
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end());
      dup != sorted.end()) {
    throw DuplicateAddress("duplicate member " + dup->to_string());
  }
  return chunk(std::move(sorted), cluster_size);
}

std::size_t cluster_of(NodeAddress a, const ClusterPlan& plan) {
  if (plan.cluster_size == 0 || plan.clusters.empty()) {
    throw NotAMember(a.to_string() + " is not in an empty plan");
  }
  // Leaders are ascending; the owning cluster starts at the last leader <= a.
  auto it = std::upper_bound(plan.leaders.begin(), plan.leaders.end(), a);
  if (it == plan.leaders.begin()) {
    throw NotAMember(a.to_string() + " is not a cluster member");
  }
  const auto index =
      static_cast<std::size_t>(std::distance(plan.leaders.begin(), it)) - 1;
  const auto& members = plan.clusters[index];
  if (!std::binary_search(members.begin(), members.end(), a)) {
    throw NotAMember(a.to_string() + " is not a cluster member");
  }
  return index;
}

std::pair<NeighborhoodMap, NeighborhoodMap> split_at(
    const NeighborhoodMap& map, std::size_t lower_size) {
  const auto mid = map.members_.begin() + static_cast<std::ptrdiff_t>(lower_size);
  NeighborhoodMap low;
  NeighborhoodMap high;
  low.members_.assign(map.members_.begin(), mid);
  high.members_.assign(mid, map.members_.end());
  low.remote_routers_ = high.remote_routers_ = map.remote_routers_;
  low.version_ = high.version_ = map.version_ + 1;
  return {std::move(low), std::move(high)};
}

std::optional<std::pair<NeighborhoodMap, NeighborhoodMap>> subdivide(
    const NeighborhoodMap& map, std::size_t critical_mass) {
  if (critical_mass == 0) throw InvalidArgument("critical_mass must be >= 1");
  if (map.size() <= critical_mass) return std::nullopt;
  return split_at(map, (map.size() + 1) / 2);
}

std::vector<NeighborhoodMap> subdivide_all(const NeighborhoodMap& map,
                                           std::size_t critical_mass) {
  std::vector<NeighborhoodMap> done;
  std::vector<NeighborhoodMap> work{map};
  while (!work.empty()) {
    NeighborhoodMap next = std::move(work.back());
    work.pop_back();
    if (auto halves = subdivide(next, critical_mass)) {
      // Push high first so the lower half is processed first.
      work.push_back(std::move(halves->second));
      work.push_back(std::move(halves->first));
    } else {
      done.push_back(std::move(next));
    }
  }
  return done;
}

void RouterCriteria::validate() const {
  if (min_clients == 0 || !(min_uptime_fraction > 0.0) ||
      !(min_capacity_bps > 0.0)) {
    throw ConfigError("router criteria thresholds must be positive");
  }
}

RouterEligibility router_eligibility(const NodeRecord& rec,
                                     const NeighborhoodMap& map,
                                     const RouterCriteria& criteria) {
  if (!map.contains(rec.address)) {
    throw NotAMember(rec.address.to_string() + " is not a neighborhood member");
  }
  RouterEligibility out;
  out.score = {rec.uptime_fraction, rec.link_capacity_bps, -rec.metric};
  out.eligible = map.active_count() >= criteria.min_clients &&
                 rec.uptime_fraction >= criteria.min_uptime_fraction &&
                 rec.link_capacity_bps >= criteria.min_capacity_bps;
  return out;
}

std::vector<NodeAddress> router_succession(const NeighborhoodMap& map,
                                           const RouterCriteria& criteria) {
  std::vector<std::pair<RouterScore, NodeAddress>> pool;
  for (const auto& m : map.members()) {
    if (!m.active) continue;
    auto e = router_eligibility(m, map, criteria);
    if (e.eligible) pool.emplace_back(e.score, m.address);
  }
  std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<NodeAddress> out;
  out.reserve(pool.size());
  for (const auto& p : pool) out.push_back(p.second);
  return out;
}

std::optional<NodeAddress> elect_router(const NeighborhoodMap& map,
                                        const RouterCriteria& criteria) {
  auto line = router_succession(map, criteria);
  if (line.empty()) return std::nullopt;
  return line.front();
}

RouterMonitor::RouterMonitor(RouterCriteria criteria, VirtualTime beacon_timeout)
    : criteria_(criteria), timeout_(beacon_timeout) {
  criteria_.validate();
  if (timeout_.units == 0) throw ConfigError("beacon timeout must be positive");
}

std::optional<VirtualTime> RouterMonitor::beacon_expiry() const {
  if (!router_) return std::nullopt;
  return last_beacon_ + timeout_;
}

bool RouterMonitor::holding_back(VirtualTime now) const {
  if (lapsed_ || awaiting_beacon_) return true;
  return router_ && now > last_beacon_ + timeout_;
}

std::optional<NodeAddress> RouterMonitor::ensure_router(
    const NeighborhoodMap& map, VirtualTime now) {
  if (router_) return std::nullopt;
  router_ = elect_router(map, criteria_);
  if (!router_) return std::nullopt;
  last_beacon_ = now;
  awaiting_beacon_ = true;
  lapsed_ = false;
  return router_;
}

bool RouterMonitor::on_beacon(NodeAddress from, VirtualTime now) {
  if (!router_ || *router_ != from) return false;
  last_beacon_ = now;
  awaiting_beacon_ = false;
  return true;
}

std::optional<RouterMonitor::Handover> RouterMonitor::check(
    NeighborhoodMap& map, VirtualTime now) {
  if (!router_ || now <= last_beacon_ + timeout_) return std::nullopt;
  Handover h{*router_, std::nullopt};
  if (map.contains(h.failed)) map.set_active(h.failed, false);
  router_ = elect_router(map, criteria_);
  h.replacement = router_;
  last_beacon_ = now;
  awaiting_beacon_ = router_.has_value();
  lapsed_ = !router_.has_value();
  return h;
}

std::vector<NodeRecord> parse_address_plan(std::istream& in) {
  std::vector<NodeRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string addr;
    if (!(fields >> addr)) continue;
    NodeRecord rec;
    auto parsed = NodeAddress::try_parse(addr);
    if (!parsed) throw ParseError(line_no, "malformed address '" + addr + "'");
    rec.address = *parsed;
    if (!(fields >> rec.domain >> rec.uptime_fraction >>
          rec.link_capacity_bps >> rec.metric)) {
      throw ParseError(line_no,
                       "expected `address domain uptime capacity metric`");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(line_no, "trailing field '" + extra + "'");
    try {
      rec.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_address_plan(std::ostream& out,
                        std::span<const NodeRecord> records) {
  for (const auto& r : records) {
    out << r.address << ' ' << r.domain << ' ' << r.uptime_fraction << ' '
        << r.link_capacity_bps << ' ' << r.metric << '\n';
  }
}

}  // namespace nbsim
