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

#ifndef NBSIM_DISCOVERY_HPP_
#define NBSIM_DISCOVERY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nbsim/address.hpp"
#include "nbsim/simcore.hpp"
#include "nbsim/topology.hpp"

namespace nbsim {

inline constexpr std::size_t kDefaultExcerptCap = 16;

struct DownloadRecord {
  NodeAddress address;
  std::string domain;
  VirtualTime at;
};

struct ExcerptEntry {
  NodeAddress address;
  std::string domain;

  friend bool operator==(const ExcerptEntry&, const ExcerptEntry&) = default;
};

// Directory entries bundled with a download: the nearest earlier
// registrants, closest first.
struct DirectoryExcerpt {
  std::vector<ExcerptEntry> entries;
};

// The download site's append-only log of who fetched the application.
class DownloadRegistry {
 public:
  explicit DownloadRegistry(std::size_t excerpt_cap = kDefaultExcerptCap);

  // Appends a record and returns the excerpt of the `excerpt_cap` prior
  // registrants nearest by address distance (ties: lower address). Throws
  // InvalidArgument when `at` precedes the latest record.
  DirectoryExcerpt register_download(NodeAddress address, std::string domain,
                                     VirtualTime at);

  const std::vector<DownloadRecord>& records() const { return records_; }
  std::size_t excerpt_cap() const { return cap_; }

 private:
  std::size_t cap_;
  std::vector<DownloadRecord> records_;
};

struct AdvertisedRecord {
  NodeAddress address;
  std::string domain;
  bool is_router = false;
};

// Stand-in for the nominated web search engines. Routers stay advertised;
// ordinary clients leave once a router has mapped them.
class SearchEngineDirectory {
 public:
  void advertise(NodeAddress address, std::string domain,
                 bool is_router = false);
  // Removes a non-router record. Returns false for routers and unknowns.
  bool deregister(NodeAddress address);
  void set_router(NodeAddress address, bool is_router);

  const AdvertisedRecord* find(NodeAddress address) const;
  const std::map<NodeAddress, AdvertisedRecord>& records() const {
    return records_;
  }
  std::vector<AdvertisedRecord> routers() const;

 private:
  std::map<NodeAddress, AdvertisedRecord> records_;
};

struct Introduction {
  std::uint64_t id = 0;
  NodeAddress sender;
  NodeAddress target;
  std::string payload;
  VirtualTime deadline;
};

enum class IntroductionOutcome : std::uint8_t { kDelivered, kExpired };

struct ResolvedIntroduction {
  Introduction intro;
  IntroductionOutcome outcome;
  VirtualTime at;
};

// Sender-side buffer for introductions to offline instances. Every record
// resolves exactly once: delivered when its target comes back by the
// deadline, or expired after it.
class IntroductionQueue {
 public:
  std::uint64_t enqueue(NodeAddress sender, NodeAddress target,
                        std::string payload, VirtualTime deadline);
  bool has_pending(NodeAddress sender, NodeAddress target) const;

  // Target re-instantiated: hands over everything still in date and
  // expires the rest addressed to it.
  std::vector<ResolvedIntroduction> on_reactivate(NodeAddress target,
                                                  VirtualTime now);
  // Expires every record whose deadline is before `now`.
  std::vector<ResolvedIntroduction> expire(VirtualTime now);

  const std::map<std::uint64_t, Introduction>& pending() const {
    return pending_;
  }
  const std::vector<ResolvedIntroduction>& resolved() const {
    return resolved_;
  }

 private:
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, Introduction> pending_;
  std::vector<ResolvedIntroduction> resolved_;
};

struct DiscoveryConfig {
  std::size_t excerpt_cap = kDefaultExcerptCap;
  // 10 periods of the `moderate` class at zero metric.
  VirtualTime intro_timeout{500};
  RouterCriteria router_criteria;
  VirtualTime beacon_timeout{15};
};

struct InstanceState {
  NodeRecord record;
  bool running = true;
  bool isolated = false;
};

// The simulated world the discovery procedures act on: running instances,
// neighborhoods with their router monitors, and the shared registries.
class Deployment {
 public:
  struct Neighborhood {
    NeighborhoodMap map;
    RouterMonitor monitor;
    bool retired = false;
  };

  explicit Deployment(DiscoveryConfig config = {});

  const DiscoveryConfig& config() const { return config_; }
  DownloadRegistry& registry() { return registry_; }
  const DownloadRegistry& registry() const { return registry_; }
  SearchEngineDirectory& directory() { return directory_; }
  const SearchEngineDirectory& directory() const { return directory_; }
  IntroductionQueue& introductions() { return intros_; }
  const IntroductionQueue& introductions() const { return intros_; }

  // Adds (or re-adds) an instance in its own fresh neighborhood.
  std::size_t add_instance(NodeRecord record);
  bool has_instance(NodeAddress a) const { return instances_.contains(a); }
  const InstanceState& instance(NodeAddress a) const;
  InstanceState& instance(NodeAddress a);
  const std::map<NodeAddress, InstanceState>& instances() const {
    return instances_;
  }
  bool running(NodeAddress a) const;
  void set_running(NodeAddress a, bool running);

  std::optional<std::size_t> neighborhood_of(NodeAddress a) const;
  const Neighborhood& neighborhood(std::size_t i) const;
  Neighborhood& neighborhood(std::size_t i);
  std::size_t neighborhood_count() const { return hoods_.size(); }
  // Indices of neighborhoods still in use.
  std::vector<std::size_t> live_neighborhoods() const;
  std::optional<NodeAddress> router_of(std::size_t hood) const;

  // Moves `a` out of its current neighborhood into `hood`.
  void join(NodeAddress a, std::size_t hood);

  // Splits `hood` when it exceeds `critical_mass`; the upper half becomes a
  // new neighborhood. Returns its index.
  std::optional<std::size_t> subdivide(std::size_t hood,
                                       std::size_t critical_mass);

  // Elects a router for `hood` if it has none. Returns the new router.
  std::optional<NodeAddress> ensure_router(std::size_t hood, VirtualTime now);

 private:
  void detach(NodeAddress a);
  void reindex(std::size_t hood);

  DiscoveryConfig config_;
  DownloadRegistry registry_;
  SearchEngineDirectory directory_;
  IntroductionQueue intros_;
  std::map<NodeAddress, InstanceState> instances_;
  std::map<NodeAddress, std::size_t> hood_of_;
  std::vector<Neighborhood> hoods_;
};

// Free-function form over the registry.
DirectoryExcerpt register_download(DownloadRegistry& registry,
                                   NodeAddress address, std::string domain,
                                   VirtualTime at);

enum class JoinKind : std::uint8_t {
  kConnected,          // an excerpt neighbor accepted
  kViaRouter,          // found through an advertised router
  kAwaitingDiscovery,  // every contact failed; advertised and waiting
  kIsolated,           // nothing to try at all; advertised and waiting
};

std::string_view to_string(JoinKind k);

struct ConnectAttempt {
  NodeAddress target;
  bool success = false;
};

struct JoinOutcome {
  JoinKind kind = JoinKind::kIsolated;
  std::optional<NodeAddress> contact;
  std::vector<ConnectAttempt> attempts;
  // Introductions sent straight away, and ones queued for offline targets.
  std::vector<NodeAddress> introduced;
  std::vector<std::uint64_t> queued;
};

// Engine channels used by discovery traffic.
inline constexpr std::uint32_t kMapCopyChannel = 0x4d4150;
inline constexpr std::uint32_t kIntroChannel = 0x494e54;

// Joins `instance` to the overlay: excerpt contacts are tried nearest first;
// the first running one adds it to its neighborhood map and sends a map copy
// back, after which the newcomer introduces itself to the rest of the map.
// Dead contacts and dead map members get a queued introduction. If nobody
// answers, advertised routers are tried, and failing that the instance
// advertises itself and waits. Map copies and introductions travel as engine
// messages; outcome notes are appended to the engine trace.
JoinOutcome bootstrap(Deployment& world, NodeAddress instance,
                      const DirectoryExcerpt& excerpt, Engine& engine);

struct ScanResult {
  std::vector<NodeAddress> found;
  std::vector<NodeAddress> probed;
};

// Probes up to `budget` addresses of `range`, ascending from `start` and
// wrapping inside the range (from range.first when `start` lies outside).
// Finds running instances; a non-empty `domain` must also match. Throws
// InvalidArgument when budget is zero.
ScanResult neighborhood_scan(const Deployment& world, const std::string& domain,
                             AddressRange range, std::size_t budget,
                             NodeAddress start);

// The router pulls advertised, non-router instances inside `span` into its
// map and deregisters them. Throws InvalidArgument unless `router` is the
// current router of `hood`. Returns the updated map.
NeighborhoodMap router_refresh(Deployment& world, std::size_t hood,
                               NodeAddress router, AddressRange span,
                               std::vector<NodeAddress>* added = nullptr);

}  // namespace nbsim

#endif  // NBSIM_DISCOVERY_HPP_
