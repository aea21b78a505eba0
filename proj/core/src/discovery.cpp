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

#include "nbsim/discovery.hpp"

#include <algorithm>
#include <utility>

#include "nbsim/error.hpp"

namespace nbsim {

DownloadRegistry::DownloadRegistry(std::size_t excerpt_cap) : cap_(excerpt_cap) {}

DirectoryExcerpt DownloadRegistry::register_download(NodeAddress address,
                                                     std::string domain,
                                                     VirtualTime at) {
  if (!records_.empty() && at < records_.back().at) {
    throw InvalidArgument("download at " + std::to_string(at.units) +
                          " precedes the latest registration");
  }
  std::vector<const DownloadRecord*> prior;
  prior.reserve(records_.size());
  for (const auto& r : records_) {
    // A re-download from the same address does not list itself.
    if (r.address != address) prior.push_back(&r);
  }
  auto closer = [&](const DownloadRecord* a, const DownloadRecord* b) {
    const auto da = address_distance(a->address, address);
    const auto db = address_distance(b->address, address);
    return da != db ? da < db : a->address < b->address;
  };
  std::sort(prior.begin(), prior.end(), closer);
  prior.erase(std::unique(prior.begin(), prior.end(),
                          [](const DownloadRecord* a, const DownloadRecord* b) {
                            return a->address == b->address;
                          }),
              prior.end());
  DirectoryExcerpt excerpt;
  for (std::size_t i = 0; i < prior.size() && i < cap_; ++i) {
    excerpt.entries.push_back({prior[i]->address, prior[i]->domain});
  }
  records_.push_back({address, std::move(domain), at});
  return excerpt;
}

DirectoryExcerpt register_download(DownloadRegistry& registry,
                                   NodeAddress address, std::string domain,
                                   VirtualTime at) {
  return registry.register_download(address, std::move(domain), at);
}

void SearchEngineDirectory::advertise(NodeAddress address, std::string domain,
                                      bool is_router) {
  auto& rec = records_[address];
  rec.address = address;
  rec.domain = std::move(domain);
  rec.is_router = rec.is_router || is_router;
}

bool SearchEngineDirectory::deregister(NodeAddress address) {
  auto it = records_.find(address);
  if (it == records_.end() || it->second.is_router) return false;
  records_.erase(it);
  return true;
}

void SearchEngineDirectory::set_router(NodeAddress address, bool is_router) {
  auto it = records_.find(address);
  if (it != records_.end()) it->second.is_router = is_router;
}

const AdvertisedRecord* SearchEngineDirectory::find(NodeAddress address) const {
  auto it = records_.find(address);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<AdvertisedRecord> SearchEngineDirectory::routers() const {
  std::vector<AdvertisedRecord> out;
  for (const auto& [a, r] : records_) {
    if (r.is_router) out.push_back(r);
  }
  return out;
}

std::uint64_t IntroductionQueue::enqueue(NodeAddress sender, NodeAddress target,
                                         std::string payload,
                                         VirtualTime deadline) {
  const auto id = next_id_++;
  pending_.emplace(id, Introduction{id, sender, target, std::move(payload),
                                    deadline});
  return id;
}

bool IntroductionQueue::has_pending(NodeAddress sender,
                                    NodeAddress target) const {
  return std::any_of(pending_.begin(), pending_.end(), [&](const auto& kv) {
    return kv.second.sender == sender && kv.second.target == target;
  });
}

std::vector<ResolvedIntroduction> IntroductionQueue::on_reactivate(
    NodeAddress target, VirtualTime now) {
  std::vector<ResolvedIntroduction> out;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.target != target) {
      ++it;
      continue;
    }
    const auto outcome = now <= it->second.deadline
                             ? IntroductionOutcome::kDelivered
                             : IntroductionOutcome::kExpired;
    out.push_back({std::move(it->second), outcome, now});
    it = pending_.erase(it);
  }
  resolved_.insert(resolved_.end(), out.begin(), out.end());
  return out;
}

std::vector<ResolvedIntroduction> IntroductionQueue::expire(VirtualTime now) {
  std::vector<ResolvedIntroduction> out;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.deadline < now) {
      out.push_back({std::move(it->second), IntroductionOutcome::kExpired, now});
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  resolved_.insert(resolved_.end(), out.begin(), out.end());
  return out;
}

Deployment::Deployment(DiscoveryConfig config)
    : config_(std::move(config)), registry_(config_.excerpt_cap) {
  config_.router_criteria.validate();
}

std::size_t Deployment::add_instance(NodeRecord record) {
  record.validate();
  record.active = true;
  const auto a = record.address;
  detach(a);
  instances_[a] = InstanceState{record, true, false};
  hoods_.push_back(Neighborhood{NeighborhoodMap({record}),
                                RouterMonitor(config_.router_criteria,
                                              config_.beacon_timeout),
                                false});
  hood_of_[a] = hoods_.size() - 1;
  return hoods_.size() - 1;
}

const InstanceState& Deployment::instance(NodeAddress a) const {
  auto it = instances_.find(a);
  if (it == instances_.end()) throw NotAMember("unknown instance " + a.to_string());
  return it->second;
}

InstanceState& Deployment::instance(NodeAddress a) {
  auto it = instances_.find(a);
  if (it == instances_.end()) throw NotAMember("unknown instance " + a.to_string());
  return it->second;
}

bool Deployment::running(NodeAddress a) const {
  auto it = instances_.find(a);
  return it != instances_.end() && it->second.running;
}

void Deployment::set_running(NodeAddress a, bool running) {
  instance(a).running = running;
}

std::optional<std::size_t> Deployment::neighborhood_of(NodeAddress a) const {
  auto it = hood_of_.find(a);
  if (it == hood_of_.end()) return std::nullopt;
  return it->second;
}

const Deployment::Neighborhood& Deployment::neighborhood(std::size_t i) const {
  return hoods_.at(i);
}

Deployment::Neighborhood& Deployment::neighborhood(std::size_t i) {
  return hoods_.at(i);
}

std::vector<std::size_t> Deployment::live_neighborhoods() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hoods_.size(); ++i) {
    if (!hoods_[i].retired) out.push_back(i);
  }
  return out;
}

std::optional<NodeAddress> Deployment::router_of(std::size_t hood) const {
  return hoods_.at(hood).monitor.router();
}

void Deployment::detach(NodeAddress a) {
  auto it = hood_of_.find(a);
  if (it == hood_of_.end()) return;
  auto& hood = hoods_[it->second];
  hood.map.erase(a);
  if (hood.map.empty()) hood.retired = true;
  hood_of_.erase(it);
}

void Deployment::join(NodeAddress a, std::size_t hood) {
  auto& target = hoods_.at(hood);
  if (target.retired) throw InvalidArgument("neighborhood is retired");
  if (neighborhood_of(a) == hood) return;
  detach(a);
  NodeRecord rec = instance(a).record;
  rec.active = true;
  target.map.upsert(std::move(rec));
  hood_of_[a] = hood;
}

void Deployment::reindex(std::size_t hood) {
  for (auto a : hoods_[hood].map.addresses()) hood_of_[a] = hood;
}

std::optional<std::size_t> Deployment::subdivide(std::size_t hood,
                                                 std::size_t critical_mass) {
  auto halves = nbsim::subdivide(hoods_.at(hood).map, critical_mass);
  if (!halves) return std::nullopt;
  auto& low = hoods_[hood];
  const auto router = low.monitor.router();
  low.map = std::move(halves->first);
  if (router && !low.map.contains(*router)) {
    low.monitor = RouterMonitor(config_.router_criteria, config_.beacon_timeout);
  }
  hoods_.push_back(Neighborhood{std::move(halves->second),
                                RouterMonitor(config_.router_criteria,
                                              config_.beacon_timeout),
                                false});
  const auto high = hoods_.size() - 1;
  reindex(high);
  return high;
}

std::optional<NodeAddress> Deployment::ensure_router(std::size_t hood,
                                                     VirtualTime now) {
  auto& h = hoods_.at(hood);
  auto r = h.monitor.ensure_router(h.map, now);
  if (r) {
    const auto& rec = instance(*r).record;
    directory_.advertise(*r, rec.domain, /*is_router=*/true);
  }
  return r;
}

std::string_view to_string(JoinKind k) {
  switch (k) {
    case JoinKind::kConnected: return "connected";
    case JoinKind::kViaRouter: return "via-router";
    case JoinKind::kAwaitingDiscovery: return "awaiting-discovery";
    case JoinKind::kIsolated: return "isolated";
  }
  return "?";
}

namespace {

void introduce_to_map(Deployment& world, NodeAddress instance,
                      NodeAddress contact, Engine& engine, JoinOutcome& out) {
  const auto hood = *world.neighborhood_of(instance);
  const auto deadline = engine.now() + world.config().intro_timeout;
  for (auto member : world.neighborhood(hood).map.addresses()) {
    if (member == instance || member == contact) continue;
    if (world.running(member)) {
      engine.send(instance, member, kIntroChannel, 0, "introduce");
      out.introduced.push_back(member);
    } else if (!world.introductions().has_pending(instance, member)) {
      out.queued.push_back(world.introductions().enqueue(
          instance, member, "introduce", deadline));
      engine.note(instance, "queued to=" + member.to_string());
    }
  }
}

}  // namespace

JoinOutcome bootstrap(Deployment& world, NodeAddress instance,
                      const DirectoryExcerpt& excerpt, Engine& engine) {
  if (!world.running(instance)) {
    throw InvalidArgument("bootstrap of inactive instance " +
                          instance.to_string());
  }
  JoinOutcome out;
  std::vector<NodeAddress> contacts;
  for (const auto& e : excerpt.entries) {
    if (e.address != instance) contacts.push_back(e.address);
  }
  std::stable_sort(contacts.begin(), contacts.end(),
                   [&](NodeAddress a, NodeAddress b) {
                     const auto da = address_distance(a, instance);
                     const auto db = address_distance(b, instance);
                     return da != db ? da < db : a < b;
                   });
  const auto deadline = engine.now() + world.config().intro_timeout;

  auto connect = [&](NodeAddress contact, JoinKind kind) {
    const auto hood = *world.neighborhood_of(contact);
    world.join(instance, hood);
    world.instance(instance).isolated = false;
    world.directory().deregister(instance);
    out.kind = kind;
    out.contact = contact;
    engine.note(instance, "connect to=" + contact.to_string());
    engine.send(contact, instance, kMapCopyChannel, 0, "map-copy");
    introduce_to_map(world, instance, contact, engine, out);
  };

  for (auto contact : contacts) {
    const bool up = world.running(contact) &&
                    world.neighborhood_of(contact).has_value();
    out.attempts.push_back({contact, up});
    if (up) {
      connect(contact, JoinKind::kConnected);
      return out;
    }
    engine.note(instance, "connect-failed to=" + contact.to_string());
    if (world.has_instance(contact) &&
        !world.introductions().has_pending(instance, contact)) {
      out.queued.push_back(world.introductions().enqueue(
          instance, contact, "introduce", deadline));
      engine.note(instance, "queued to=" + contact.to_string());
    }
  }

  // Ask the search engines for a router with a populated map.
  auto routers = world.directory().routers();
  std::stable_sort(routers.begin(), routers.end(),
                   [&](const AdvertisedRecord& a, const AdvertisedRecord& b) {
                     const auto da = address_distance(a.address, instance);
                     const auto db = address_distance(b.address, instance);
                     return da != db ? da < db : a.address < b.address;
                   });
  for (const auto& r : routers) {
    if (r.address == instance || !world.running(r.address)) continue;
    out.attempts.push_back({r.address, true});
    connect(r.address, JoinKind::kViaRouter);
    return out;
  }

  const auto& rec = world.instance(instance).record;
  world.directory().advertise(instance, rec.domain);
  out.kind = contacts.empty() ? JoinKind::kIsolated
                              : JoinKind::kAwaitingDiscovery;
  world.instance(instance).isolated = true;
  engine.note(instance, std::string(to_string(out.kind)));
  return out;
}

ScanResult neighborhood_scan(const Deployment& world, const std::string& domain,
                             AddressRange range, std::size_t budget,
                             NodeAddress start) {
  if (budget == 0) throw InvalidArgument("scan budget must be positive");
  ScanResult out;
  const auto span = range.size();
  if (span == 0) return out;
  std::uint64_t offset =
      range.contains(start) ? std::uint64_t{start.value()} - range.first.value()
                            : 0;
  const auto probes = std::min<std::uint64_t>(budget, span);
  for (std::uint64_t i = 0; i < probes; ++i) {
    const NodeAddress a{static_cast<std::uint32_t>(
        range.first.value() + (offset + i) % span)};
    out.probed.push_back(a);
    if (!world.running(a)) continue;
    if (!domain.empty() && world.instance(a).record.domain != domain) continue;
    out.found.push_back(a);
  }
  return out;
}

NeighborhoodMap router_refresh(Deployment& world, std::size_t hood,
                               NodeAddress router, AddressRange span,
                               std::vector<NodeAddress>* added) {
  if (world.router_of(hood) != router) {
    throw InvalidArgument(router.to_string() +
                          " is not the router of this neighborhood");
  }
  std::vector<NodeAddress> candidates;
  for (const auto& [a, rec] : world.directory().records()) {
    if (rec.is_router || !span.contains(a) || !world.has_instance(a)) continue;
    if (world.neighborhood_of(a) == hood) {
      // Already mapped; only the stale advertisement remains.
      candidates.push_back(a);
      continue;
    }
    if (world.running(a)) candidates.push_back(a);
  }
  for (auto a : candidates) {
    if (world.neighborhood_of(a) != hood) {
      world.join(a, hood);
      world.instance(a).isolated = false;
      if (added) added->push_back(a);
    }
    world.directory().deregister(a);
  }
  return world.neighborhood(hood).map;
}

}  // namespace nbsim
