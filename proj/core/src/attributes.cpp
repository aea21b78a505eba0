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

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <tuple>

#include "nbsim/error.hpp"

namespace nbsim {

AttributeScope AttributeScope::parse(std::string_view text) {
  if (text == "local") return local();
  if (text == "global") return global();
  constexpr std::string_view kGroupPrefix = "group:";
  if (text.starts_with(kGroupPrefix) && text.size() > kGroupPrefix.size()) {
    return in_group(std::string(text.substr(kGroupPrefix.size())));
  }
  throw InvalidArgument("unknown attribute scope '" + std::string(text) + "'");
}

std::string AttributeScope::to_string() const {
  switch (kind) {
    case ScopeKind::kLocal: return "local";
    case ScopeKind::kGlobal: return "global";
    case ScopeKind::kGroup: return "group:" + group;
  }
  return "?";
}

std::string_view to_string(UpdateClass c) {
  switch (c) {
    case UpdateClass::kAggressive: return "aggressive";
    case UpdateClass::kModerate: return "moderate";
    case UpdateClass::kLight: return "light";
  }
  return "?";
}

UpdateClass parse_update_class(std::string_view text) {
  if (text == "aggressive") return UpdateClass::kAggressive;
  if (text == "moderate") return UpdateClass::kModerate;
  if (text == "light") return UpdateClass::kLight;
  throw InvalidArgument("unknown update class '" + std::string(text) + "'");
}

bool supersedes(const AttributeEntry& a, const AttributeEntry& b) {
  if (a.version != b.version) return a.version > b.version;
  return std::tie(a.owner, a.value, a.scope, a.update_class) <
         std::tie(b.owner, b.value, b.scope, b.update_class);
}

bool AttributeList::put(AttributeEntry e) {
  AttributeKey k{e.key, e.owner};
  auto it = entries_.find(k);
  if (it == entries_.end()) {
    entries_.emplace(std::move(k), std::move(e));
    return true;
  }
  if (it->second.scope != e.scope) {
    throw InvalidArgument("attribute '" + e.key + "' of " +
                          e.owner.to_string() + " cannot change scope");
  }
  if (e.version <= it->second.version) return false;
  it->second = std::move(e);
  return true;
}

bool AttributeList::offer(const AttributeEntry& e) {
  auto [it, inserted] = entries_.try_emplace(AttributeKey{e.key, e.owner}, e);
  if (inserted) return true;
  if (!supersedes(e, it->second)) return false;
  it->second = e;
  return true;
}

const AttributeEntry* AttributeList::find(const std::string& key,
                                          NodeAddress owner) const {
  auto it = entries_.find(AttributeKey{key, owner});
  return it == entries_.end() ? nullptr : &it->second;
}

AttributeList merge_lists(const AttributeList& a, const AttributeList& b) {
  AttributeList out = a;
  for (const auto& [k, e] : b) out.offer(e);
  return out;
}

std::map<NodeAddress, AttributeList> parse_attribute_seeds(std::istream& in) {
  std::map<NodeAddress, AttributeList> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string owner, key, scope, cls;
    if (!(fields >> owner >> key >> scope >> cls)) {
      throw ParseError(line_no, "expected `owner key scope class value`");
    }
    std::string value;
    std::getline(fields >> std::ws, value);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) {
      value.pop_back();
    }
    AttributeEntry e;
    try {
      e.owner = NodeAddress::parse(owner);
      e.scope = AttributeScope::parse(scope);
      e.update_class = parse_update_class(cls);
    } catch (const InvalidArgument& err) {
      throw ParseError(line_no, err.what());
    }
    e.key = key;
    e.value = value;
    auto& list = out[e.owner];
    if (list.find(e.key, e.owner)) {
      throw ParseError(line_no, "duplicate attribute '" + key + "' for " + owner);
    }
    list.put(std::move(e));
  }
  return out;
}

std::string_view to_string(CommitState s) {
  switch (s) {
    case CommitState::kPending: return "pending";
    case CommitState::kCommitted: return "committed";
    case CommitState::kExpired: return "expired";
  }
  return "?";
}

PendingCommit::PendingCommit(NodeAddress proposer,
                             std::vector<NodeAddress> group, std::string key,
                             std::string value, VirtualTime now,
                             VirtualTime deadline)
    : proposer_(proposer),
      group_(group.begin(), group.end()),
      key_(std::move(key)),
      value_(std::move(value)),
      deadline_(deadline) {
  if (!group_.contains(proposer_)) {
    throw InvalidArgument("proposer " + proposer_.to_string() +
                          " is not in the target group");
  }
  acks_.insert(proposer_);
  if (acks_ == group_) resolve(CommitState::kCommitted, now);
}

void PendingCommit::resolve(CommitState s, VirtualTime now) {
  state_ = s;
  resolved_at_ = now;
}

AckResult PendingCommit::ack(NodeAddress from, VirtualTime now) {
  if (!group_.contains(from)) return AckResult::kNotAMember;
  if (resolved()) return AckResult::kAfterResolution;
  if (!acks_.insert(from).second) return AckResult::kDuplicate;
  if (acks_ == group_) resolve(CommitState::kCommitted, now);
  return AckResult::kAccepted;
}

bool PendingCommit::tick(VirtualTime now) {
  if (resolved() || now < deadline_) return false;
  std::set_difference(group_.begin(), group_.end(), acks_.begin(), acks_.end(),
                      std::inserter(absentees_, absentees_.end()));
  resolve(CommitState::kCommitted, now);
  return true;
}

bool PendingCommit::abandon(VirtualTime now) {
  if (resolved()) return false;
  resolve(CommitState::kExpired, now);
  return true;
}

std::optional<std::string> PendingCommit::visible_value() const {
  if (!committed()) return std::nullopt;
  return value_;
}

PendingCommit propose_commit(NodeAddress proposer,
                             std::vector<NodeAddress> group, std::string key,
                             std::string value, VirtualTime now,
                             VirtualTime timeout) {
  return PendingCommit(proposer, std::move(group), std::move(key),
                       std::move(value), now, now + timeout);
}

VirtualTime update_period(UpdateClass cls, std::span<const double> metrics,
                          const UpdatePeriodConfig& config) {
  if (metrics.empty()) throw InvalidArgument("update_period needs metrics");
  if (!(config.reference_metric > 0.0)) {
    throw InvalidArgument("reference metric must be positive");
  }
  std::vector<double> sorted(metrics.begin(), metrics.end());
  if (std::any_of(sorted.begin(), sorted.end(),
                  [](double m) { return !(m >= 0.0); })) {
    throw InvalidArgument("metrics must be non-negative");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  VirtualTime base;
  switch (cls) {
    case UpdateClass::kAggressive: base = config.aggressive; break;
    case UpdateClass::kModerate: base = config.moderate; break;
    case UpdateClass::kLight: base = config.light; break;
  }
  const double scaled = static_cast<double>(base.units) *
                        (1.0 + median / config.reference_metric);
  return VirtualTime{static_cast<std::uint64_t>(std::llround(scaled))};
}

std::optional<std::size_t> Overlay::find_by_router(NodeAddress router) const {
  for (std::size_t i = 0; i < neighborhoods.size(); ++i) {
    if (neighborhoods[i].router == router) return i;
  }
  return std::nullopt;
}

namespace {

// Owners in `hood` whose (key, value) entry is carried by any member list.
std::set<NodeAddress> owners_with(const NeighborhoodState& hood,
                                  const std::string& key,
                                  const std::string& value, bool remote) {
  std::set<NodeAddress> out;
  for (const auto& [holder, list] : hood.lists) {
    for (const auto& [k, e] : list) {
      if (e.key != key || e.value != value) continue;
      if (remote && e.scope.kind == ScopeKind::kLocal) continue;
      const auto* rec = hood.map.find(e.owner);
      if (rec && rec->active) out.insert(e.owner);
    }
  }
  return out;
}

}  // namespace

LookupResult lookup_by_attribute(const Overlay& overlay, std::size_t origin,
                                 NodeAddress requester, const std::string& key,
                                 const std::string& value) {
  if (origin >= overlay.neighborhoods.size()) {
    throw InvalidArgument("unknown origin neighborhood");
  }
  const auto& home = overlay.neighborhoods[origin];
  if (!home.router && home.map.empty()) {
    throw InvalidArgument("origin neighborhood has neither router nor map");
  }
  LookupResult result;
  for (auto owner : owners_with(home, key, value, /*remote=*/false)) {
    if (owner != requester) result.matches.push_back({owner, origin});
  }
  const auto& remotes = home.map.remote_routers();
  if (!home.router && remotes.empty()) {
    result.partial = true;
    return result;
  }
  for (auto remote_router : remotes) {
    auto idx = overlay.find_by_router(remote_router);
    if (!idx || *idx == origin) {
      result.partial = true;
      continue;
    }
    for (auto owner : owners_with(overlay.neighborhoods[*idx], key, value,
                                  /*remote=*/true)) {
      if (owner == requester) continue;
      result.matches.push_back({owner, *idx});
      result.connections.push_back(
          {requester, home.router, remote_router, owner});
    }
  }
  std::sort(result.matches.begin(), result.matches.end());
  return result;
}

}  // namespace nbsim
