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

#include "nbsim/simcore.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

#include "nbsim/error.hpp"

namespace nbsim {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void LatencyModel::validate() const {
  if (hop_low < 1 || hop_low > hop_high) {
    throw ConfigError("latency model needs 1 <= hop_low <= hop_high");
  }
  if (local_cap_ms > regional_cap_ms) {
    throw ConfigError("latency model needs local_cap_ms <= regional_cap_ms");
  }
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label) {
  return splitmix64(splitmix64(master_seed) ^ fnv1a(label));
}

RandomStream::RandomStream(std::uint64_t seed, std::string label)
    : seed_(seed),
      label_(std::move(label)),
      engine_(derive_seed(seed_, label_)) {}

RandomStream RandomStream::derive(std::string_view sublabel) const {
  std::string label = label_;
  label += '/';
  label += sublabel;
  return RandomStream(seed_, std::move(label));
}

std::uint32_t RandomStream::uniform_int(std::uint32_t lo, std::uint32_t hi) {
  return std::uniform_int_distribution<std::uint32_t>(lo, hi)(engine_);
}

double RandomStream::uniform_real() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

VirtualTime sample_hop_delay(RandomStream& stream, const LatencyModel& model) {
  return VirtualTime{stream.uniform_int(model.hop_low, model.hop_high)};
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kMessageDelivery: return "deliver";
    case EventKind::kNodeUp: return "up";
    case EventKind::kNodeDown: return "down";
    case EventKind::kTimer: return "timer";
    case EventKind::kBeacon: return "beacon";
    case EventKind::kNote: return "note";
  }
  return "?";
}

std::string format_event(const SimEvent& ev, const NameResolver& names) {
  auto name = [&](NodeAddress a) {
    return names ? names(a) : a.to_string();
  };
  char head[64];
  std::snprintf(head, sizeof head, "%6llu #%-5llu %-8s ",
                static_cast<unsigned long long>(ev.at.units),
                static_cast<unsigned long long>(ev.seq),
                std::string(to_string(ev.kind)).c_str());
  std::string line = head;
  line += name(ev.target);
  if (ev.kind == EventKind::kMessageDelivery) {
    line += " <- " + name(ev.source) + " sent=" +
            std::to_string(ev.sent_at.units);
  }
  if (!ev.detail.empty()) line += " " + ev.detail;
  return line;
}

std::string format_trace(const EventTrace& trace, const NameResolver& names) {
  std::string out;
  for (const auto& ev : trace.events) {
    out += format_event(ev, names);
    out += '\n';
  }
  if (trace.truncated) {
    out += "# truncated: " + std::to_string(trace.pending) +
           " events pending past horizon\n";
  }
  return out;
}

Engine::Engine(std::uint64_t master_seed, LatencyModel latency)
    : master_seed_(master_seed), latency_(latency) {
  latency_.validate();
}

std::uint64_t Engine::schedule(SimEvent ev) {
  if (ev.at < now_) {
    throw InvalidArgument("cannot schedule event at " +
                          std::to_string(ev.at.units) + " before now " +
                          std::to_string(now_.units));
  }
  ev.seq = next_seq_++;
  const auto seq = ev.seq;
  queue_.push(std::move(ev));
  return seq;
}

std::uint64_t Engine::schedule_in(VirtualTime delay, SimEvent ev) {
  ev.at = now_ + delay;
  return schedule(std::move(ev));
}

SimEvent Engine::send(NodeAddress from, NodeAddress to, std::uint32_t channel,
                      std::uint64_t ref, std::string detail) {
  SimEvent ev;
  ev.kind = EventKind::kMessageDelivery;
  ev.source = from;
  ev.target = to;
  ev.sent_at = now_;
  ev.at = now_ + sample_hop_delay(stream_for(from), latency_);
  ev.channel = channel;
  ev.ref = ref;
  ev.detail = std::move(detail);
  SimEvent copy = ev;
  copy.seq = schedule(std::move(ev));
  return copy;
}

void Engine::note(NodeAddress target, std::string detail, NodeAddress source) {
  SimEvent ev;
  ev.kind = EventKind::kNote;
  ev.at = now_;
  ev.seq = next_seq_++;
  ev.target = target;
  ev.source = source;
  ev.detail = std::move(detail);
  trace_.events.push_back(std::move(ev));
}

std::optional<SimEvent> Engine::pop(std::optional<VirtualTime> horizon) {
  if (queue_.empty()) return std::nullopt;
  if (horizon && queue_.top().at > *horizon) {
    trace_.truncated = true;
    trace_.pending = queue_.size();
    return std::nullopt;
  }
  SimEvent ev = queue_.top();
  queue_.pop();
  now_ = ev.at;
  trace_.events.push_back(ev);
  return ev;
}

RandomStream& Engine::stream_for(NodeAddress node) {
  auto it = streams_.find(node);
  if (it == streams_.end()) {
    it = streams_
             .emplace(node, RandomStream(master_seed_, "node/" + node.to_string()))
             .first;
  }
  return it->second;
}

EventTrace run(const ScenarioScript& script, std::uint64_t master_seed,
               const EventHandler& handler) {
  const std::set<NodeAddress> declared(script.nodes.begin(),
                                       script.nodes.end());
  Engine engine(master_seed);
  for (const auto& ev : script.events) {
    if (!declared.contains(ev.target)) {
      throw ConfigError("event targets undeclared node " +
                        ev.target.to_string());
    }
    engine.schedule(ev);
  }
  engine.run(
      [&](const SimEvent& ev) {
        if (handler) handler(engine, ev);
      },
      script.horizon);
  return engine.trace();
}

}  // namespace nbsim
