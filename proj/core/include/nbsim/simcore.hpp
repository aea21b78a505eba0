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

#ifndef NBSIM_SIMCORE_HPP_
#define NBSIM_SIMCORE_HPP_

// Deterministic discrete-event core: virtual clock, ordered event queue,
// seeded random streams and the per-hop delay model.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nbsim/address.hpp"

namespace nbsim {

// Abstract simulation time. One unit maps to 50 ms of wide-area delay.
struct VirtualTime {
  std::uint64_t units = 0;

  friend constexpr auto operator<=>(VirtualTime, VirtualTime) = default;
  friend constexpr VirtualTime operator+(VirtualTime a, VirtualTime b) {
    return VirtualTime{a.units + b.units};
  }
};

inline constexpr std::uint64_t kMillisecondsPerUnit = 50;

constexpr std::uint64_t units_to_ms(VirtualTime t) {
  return t.units * kMillisecondsPerUnit;
}

// Hop delays in model units plus the real-world delay caps they stand for.
struct LatencyModel {
  std::uint32_t hop_low = 1;
  std::uint32_t hop_high = 10;
  std::uint32_t local_cap_ms = 10;
  std::uint32_t regional_cap_ms = 500;

  // Throws ConfigError unless 1 <= hop_low <= hop_high and
  // local_cap_ms <= regional_cap_ms.
  void validate() const;

  // The slowest hop is pinned to the regional cap.
  constexpr std::uint64_t ms_per_unit() const {
    return regional_cap_ms / hop_high;
  }
};

// Mixes a master seed with a label into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label);

// A named, reproducible pseudo-random sequence. Identical (seed, label)
// pairs replay identical values; different labels give unrelated streams.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string label);

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  RandomStream derive(std::string_view sublabel) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform over the closed range [lo, hi].
  std::uint32_t uniform_int(std::uint32_t lo, std::uint32_t hi);
  // Uniform over [0, 1).
  double uniform_real();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

// One hop's delay, uniform over the integers [hop_low, hop_high].
VirtualTime sample_hop_delay(RandomStream& stream,
                             const LatencyModel& model = {});

enum class EventKind : std::uint8_t {
  kMessageDelivery,
  kNodeUp,
  kNodeDown,
  kTimer,
  kBeacon,
  kNote,
};

std::string_view to_string(EventKind kind);

struct SimEvent {
  VirtualTime at;
  std::uint64_t seq = 0;
  NodeAddress target;
  EventKind kind = EventKind::kTimer;
  NodeAddress source;
  // Deliveries only: when the message left `source`.
  VirtualTime sent_at;
  // Consumer-defined message type and payload handle.
  std::uint32_t channel = 0;
  std::uint64_t ref = 0;
  std::string detail;
};

struct EventTrace {
  std::vector<SimEvent> events;
  // Set when a horizon stopped the run with events still queued.
  bool truncated = false;
  std::size_t pending = 0;
};

// Timestamped input for `run`. Every event target must appear in `nodes`.
struct ScenarioScript {
  std::vector<NodeAddress> nodes;
  std::vector<SimEvent> events;
  std::optional<VirtualTime> horizon;
};

using NameResolver = std::function<std::string(NodeAddress)>;

// "   12 #7    deliver   10.0.0.1 <- 10.0.0.2 ch=3 ref=0 detail"
std::string format_event(const SimEvent& ev, const NameResolver& names = {});
std::string format_trace(const EventTrace& trace,
                         const NameResolver& names = {});

class Engine {
 public:
  explicit Engine(std::uint64_t master_seed, LatencyModel latency = {});

  VirtualTime now() const { return now_; }
  std::uint64_t master_seed() const { return master_seed_; }
  const LatencyModel& latency() const { return latency_; }

  // Queues `ev` (its seq is overwritten). Throws InvalidArgument when
  // ev.at lies in the past.
  std::uint64_t schedule(SimEvent ev);
  std::uint64_t schedule_in(VirtualTime delay, SimEvent ev);

  // Queues a delivery to `to` at now + one hop delay drawn from the
  // sender's own stream. Returns the queued event.
  SimEvent send(NodeAddress from, NodeAddress to, std::uint32_t channel,
                std::uint64_t ref = 0, std::string detail = {});

  // Records an annotation in the trace at the current time.
  void note(NodeAddress target, std::string detail,
            NodeAddress source = NodeAddress{});

  // Removes the earliest event by (at, seq), advances the clock and records
  // it in the trace. Returns nothing when idle or when the next event lies
  // beyond `horizon` (the trace is then flagged truncated).
  std::optional<SimEvent> pop(std::optional<VirtualTime> horizon = {});

  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  const EventTrace& trace() const { return trace_; }

  // Per-node stream, label "node/<dotted-quad>".
  RandomStream& stream_for(NodeAddress node);

  template <typename Handler>
  void run(Handler&& on_event, std::optional<VirtualTime> horizon = {}) {
    while (auto ev = pop(horizon)) on_event(*ev);
  }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::uint64_t master_seed_;
  LatencyModel latency_;
  VirtualTime now_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::unordered_map<NodeAddress, RandomStream> streams_;
  EventTrace trace_;
};

using EventHandler = std::function<void(Engine&, const SimEvent&)>;

// Processes a script to completion (or its horizon) and returns the trace.
// Throws ConfigError when an event targets an undeclared node.
EventTrace run(const ScenarioScript& script, std::uint64_t master_seed,
               const EventHandler& handler = {});

}  // namespace nbsim

#endif  // NBSIM_SIMCORE_HPP_
