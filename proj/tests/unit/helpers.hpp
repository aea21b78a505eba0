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

#ifndef NBSIM_TESTS_HELPERS_HPP_
#define NBSIM_TESTS_HELPERS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "nbsim/address.hpp"
#include "nbsim/topology.hpp"

namespace nbsim::testing {

inline NodeAddress ip(const char* dotted) { return NodeAddress::parse(dotted); }

// 10.0.<i / 256>.<i % 256>
inline NodeAddress nth(std::uint32_t i) { return NodeAddress(0x0a000000u + i); }

inline NodeRecord record(NodeAddress a, double uptime = 0.5,
                         double capacity = 56'000.0, double metric = 0.0) {
  NodeRecord r;
  r.address = a;
  r.domain = "isp.example";
  r.uptime_fraction = uptime;
  r.link_capacity_bps = capacity;
  r.metric = metric;
  return r;
}

inline std::vector<NodeRecord> records(std::uint32_t count,
                                       std::uint32_t stride = 1) {
  std::vector<NodeRecord> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    out.push_back(record(nth(1 + i * stride)));
  }
  return out;
}

}  // namespace nbsim::testing

#endif  // NBSIM_TESTS_HELPERS_HPP_
