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

#ifndef NBSIM_ADDRESS_HPP_
#define NBSIM_ADDRESS_HPP_

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace nbsim {

// 32-bit overlay address, rendered as a dotted quad. Ordering is the
// integer ordering, which is what cluster formation and leader election use.
class NodeAddress {
 public:
  constexpr NodeAddress() = default;
  constexpr explicit NodeAddress(std::uint32_t value) : value_(value) {}

  // Throws InvalidArgument on anything but four decimal octets 0..255.
  static NodeAddress parse(std::string_view dotted);
  static std::optional<NodeAddress> try_parse(std::string_view dotted);

  constexpr std::uint32_t value() const { return value_; }
  std::string to_string() const;

  friend constexpr auto operator<=>(NodeAddress, NodeAddress) = default;

 private:
  std::uint32_t value_ = 0;
};

std::ostream& operator<<(std::ostream& os, NodeAddress a);

// |a - b| over the 32-bit values; stands in for ISP-range proximity.
constexpr std::uint32_t address_distance(NodeAddress a, NodeAddress b) {
  return a.value() > b.value() ? a.value() - b.value() : b.value() - a.value();
}

// Inclusive address span.
struct AddressRange {
  NodeAddress first;
  NodeAddress last;

  constexpr bool contains(NodeAddress a) const {
    return first <= a && a <= last;
  }
  constexpr std::uint64_t size() const {
    return last < first ? 0 : std::uint64_t{last.value()} - first.value() + 1;
  }
};

}  // namespace nbsim

template <>
struct std::hash<nbsim::NodeAddress> {
  std::size_t operator()(nbsim::NodeAddress a) const noexcept {
    return std::hash<std::uint32_t>{}(a.value());
  }
};

#endif  // NBSIM_ADDRESS_HPP_
