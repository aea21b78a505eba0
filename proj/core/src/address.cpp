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

#include "nbsim/address.hpp"

#include <charconv>
#include <ostream>

#include "nbsim/error.hpp"

namespace nbsim {

std::optional<NodeAddress> NodeAddress::try_parse(std::string_view dotted) {
  std::uint32_t value = 0;
  const char* p = dotted.data();
  const char* end = p + dotted.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    // Reject signs, whitespace and over-long octets such as "0001".
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || part > 255 || next - p > 3) return std::nullopt;
    p = next;
    value = (value << 8) | part;
  }
  if (p != end) return std::nullopt;
  return NodeAddress{value};
}

NodeAddress NodeAddress::parse(std::string_view dotted) {
  if (auto a = try_parse(dotted)) return *a;
  throw InvalidArgument("malformed address '" + std::string(dotted) + "'");
}

std::string NodeAddress::to_string() const {
  return std::to_string(value_ >> 24) + '.' +
         std::to_string((value_ >> 16) & 0xff) + '.' +
         std::to_string((value_ >> 8) & 0xff) + '.' +
         std::to_string(value_ & 0xff);
}

std::ostream& operator<<(std::ostream& os, NodeAddress a) {
  return os << a.to_string();
}

}  // namespace nbsim
