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

#include <gtest/gtest.h>

#include <unordered_set>

#include "nbsim/error.hpp"

namespace nbsim {
namespace {

TEST(NodeAddress, ParsesAndPrintsDottedQuads) {
  const auto a = NodeAddress::parse("10.0.0.40");
  EXPECT_EQ(a.value(), 0x0a000028u);
  EXPECT_EQ(a.to_string(), "10.0.0.40");
  EXPECT_EQ(NodeAddress::parse("255.255.255.255").value(), 0xffffffffu);
  EXPECT_EQ(NodeAddress::parse("0.0.0.0").value(), 0u);
}

TEST(NodeAddress, RejectsMalformedText) {
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.0.0.1", "a.b.c.d",
                          "1..2.3", "1.2.3.4 ", "-1.2.3.4", "1.2.3.+4"}) {
    EXPECT_FALSE(NodeAddress::try_parse(bad).has_value()) << bad;
    EXPECT_THROW(NodeAddress::parse(bad), InvalidArgument) << bad;
  }
}

TEST(NodeAddress, OrdersNumerically) {
  EXPECT_LT(NodeAddress::parse("10.0.0.9"), NodeAddress::parse("10.0.0.10"));
  EXPECT_LT(NodeAddress::parse("9.255.255.255"), NodeAddress::parse("10.0.0.0"));
}

TEST(NodeAddress, DistanceIsSymmetric) {
  const auto a = NodeAddress::parse("10.0.0.40");
  const auto b = NodeAddress::parse("10.0.0.10");
  EXPECT_EQ(address_distance(a, b), 30u);
  EXPECT_EQ(address_distance(b, a), 30u);
  EXPECT_EQ(address_distance(a, a), 0u);
}

TEST(AddressRange, ContainsIsInclusive) {
  const AddressRange r{NodeAddress::parse("10.0.0.1"),
                       NodeAddress::parse("10.0.0.5")};
  EXPECT_TRUE(r.contains(NodeAddress::parse("10.0.0.1")));
  EXPECT_TRUE(r.contains(NodeAddress::parse("10.0.0.5")));
  EXPECT_FALSE(r.contains(NodeAddress::parse("10.0.0.6")));
  EXPECT_EQ(r.size(), 5u);
}

TEST(NodeAddress, Hashable) {
  std::unordered_set<NodeAddress> s{NodeAddress(1), NodeAddress(2),
                                    NodeAddress(1)};
  EXPECT_EQ(s.size(), 2u);
}

}  // namespace
}  // namespace nbsim
