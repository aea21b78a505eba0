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

#include "nbsim/queueing.hpp"

#include <cmath>
#include <string>

#include "nbsim/error.hpp"

namespace nbsim {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

MMOneInputs MMOneInputs::from_link(double interarrival_s, double message_bits,
                                   double link_bps) {
  require_positive(interarrival_s, "interarrival time G");
  require_positive(message_bits, "message length L");
  require_positive(link_bps, "link speed B");
  return {1.0 / interarrival_s, message_bits / link_bps};
}

MMOneInputs MMOneInputs::from_rates(double arrival_rate,
                                    double service_time_s) {
  require_positive(arrival_rate, "arrival rate A");
  require_positive(service_time_s, "service time S");
  return {arrival_rate, service_time_s};
}

double MMOneMetrics::P(unsigned k) const { return state_probability(U, k); }

MMOneMetrics mm1_metrics(const MMOneInputs& in) {
  require_positive(in.arrival_rate, "arrival rate A");
  require_positive(in.service_time, "service time S");
  MMOneMetrics m;
  m.A = in.arrival_rate;
  m.S = in.service_time;
  m.D = 1.0 / m.S;
  m.U = m.A / m.D;
  if (m.U >= 1.0) throw UnstableSystem(m.U);
  const double idle = 1.0 - m.U;
  m.T_w = m.U * m.S / idle;
  m.T = m.S / idle;
  m.N = m.U / idle;
  m.Q = m.U * m.U / idle;
  return m;
}

double state_probability(double U, unsigned k) {
  if (!(U >= 0.0 && U < 1.0)) {
    throw InvalidArgument("utilisation must lie in [0, 1)");
  }
  return (1.0 - U) * std::pow(U, static_cast<double>(k));
}

double naive_broadcast_load(std::uint64_t clients, double payload_bytes,
                            double interval_s) {
  if (clients < 2) throw InvalidArgument("broadcast needs at least 2 clients");
  require_positive(interval_s, "interval");
  if (!(payload_bytes >= 0.0)) {
    throw InvalidArgument("payload must be non-negative");
  }
  return static_cast<double>(clients - 1) * payload_bytes * 8.0 / interval_s;
}

}  // namespace nbsim
