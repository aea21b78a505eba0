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

#ifndef NBSIM_QUEUEING_HPP_
#define NBSIM_QUEUEING_HPP_

// Closed-form M/M/1 metrics and the naive all-to-all broadcast load.

#include <cstdint>

namespace nbsim {

struct MMOneInputs {
  double arrival_rate = 0.0;  // A, messages per second
  double service_time = 0.0;  // S = T_s, seconds

  // A = 1/G and S = L/B.
  static MMOneInputs from_link(double interarrival_s, double message_bits,
                               double link_bps);
  static MMOneInputs from_rates(double arrival_rate, double service_time_s);
};

struct MMOneMetrics {
  double A = 0.0;    // arrivals per second
  double S = 0.0;    // service time, seconds
  double D = 0.0;    // departures per second, 1/S
  double U = 0.0;    // utilisation A/D
  double T_w = 0.0;  // waiting time U*S/(1-U)
  double T = 0.0;    // time in system S/(1-U)
  double N = 0.0;    // messages in system U/(1-U)
  double Q = 0.0;    // messages waiting U^2/(1-U)

  // Probability of k messages in the system.
  double P(unsigned k) const;
};

// Throws InvalidArgument on non-positive inputs and UnstableSystem when
// U >= 1.
MMOneMetrics mm1_metrics(const MMOneInputs& in);

// (1-U) U^k. Throws InvalidArgument unless 0 <= U < 1.
double state_probability(double U, unsigned k);

// (clients-1) * payload_bytes * 8 / interval_s bits per second at every
// client interface. Throws InvalidArgument when clients < 2 or the
// interval is not positive.
double naive_broadcast_load(std::uint64_t clients, double payload_bytes,
                            double interval_s = 1.0);

}  // namespace nbsim

#endif  // NBSIM_QUEUEING_HPP_
