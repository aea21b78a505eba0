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

#ifndef NBSIM_ERROR_HPP_
#define NBSIM_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nbsim {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoActiveInstances : public Error {
 public:
  NoActiveInstances() : Error("no active instances in neighborhood") {}
};

class NotAMember : public Error {
 public:
  using Error::Error;
};

class DuplicateAddress : public Error {
 public:
  using Error::Error;
};

// M/M/1 utilisation reached or exceeded 1: waiting time is unbounded.
class UnstableSystem : public Error {
 public:
  explicit UnstableSystem(double utilisation)
      : Error("unstable system: utilisation " + std::to_string(utilisation) +
              " >= 1, waiting time is unbounded"),
        utilisation_(utilisation) {}
  double utilisation() const noexcept { return utilisation_; }

 private:
  double utilisation_;
};

// Text input (address plans, attribute seeds, scenario scripts) failed to
// parse. `line()` is 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nbsim

#endif  // NBSIM_ERROR_HPP_
