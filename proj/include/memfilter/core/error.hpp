// Copyright 2026 The Memfilter Authors
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

#ifndef MEMFILTER_CORE_ERROR_HPP_
#define MEMFILTER_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace memfilter {

// Base of every error thrown by the library. Callers that only need to
// report can catch this; the subclasses exist for tests and for the CLI's
// exit-code mapping.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violated a type invariant (negative price, sigma <= 0, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input text could not be parsed. Carries the 1-based line (or row) number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A foreign key did not resolve (record -> unknown model id).
class ReferentialError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Two inputs that must describe the same entity do not.
class PairingError : public Error {
 public:
  using Error::Error;
};

// Not enough data for the requested statistic or partition.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A strategy or command was configured without the inputs it needs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace memfilter

#endif  // MEMFILTER_CORE_ERROR_HPP_
