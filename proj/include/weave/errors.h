// Copyright 2026 The Weave Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WEAVE_ERRORS_H_
#define WEAVE_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace weave {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A real value outside the fixed-point range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// The preprocessing pool ran dry. Never recovered from by reusing material.
class TriplesExhausted : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// The "bottom" outcome: a MAC check failed locally, or a peer announced that
// its check failed. Either way the computation halts and nothing is released.
class ProtocolAbort : public Error {
 public:
  ProtocolAbort(const std::string& what, std::uint32_t round, int detected_by)
      : Error(what), round_(round), detected_by_(detected_by) {}
  std::uint32_t round() const { return round_; }
  // Party index (1-based) that raised the abort.
  int detected_by() const { return detected_by_; }

 private:
  std::uint32_t round_;
  int detected_by_;
};

class MacCheckFailed : public ProtocolAbort {
 public:
  using ProtocolAbort::ProtocolAbort;
};

}  // namespace weave

#endif  // WEAVE_ERRORS_H_
