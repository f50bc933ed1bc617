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

#ifndef WEAVE_SIMULATION_H_
#define WEAVE_SIMULATION_H_

// Runs n parties as threads of this process over an InProcessHub, each with
// its own Engine fed by a shared StreamingDealer.

#include <chrono>
#include <exception>
#include <functional>
#include <memory>
#include <vector>

#include "weave/preprocessing.h"
#include "weave/protocol.h"
#include "weave/transport.h"

namespace weave {

struct LocalRunOptions {
  Seed dealer_seed{};
  std::chrono::milliseconds timeout = kDefaultRoundTimeout;
  // Called on each party's network before the body runs (interceptors,
  // observers).
  std::function<void(PartyId, Network&)> configure_network;
  // May wrap or replace each party's preprocessing.
  std::function<std::unique_ptr<Preprocessing>(PartyId, std::unique_ptr<Preprocessing>)>
      wrap_preprocessing;
  // When set, used instead of the streaming dealer.
  std::function<std::unique_ptr<Preprocessing>(PartyId)> make_preprocessing;
};

struct LocalRunResult {
  // One slot per party; null when that party's body returned normally.
  std::vector<std::exception_ptr> errors;
  std::vector<std::vector<std::uint8_t>> transcripts;
  RingElement mac_key;  // dealer-side alpha, for test oracles

  bool all_ok() const;
  // Rethrows the first error that is not a consequence of another party's
  // failure: a local MacCheckFailed or a non-transport error is preferred.
  void rethrow() const;
};

LocalRunResult run_local(int n, const LocalRunOptions& options,
                         const std::function<void(Engine&)>& body);

}  // namespace weave

#endif  // WEAVE_SIMULATION_H_
