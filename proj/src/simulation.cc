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

#include "weave/simulation.h"

#include <thread>

#include "weave/errors.h"

namespace weave {

bool LocalRunResult::all_ok() const {
  for (const auto& e : errors) {
    if (e) return false;
  }
  return true;
}

void LocalRunResult::rethrow() const {
  std::exception_ptr fallback;
  for (int pass = 0; pass < 3; ++pass) {
    for (const auto& e : errors) {
      if (!e) continue;
      try {
        std::rethrow_exception(e);
      } catch (const MacCheckFailed&) {
        if (pass == 0) std::rethrow_exception(e);
      } catch (const ProtocolAbort&) {
        if (pass == 1) std::rethrow_exception(e);
      } catch (const TransportError&) {
        if (!fallback) fallback = e;
      } catch (...) {
        if (pass == 0) std::rethrow_exception(e);
      }
    }
  }
  if (fallback) std::rethrow_exception(fallback);
}

LocalRunResult run_local(int n, const LocalRunOptions& options,
                         const std::function<void(Engine&)>& body) {
  auto hub = InProcessHub::create(n);
  std::shared_ptr<StreamingDealer> dealer;
  if (!options.make_preprocessing) dealer = StreamingDealer::create(n, options.dealer_seed);

  LocalRunResult result;
  result.errors.resize(static_cast<std::size_t>(n));
  result.transcripts.resize(static_cast<std::size_t>(n));
  if (dealer) result.mac_key = dealer->mac_key();

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    threads.emplace_back([&, i] {
      const PartyId me(i);
      std::unique_ptr<Network> net;
      std::unique_ptr<Preprocessing> pre;
      std::unique_ptr<Engine> engine;
      try {
        net = hub->endpoint(me);
        net->set_timeout(options.timeout);
        if (options.configure_network) options.configure_network(me, *net);
        pre = options.make_preprocessing ? options.make_preprocessing(me) : dealer->view(me);
        if (options.wrap_preprocessing) pre = options.wrap_preprocessing(me, std::move(pre));
        engine = std::make_unique<Engine>(*net, *pre);
        body(*engine);
        result.transcripts[me.slot()] = engine->transcript().bytes();
      } catch (...) {
        result.errors[me.slot()] = std::current_exception();
        if (engine) result.transcripts[me.slot()] = engine->transcript().bytes();
        // Peers still waiting on this party fail fast instead of timing out.
        hub->kill(me);
      }
    });
  }
  for (auto& t : threads) t.join();
  return result;
}

}  // namespace weave
