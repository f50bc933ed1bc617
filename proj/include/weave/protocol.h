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

#ifndef WEAVE_PROTOCOL_H_
#define WEAVE_PROTOCOL_H_

// Online phase for one party: private inputs, partial openings, the batched
// MAC check, and Beaver multiplication.
//
// Every party runs its own Engine and all engines advance in lockstep: each
// call that talks to the network consumes exactly one round number, and all
// parties must make the same sequence of calls. Openings are unchecked until
// mac_check() covers them.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "weave/preprocessing.h"
#include "weave/ring.h"
#include "weave/sharing.h"
#include "weave/transport.h"

namespace weave {

struct OpenedValue {
  // Sum of the provenance shares; for vector_mul results, its truncation.
  RingElement value;
  // Announced value share of every party, in party order.
  std::vector<RingElement> provenance;
  bool checked = false;
};

// Throws std::logic_error if any value has not been covered by a MAC check.
void require_checked(std::span<const OpenedValue> values);

struct TranscriptEntry {
  std::uint32_t round = 0;
  PartyId sender;
  MessageKind kind = MessageKind::kShareAnnounce;
  std::array<std::uint8_t, 32> digest{};  // BLAKE2b-256 of the payload
};

// Append-only log of every message a party sent or consumed. For broadcast
// rounds the entries of all parties are logged in party order, so honest
// parties of a deterministic run hold byte-identical transcripts.
class Transcript {
 public:
  void append(std::uint32_t round, PartyId sender, MessageKind kind,
              std::span<const std::uint8_t> payload);
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  // Entry records: round (u32 BE), sender (u16 BE), kind (u8), digest.
  std::vector<std::uint8_t> bytes() const;
  std::array<std::uint8_t, 32> digest() const;

 private:
  std::vector<TranscriptEntry> entries_;
};

class Engine {
 public:
  Engine(Network& net, Preprocessing& pre);

  PartyId self() const { return self_; }
  int parties() const { return n_; }
  MacKeyShare mac_key() const { return key_; }
  std::uint32_t round() const { return round_; }
  const Transcript& transcript() const { return transcript_; }
  std::size_t pending_checks() const { return pending_; }

  // Every party contributes `count` private values in one round. Each owner
  // spends one input mask per value and broadcasts x - r. Returns the shares
  // indexed [owner slot][k]. `mine` must hold exactly `count` values.
  std::vector<std::vector<AuthShare>> input_all(std::span<const RingElement> mine,
                                                std::size_t count);
  // Only `owner` contributes; `values` is ignored at the other parties.
  std::vector<AuthShare> input(PartyId owner, std::span<const RingElement> values,
                               std::size_t count);

  // Broadcasts value shares and sums every party's announcement. The opening
  // joins the pending batch until mac_check(). Provenance is filled only when
  // requested.
  std::vector<OpenedValue> partial_open(std::span<const AuthShare> shares,
                                        bool keep_provenance = true);

  // The batch check draws coefficient r_j for the j-th pending opening from
  // a ChaCha stream keyed by the shared seed and the check counter (exactly
  // prf_ring_vector(seed, counter, batch size)), so c and gamma(c) are
  // accumulated as openings arrive instead of storing the batch.
  //
  // Checks every pending opening in two rounds: sigma announcement, then a
  // verdict round so that honest parties abort together. On success flips
  // `covered` to checked. On failure broadcasts ABORT and throws
  // MacCheckFailed. An abort from any peer surfaces as ProtocolAbort.
  void mac_check(std::span<OpenedValue> covered = {});

  // Beaver multiplication of x[k] * y[k] for all k, with all masked
  // differences opened in one round. The openings join the pending batch.
  std::vector<AuthShare> multiply(std::span<const AuthShare> x, std::span<const AuthShare> y);
  AuthShare beaver_mul(const AuthShare& x, const AuthShare& y);

  // Dot products of equal-length fixed-point vectors: rows[k] . cols[k], all
  // in one multiplication round, then opened, MAC-checked and truncated.
  std::vector<OpenedValue> vector_mul_batch(std::span<const std::vector<AuthShare>> theta,
                                            std::span<const std::vector<AuthShare>> v,
                                            const FixedPointCodec& codec);
  OpenedValue vector_mul(std::span<const AuthShare> theta, std::span<const AuthShare> v,
                         const FixedPointCodec& codec);

  AuthShare add_constant(const AuthShare& a, RingElement c) const {
    return add_public(a, c, key_, self_);
  }
  AuthShare constant(RingElement c) const { return public_share(c, key_, self_); }

 private:
  // Broadcasts `payload` for the current round and collects every party's
  // payload (own included) in party order. Advances the round.
  std::vector<std::vector<std::uint8_t>> exchange(MessageKind kind,
                                                  std::vector<std::uint8_t> payload);
  [[noreturn]] void fail(const std::string& why);

  Network& net_;
  Preprocessing& pre_;
  PartyId self_;
  int n_;
  MacKeyShare key_;
  std::uint32_t round_ = 0;
  std::uint64_t checks_ = 0;
  void absorb(RingElement value, RingElement mac);

  std::unique_ptr<ChaChaRng> coeffs_;
  std::size_t pending_ = 0;
  RingElement acc_value_;  // sum r_j * m_j
  RingElement acc_mac_;    // sum r_j * gamma(m_j)^(i)
  Transcript transcript_;
};

}  // namespace weave

#endif  // WEAVE_PROTOCOL_H_
