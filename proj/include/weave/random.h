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

#ifndef WEAVE_RANDOM_H_
#define WEAVE_RANDOM_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "weave/ring.h"

namespace weave {

using Seed = std::array<std::uint8_t, 32>;

// Expands a 64-bit run seed into key material.
Seed seed_from_u64(std::uint64_t seed);
// Domain-separated child key: BLAKE2b(parent, label || index).
Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index = 0);

// Unkeyed BLAKE2b-256.
std::array<std::uint8_t, 32> hash256(std::span<const std::uint8_t> data);

// Source of uniformly random bytes. share() and the dealer take one of these
// by reference; a single instance must not be used from two threads at once.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  RingElement next_ring();
  std::uint64_t next_u64();
};

// Deterministic ChaCha20 keystream. Two instances with the same key and
// stream id produce identical sequences, which is what tests and the
// shared-randomness derivation rely on.
class ChaChaRng final : public RandomSource {
 public:
  explicit ChaChaRng(const Seed& key, std::uint64_t stream = 0);
  explicit ChaChaRng(std::uint64_t seed, std::uint64_t stream = 0)
      : ChaChaRng(seed_from_u64(seed), stream) {}

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  Seed key_;
  std::array<std::uint8_t, 8> nonce_{};
  std::uint64_t block_counter_ = 0;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = 4096;
};

// Operating-system entropy (libsodium randombytes). Not reproducible.
class SystemRng final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Counter-mode PRF: the count ring elements keyed by (key, counter). Every
// party holding the same key derives the same vector.
std::vector<RingElement> prf_ring_vector(const Seed& key, std::uint64_t counter,
                                         std::size_t count);

}  // namespace weave

#endif  // WEAVE_RANDOM_H_
