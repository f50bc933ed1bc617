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

#ifndef WEAVE_PREPROCESSING_H_
#define WEAVE_PREPROCESSING_H_

// Offline phase, realised by a trusted dealer.
//
// The dealer samples an odd MAC key alpha, splits it among the parties, and
// hands every party its slice of:
//   * Beaver triples ([a], [b], [c = a*b]), consumed by one multiplication each;
//   * input masks [r] where the owning party additionally learns r, used to
//     turn a private input into an authenticated sharing;
//   * a seed shared by all parties, from which MAC-check coefficients are
//     derived.
// Material is either dealt up front (deal(), preprocessing files) or streamed
// on demand to in-process parties (StreamingDealer).

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "weave/random.h"
#include "weave/sharing.h"

namespace weave {

struct BeaverTriple {
  std::uint64_t index = 0;
  AuthShare a, b, c;
};

struct InputMask {
  std::uint64_t index = 0;
  AuthShare share;
  // r itself; present only in the owning party's slice.
  std::optional<RingElement> clear;
};

// Everything one party receives from the dealer.
struct PartyMaterial {
  PartyId party;
  int parties = 0;
  MacKeyShare key;
  Seed shared_seed{};
  std::vector<BeaverTriple> triples;
  // masks[owner.slot()] are masks for inputs provided by `owner`.
  std::vector<std::vector<InputMask>> masks;
};

using PreprocessingBundle = std::vector<PartyMaterial>;

// Deals n slices. alpha is forced odd so that any odd additive error on an
// opened value is caught by the MAC check with certainty.
PreprocessingBundle deal(int n, std::uint64_t num_triples, RandomSource& rng,
                         std::uint64_t masks_per_owner = 0);

// Per-party view of the offline material. Parties must consume in identical
// order; every item is handed out at most once.
class Preprocessing {
 public:
  virtual ~Preprocessing() = default;
  virtual PartyId party() const = 0;
  virtual int parties() const = 0;
  virtual MacKeyShare mac_key() const = 0;
  virtual const Seed& shared_seed() const = 0;
  // Throws TriplesExhausted when the pool is empty.
  virtual BeaverTriple take_triple() = 0;
  virtual InputMask take_input_mask(PartyId owner) = 0;
  virtual std::uint64_t triples_taken() const = 0;
};

// Preprocessing backed by a finite, pre-dealt pool (a file or deal()).
class PooledPreprocessing final : public Preprocessing {
 public:
  explicit PooledPreprocessing(PartyMaterial material);

  PartyId party() const override { return material_.party; }
  int parties() const override { return material_.parties; }
  MacKeyShare mac_key() const override { return material_.key; }
  const Seed& shared_seed() const override { return material_.shared_seed; }
  BeaverTriple take_triple() override;
  InputMask take_input_mask(PartyId owner) override;
  std::uint64_t triples_taken() const override { return next_triple_; }
  std::uint64_t triples_remaining() const { return material_.triples.size() - next_triple_; }

 private:
  PartyMaterial material_;
  std::uint64_t next_triple_ = 0;
  std::vector<std::uint64_t> next_mask_;
};

// Unbounded dealer shared by in-process parties. Items are generated in
// chunks from ChaCha streams keyed by the dealer seed, so the i-th triple (or
// the i-th mask of a given owner) is a pure function of the seed regardless
// of thread interleaving. Chunks are released once every party has moved past
// them.
class StreamingDealer : public std::enable_shared_from_this<StreamingDealer> {
 public:
  static std::shared_ptr<StreamingDealer> create(int n, const Seed& seed);

  int parties() const { return n_; }
  std::unique_ptr<Preprocessing> view(PartyId party);

  // Dealer-side knowledge, exposed for oracles in tests and the harness.
  RingElement mac_key() const { return alpha_; }

 private:
  StreamingDealer(int n, const Seed& seed);

  template <class Item>
  class Stream;

  class View;

  int n_;
  Seed seed_;
  RingElement alpha_;
  std::vector<MacKeyShare> keys_;
  Seed shared_seed_;
  std::unique_ptr<Stream<BeaverTriple>> triples_;
  std::vector<std::unique_ptr<Stream<InputMask>>> masks_;
};

// Preprocessing file ("VTLP"): magic, version byte, kappa byte, n (u16 LE),
// party index (u16 LE), triple count (u64 LE), alpha_i, 32-byte shared seed,
// packed triples (a, b, c as AuthShare records), then for each owner a u64 LE
// mask count followed by AuthShare records, each trailed by r when the file's
// party is that owner.
inline constexpr std::uint8_t kPreprocessingVersion = 1;
void write_preprocessing_file(const std::filesystem::path& path, const PartyMaterial& material);
PartyMaterial read_preprocessing_file(const std::filesystem::path& path);

}  // namespace weave

#endif  // WEAVE_PREPROCESSING_H_
