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

#include "weave/preprocessing.h"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "weave/errors.h"

namespace weave {
namespace {

RingElement sample_odd_key(RandomSource& rng) {
  return RingElement(rng.next_ring().value | Word{1});
}

std::vector<BeaverTriple> make_triple(std::uint64_t index, int n, RingElement alpha,
                                      RandomSource& rng) {
  const RingElement a = rng.next_ring();
  const RingElement b = rng.next_ring();
  const auto as = share(a, n, alpha, rng);
  const auto bs = share(b, n, alpha, rng);
  const auto cs = share(a * b, n, alpha, rng);
  std::vector<BeaverTriple> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = {index, as[i], bs[i], cs[i]};
  return out;
}

std::vector<InputMask> make_mask(std::uint64_t index, PartyId owner, int n, RingElement alpha,
                                 RandomSource& rng) {
  const RingElement r = rng.next_ring();
  const auto rs = share(r, n, alpha, rng);
  std::vector<InputMask> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i] = {index, rs[i], std::nullopt};
    if (i == static_cast<int>(owner.slot())) out[i].clear = r;
  }
  return out;
}

}  // namespace

PreprocessingBundle deal(int n, std::uint64_t num_triples, RandomSource& rng,
                         std::uint64_t masks_per_owner) {
  if (n < 2) throw std::invalid_argument("deal: need at least two parties");
  const RingElement alpha = sample_odd_key(rng);
  const auto keys = share_key(alpha, n, rng);
  Seed shared_seed;
  rng.fill(shared_seed);

  PreprocessingBundle bundle(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& m = bundle[i];
    m.party = PartyId(i + 1);
    m.parties = n;
    m.key = keys[i];
    m.shared_seed = shared_seed;
    m.triples.reserve(num_triples);
    m.masks.assign(static_cast<std::size_t>(n), {});
  }
  for (std::uint64_t t = 0; t < num_triples; ++t) {
    auto slices = make_triple(t, n, alpha, rng);
    for (int i = 0; i < n; ++i) bundle[i].triples.push_back(slices[i]);
  }
  for (int owner = 1; owner <= n; ++owner) {
    for (std::uint64_t t = 0; t < masks_per_owner; ++t) {
      auto slices = make_mask(t, PartyId(owner), n, alpha, rng);
      for (int i = 0; i < n; ++i) bundle[i].masks[owner - 1].push_back(slices[i]);
    }
  }
  return bundle;
}

PooledPreprocessing::PooledPreprocessing(PartyMaterial material)
    : material_(std::move(material)),
      next_mask_(static_cast<std::size_t>(material_.parties), 0) {
  material_.masks.resize(static_cast<std::size_t>(material_.parties));
}

BeaverTriple PooledPreprocessing::take_triple() {
  if (next_triple_ >= material_.triples.size()) {
    throw TriplesExhausted("party " + std::to_string(material_.party.index()) +
                           ": triple pool exhausted after " + std::to_string(next_triple_) +
                           " multiplications");
  }
  return material_.triples[next_triple_++];
}

InputMask PooledPreprocessing::take_input_mask(PartyId owner) {
  auto& cursor = next_mask_.at(owner.slot());
  const auto& pool = material_.masks.at(owner.slot());
  if (cursor >= pool.size()) {
    throw TriplesExhausted("party " + std::to_string(material_.party.index()) +
                           ": input masks for owner " + std::to_string(owner.index()) +
                           " exhausted after " + std::to_string(cursor) + " inputs");
  }
  return pool[cursor++];
}

// ---------------------------------------------------------------------------
// StreamingDealer

template <class Item>
class StreamingDealer::Stream {
 public:
  using Generator = std::function<std::vector<Item>(std::uint64_t)>;
  // Chunks start small, so short runs stay cheap, and double up to kMaxChunk.
  static constexpr std::uint64_t kFirstChunk = 16;
  static constexpr std::uint64_t kMaxChunk = 4096;

  Stream(int n, Generator gen) : n_(n), gen_(std::move(gen)), cursor_(n, 0) {}

  Item take(PartyId p) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::uint64_t idx = cursor_[p.slot()]++;
    while (idx >= end_) generate_chunk();
    std::size_t c = 0;
    while (idx >= chunks_[c].first + chunks_[c].items.size() / n_) ++c;
    Item item = chunks_[c].items[(idx - chunks_[c].first) * n_ + p.slot()];
    const std::uint64_t low = *std::min_element(cursor_.begin(), cursor_.end());
    while (!chunks_.empty() && low >= chunks_.front().first + chunks_.front().items.size() / n_) {
      chunks_.pop_front();
    }
    return item;
  }

  std::uint64_t taken(PartyId p) const {
    std::lock_guard<std::mutex> lock(mu_);
    return cursor_[p.slot()];
  }

 private:
  struct Chunk {
    std::uint64_t first;
    std::vector<Item> items;  // n_ slices per index
  };

  void generate_chunk() {
    Chunk chunk{end_, {}};
    chunk.items.reserve(next_size_ * n_);
    for (std::uint64_t t = 0; t < next_size_; ++t) {
      auto slices = gen_(end_ + t);
      chunk.items.insert(chunk.items.end(), slices.begin(), slices.end());
    }
    end_ += next_size_;
    next_size_ = std::min(kMaxChunk, 2 * next_size_);
    chunks_.push_back(std::move(chunk));
  }

  int n_;
  Generator gen_;
  mutable std::mutex mu_;
  std::vector<std::uint64_t> cursor_;
  std::deque<Chunk> chunks_;
  std::uint64_t end_ = 0;  // first index not generated yet
  std::uint64_t next_size_ = kFirstChunk;
};

class StreamingDealer::View final : public Preprocessing {
 public:
  View(std::shared_ptr<StreamingDealer> dealer, PartyId party)
      : dealer_(std::move(dealer)), party_(party) {}

  PartyId party() const override { return party_; }
  int parties() const override { return dealer_->n_; }
  MacKeyShare mac_key() const override { return dealer_->keys_[party_.slot()]; }
  const Seed& shared_seed() const override { return dealer_->shared_seed_; }
  BeaverTriple take_triple() override { return dealer_->triples_->take(party_); }
  InputMask take_input_mask(PartyId owner) override {
    return dealer_->masks_.at(owner.slot())->take(party_);
  }
  std::uint64_t triples_taken() const override { return dealer_->triples_->taken(party_); }

 private:
  std::shared_ptr<StreamingDealer> dealer_;
  PartyId party_;
};

std::shared_ptr<StreamingDealer> StreamingDealer::create(int n, const Seed& seed) {
  return std::shared_ptr<StreamingDealer>(new StreamingDealer(n, seed));
}

StreamingDealer::StreamingDealer(int n, const Seed& seed) : n_(n), seed_(seed) {
  if (n < 2) throw std::invalid_argument("StreamingDealer: need at least two parties");
  ChaChaRng setup(derive_seed(seed, "dealer/setup"));
  alpha_ = sample_odd_key(setup);
  keys_ = share_key(alpha_, n, setup);
  setup.fill(shared_seed_);

  auto triple_rng = std::make_shared<ChaChaRng>(derive_seed(seed, "dealer/triples"));
  triples_ = std::make_unique<Stream<BeaverTriple>>(
      n, [n, alpha = alpha_, triple_rng](std::uint64_t t) {
        return make_triple(t, n, alpha, *triple_rng);
      });
  for (int owner = 1; owner <= n; ++owner) {
    auto rng = std::make_shared<ChaChaRng>(derive_seed(seed, "dealer/masks", owner));
    masks_.push_back(std::make_unique<Stream<InputMask>>(
        n, [n, owner, alpha = alpha_, rng](std::uint64_t t) {
          return make_mask(t, PartyId(owner), n, alpha, *rng);
        }));
  }
}

std::unique_ptr<Preprocessing> StreamingDealer::view(PartyId party) {
  if (party.index() < 1 || party.index() > n_) {
    throw std::out_of_range("StreamingDealer::view: no party " + std::to_string(party.index()));
  }
  return std::make_unique<View>(shared_from_this(), party);
}

// ---------------------------------------------------------------------------
// Files

namespace {

constexpr std::array<char, 4> kMagic = {'V', 'T', 'L', 'P'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(std::vector<std::uint8_t> data, std::string name)
      : data_(std::move(data)), name_(std::move(name)) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw FormatError(name_ + ": truncated at byte " + std::to_string(pos_));
    }
    auto s = std::span<const std::uint8_t>(data_).subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t le(int bytes) {
    auto s = take(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | s[i];
    return v;
  }
  RingElement word() {
    return decode_word(std::span<const std::uint8_t, kWordBytes>(take(kWordBytes).data(),
                                                                 kWordBytes));
  }
  AuthShare auth() {
    const RingElement v = word();
    return {v, word()};
  }
  bool done() const { return pos_ == data_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::vector<std::uint8_t> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_preprocessing_file(const std::filesystem::path& path, const PartyMaterial& m) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kPreprocessingVersion);
  out.push_back(static_cast<std::uint8_t>(kRingBits));
  put_le(out, static_cast<std::uint16_t>(m.parties), 2);
  put_le(out, static_cast<std::uint16_t>(m.party.index()), 2);
  put_le(out, static_cast<std::uint64_t>(m.triples.size()), 8);
  const RingElement key[1] = {m.key.alpha_i};
  append_words(out, key);
  out.insert(out.end(), m.shared_seed.begin(), m.shared_seed.end());
  for (const auto& t : m.triples) {
    append_share(out, t.a);
    append_share(out, t.b);
    append_share(out, t.c);
  }
  for (int owner = 1; owner <= m.parties; ++owner) {
    const auto& pool = owner - 1 < static_cast<int>(m.masks.size())
                           ? m.masks[owner - 1]
                           : std::vector<InputMask>{};
    put_le(out, static_cast<std::uint64_t>(pool.size()), 8);
    for (const auto& mask : pool) {
      append_share(out, mask.share);
      if (owner == m.party.index()) {
        if (!mask.clear) throw FormatError("owner slice of an input mask lacks its clear value");
        const RingElement r[1] = {*mask.clear};
        append_words(out, r);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write to " + path.string() + " failed");
}

PartyMaterial read_preprocessing_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw FormatError(path.string() + ": bad magic, not a preprocessing file");
  }
  const auto version = r.le(1);
  if (version != kPreprocessingVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto kappa = r.le(1);
  if (static_cast<int>(kappa) != kRingBits) {
    throw FormatError(path.string() + ": kappa=" + std::to_string(kappa) +
                      " does not match this build (" + std::to_string(kRingBits) + ")");
  }
  PartyMaterial m;
  m.parties = static_cast<int>(r.le(2));
  m.party = PartyId(static_cast<int>(r.le(2)));
  if (m.parties < 2 || m.party.index() < 1 || m.party.index() > m.parties) {
    throw FormatError(path.string() + ": invalid party header");
  }
  const std::uint64_t triples = r.le(8);
  m.key = {r.word()};
  auto seed = r.take(m.shared_seed.size());
  std::copy(seed.begin(), seed.end(), m.shared_seed.begin());
  m.triples.reserve(triples);
  for (std::uint64_t t = 0; t < triples; ++t) {
    BeaverTriple bt;
    bt.index = t;
    bt.a = r.auth();
    bt.b = r.auth();
    bt.c = r.auth();
    m.triples.push_back(bt);
  }
  m.masks.resize(static_cast<std::size_t>(m.parties));
  for (int owner = 1; owner <= m.parties; ++owner) {
    const std::uint64_t count = r.le(8);
    auto& pool = m.masks[owner - 1];
    pool.reserve(count);
    for (std::uint64_t t = 0; t < count; ++t) {
      InputMask mask{t, r.auth(), std::nullopt};
      if (owner == m.party.index()) mask.clear = r.word();
      pool.push_back(mask);
    }
  }
  if (!r.done()) {
    throw FormatError(path.string() + ": trailing bytes after offset " + std::to_string(r.pos()));
  }
  return m;
}

}  // namespace weave
