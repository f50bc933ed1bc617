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

#include "weave/random.h"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace weave {
namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

constexpr std::array<std::uint8_t, 4096> kZeros{};

}  // namespace

Seed seed_from_u64(std::uint64_t seed) {
  return derive_seed(Seed{}, "weave/run-seed", seed);
}

Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index) {
  ensure_sodium();
  std::vector<std::uint8_t> msg(label.begin(), label.end());
  for (int i = 0; i < 8; ++i) msg.push_back(static_cast<std::uint8_t>(index >> (8 * i)));
  Seed out;
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), parent.data(),
                     parent.size());
  return out;
}

std::array<std::uint8_t, 32> hash256(std::span<const std::uint8_t> data) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out;
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

RingElement RandomSource::next_ring() {
  std::array<std::uint8_t, kWordBytes> bytes;
  fill(bytes);
  return decode_word(std::span<const std::uint8_t, kWordBytes>(bytes));
}

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> bytes;
  fill(bytes);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

ChaChaRng::ChaChaRng(const Seed& key, std::uint64_t stream) : key_(key) {
  ensure_sodium();
  for (int i = 0; i < 8; ++i) nonce_[i] = static_cast<std::uint8_t>(stream >> (8 * i));
}

void ChaChaRng::refill() {
  static_assert(sizeof(buffer_) % 64 == 0);
  crypto_stream_chacha20_xor_ic(buffer_.data(), kZeros.data(), buffer_.size(), nonce_.data(),
                                block_counter_, key_.data());
  block_counter_ += buffer_.size() / 64;
  pos_ = 0;
}

void ChaChaRng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) refill();
    const std::size_t take = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, take);
    pos_ += take;
    done += take;
  }
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

std::vector<RingElement> prf_ring_vector(const Seed& key, std::uint64_t counter,
                                         std::size_t count) {
  ChaChaRng rng(key, counter);
  std::vector<std::uint8_t> bytes(count * kWordBytes);
  rng.fill(bytes);
  return parse_words(bytes);
}

}  // namespace weave
