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

#include "weave/sharing.h"

#include <stdexcept>

namespace weave {
namespace {

// r_1..r_{n-1} uniform, last slot gets x - sum r_j.
void split_additive(RingElement x, int n, RandomSource& rng, std::vector<RingElement>& out) {
  out.resize(static_cast<std::size_t>(n));
  RingElement acc;
  for (int j = 0; j + 1 < n; ++j) {
    out[j] = rng.next_ring();
    acc += out[j];
  }
  out[n - 1] = x - acc;
}

}  // namespace

std::vector<AuthShare> share(RingElement x, int n, RingElement alpha, RandomSource& rng) {
  if (n < 2) throw std::invalid_argument("share: need at least two parties");
  std::vector<RingElement> values, macs;
  split_additive(x, n, rng, values);
  split_additive(alpha * x, n, rng, macs);
  std::vector<AuthShare> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = {values[i], macs[i]};
  return out;
}

std::vector<MacKeyShare> share_key(RingElement alpha, int n, RandomSource& rng) {
  if (n < 2) throw std::invalid_argument("share_key: need at least two parties");
  std::vector<RingElement> parts;
  split_additive(alpha, n, rng, parts);
  std::vector<MacKeyShare> out;
  out.reserve(parts.size());
  for (auto p : parts) out.push_back({p});
  return out;
}

RingElement reconstruct(std::span<const AuthShare> shares) {
  RingElement acc;
  for (const auto& s : shares) acc += s.value;
  return acc;
}

RingElement reconstruct_mac(std::span<const AuthShare> shares) {
  RingElement acc;
  for (const auto& s : shares) acc += s.mac;
  return acc;
}

RingElement reconstruct_key(std::span<const MacKeyShare> keys) {
  RingElement acc;
  for (const auto& k : keys) acc += k.alpha_i;
  return acc;
}

void append_share(std::vector<std::uint8_t>& out, const AuthShare& s) {
  const RingElement pair[2] = {s.value, s.mac};
  append_words(out, pair);
}

AuthShare parse_share(std::span<const std::uint8_t, kAuthShareBytes> in) {
  return {decode_word(in.first<kWordBytes>()), decode_word(in.last<kWordBytes>())};
}

}  // namespace weave
