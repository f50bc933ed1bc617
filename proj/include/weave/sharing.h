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

#ifndef WEAVE_SHARING_H_
#define WEAVE_SHARING_H_

// MAC-authenticated additive secret sharing over Z_{2^kappa}.
//
// A value x is [x]-shared among n parties when party i holds
// (x^(i), gamma(x)^(i)) with
//
//   sum_i x^(i)        = x          (mod 2^kappa)
//   sum_i gamma(x)^(i) = alpha * x  (mod 2^kappa)
//
// where alpha = sum_i alpha_i is the global MAC key and no party knows alpha.
// All operations here are local; nothing in this header talks to a network.

#include <cstdint>
#include <span>
#include <vector>

#include "weave/random.h"
#include "weave/ring.h"

namespace weave {

// 1-based party index, dense in [1, n].
class PartyId {
 public:
  constexpr PartyId() = default;
  constexpr explicit PartyId(int index) : index_(index) {}
  constexpr int index() const { return index_; }
  constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ - 1); }
  friend constexpr auto operator<=>(PartyId, PartyId) = default;

 private:
  int index_ = 1;
};

struct MacKeyShare {
  RingElement alpha_i;
  friend bool operator==(const MacKeyShare&, const MacKeyShare&) = default;
};

struct AuthShare {
  RingElement value;  // x^(i)
  RingElement mac;    // gamma(x)^(i)
  friend bool operator==(const AuthShare&, const AuthShare&) = default;
};

// Splits x into n authenticated shares under key alpha (dealer-side: whoever
// calls this knows both x and alpha). Parties 1..n-1 receive uniform values;
// party n receives the residual x - sum r_j. MAC shares are an independent
// additive sharing of alpha * x built the same way.
std::vector<AuthShare> share(RingElement x, int n, RingElement alpha, RandomSource& rng);

// Splits a MAC key into n additive shares.
std::vector<MacKeyShare> share_key(RingElement alpha, int n, RandomSource& rng);

// Sum of the value shares. MAC validity is not checked here.
RingElement reconstruct(std::span<const AuthShare> shares);
// Sum of the MAC shares, i.e. gamma(x) for honest shares.
RingElement reconstruct_mac(std::span<const AuthShare> shares);
RingElement reconstruct_key(std::span<const MacKeyShare> keys);

constexpr AuthShare add_shares(AuthShare a, AuthShare b) {
  return {a.value + b.value, a.mac + b.mac};
}
constexpr AuthShare sub_shares(AuthShare a, AuthShare b) {
  return {a.value - b.value, a.mac - b.mac};
}
constexpr AuthShare mul_public(AuthShare a, RingElement c) { return {a.value * c, a.mac * c}; }

// Adds a public constant. Only party 1 shifts its value share (lowest index
// absorbs the constant); every party shifts its MAC share by alpha_i * c so the
// MAC relation keeps holding.
constexpr AuthShare add_public(AuthShare a, RingElement c, MacKeyShare key, PartyId me) {
  return {me.index() == 1 ? a.value + c : a.value, a.mac + key.alpha_i * c};
}

// Share of the public constant c held by party me: add_public applied to a
// sharing of zero.
constexpr AuthShare public_share(RingElement c, MacKeyShare key, PartyId me) {
  return add_public(AuthShare{}, c, key, me);
}

// Wire format: kWordBytes little-endian value share, then kWordBytes
// little-endian MAC share.
inline constexpr std::size_t kAuthShareBytes = 2 * kWordBytes;
void append_share(std::vector<std::uint8_t>& out, const AuthShare& s);
AuthShare parse_share(std::span<const std::uint8_t, kAuthShareBytes> in);

}  // namespace weave

#endif  // WEAVE_SHARING_H_
