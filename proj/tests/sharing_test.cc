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

#include <gtest/gtest.h>

#include <map>

namespace weave {
namespace {

class SharingTest : public ::testing::Test {
 protected:
  ChaChaRng rng_{42};
  RingElement alpha_ = RingElement(0x9e3779b97f4a7c15ULL);
};

TEST_F(SharingTest, ShareOf42ReconstructsForThreeParties) {
  const auto s = share(RingElement(42), 3, alpha_, rng_);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(reconstruct(s), RingElement(42));
  EXPECT_EQ(reconstruct_mac(s), alpha_ * RingElement(42));
}

TEST_F(SharingTest, ZeroSplitsIntoNegatedPair) {
  const auto s = share(RingElement(0), 2, alpha_, rng_);
  EXPECT_EQ(s[1].value, -s[0].value);
  EXPECT_EQ(reconstruct(s), RingElement(0));
}

TEST_F(SharingTest, RejectsSinglePartySharing) {
  EXPECT_THROW(share(RingElement(1), 1, alpha_, rng_), std::invalid_argument);
  EXPECT_THROW(share_key(alpha_, 1, rng_), std::invalid_argument);
}

TEST_F(SharingTest, RandomValuesReconstructWithValidMacs) {
  for (int i = 0; i < 1000; ++i) {
    const RingElement x = rng_.next_ring();
    const auto s = share(x, 2 + i % 5, alpha_, rng_);
    EXPECT_EQ(reconstruct(s), x);
    EXPECT_EQ(reconstruct_mac(s), alpha_ * x);
  }
}

TEST_F(SharingTest, KeySharesSumToKey) {
  const auto keys = share_key(alpha_, 4, rng_);
  EXPECT_EQ(reconstruct_key(keys), alpha_);
}

TEST_F(SharingTest, AddShares) {
  const auto a = share(RingElement(3), 3, alpha_, rng_);
  const auto b = share(RingElement(4), 3, alpha_, rng_);
  const auto z = share(RingElement(0), 3, alpha_, rng_);
  std::vector<AuthShare> sum, same;
  for (int i = 0; i < 3; ++i) {
    sum.push_back(add_shares(a[i], b[i]));
    same.push_back(add_shares(a[i], z[i]));
  }
  EXPECT_EQ(reconstruct(sum), RingElement(7));
  EXPECT_EQ(reconstruct_mac(sum), alpha_ * RingElement(7));
  EXPECT_EQ(reconstruct(same), RingElement(3));
  for (int t = 0; t < 200; ++t) {
    const RingElement x = rng_.next_ring(), y = rng_.next_ring();
    const auto xs = share(x, 4, alpha_, rng_), ys = share(y, 4, alpha_, rng_);
    std::vector<AuthShare> s;
    for (int i = 0; i < 4; ++i) s.push_back(add_shares(xs[i], ys[i]));
    EXPECT_EQ(reconstruct_mac(s), alpha_ * (x + y));
  }
}

TEST_F(SharingTest, MulPublic) {
  const auto a = share(RingElement(5), 3, alpha_, rng_);
  for (auto [c, want] : std::map<Word, Word>{{3, 15}, {0, 0}, {1, 5}}) {
    std::vector<AuthShare> s;
    for (const auto& x : a) s.push_back(mul_public(x, RingElement(c)));
    EXPECT_EQ(reconstruct(s), RingElement(want));
    EXPECT_EQ(reconstruct_mac(s), alpha_ * RingElement(want));
  }
}

TEST_F(SharingTest, AddPublicKeepsMacValid) {
  const auto keys = share_key(alpha_, 3, rng_);
  const auto a = share(RingElement(5), 3, alpha_, rng_);
  std::vector<AuthShare> plus2, plus0;
  for (int i = 0; i < 3; ++i) {
    plus2.push_back(add_public(a[i], RingElement(2), keys[i], PartyId(i + 1)));
    plus0.push_back(add_public(a[i], RingElement(0), keys[i], PartyId(i + 1)));
  }
  EXPECT_EQ(reconstruct(plus2), RingElement(7));
  EXPECT_EQ(plus0, a);
  // Only party 1 moves its value share.
  EXPECT_EQ(plus2[1].value, a[1].value);
  EXPECT_EQ(plus2[2].value, a[2].value);

  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 4;
    const auto ks = share_key(alpha_, n, rng_);
    const RingElement x = rng_.next_ring(), c = rng_.next_ring();
    const auto xs = share(x, n, alpha_, rng_);
    std::vector<AuthShare> s;
    for (int i = 0; i < n; ++i) s.push_back(add_public(xs[i], c, ks[i], PartyId(i + 1)));
    ASSERT_EQ(reconstruct(s), x + c);
    ASSERT_EQ(reconstruct_mac(s), alpha_ * (x + c));
  }
}

TEST_F(SharingTest, LinearCompositionKeepsMacRelation) {
  const int n = 3;
  const auto keys = share_key(alpha_, n, rng_);
  for (int t = 0; t < 200; ++t) {
    const RingElement x = rng_.next_ring(), y = rng_.next_ring();
    const RingElement c = rng_.next_ring(), d = rng_.next_ring();
    const auto xs = share(x, n, alpha_, rng_), ys = share(y, n, alpha_, rng_);
    std::vector<AuthShare> s;
    for (int i = 0; i < n; ++i) {
      const PartyId me(i + 1);
      s.push_back(add_public(sub_shares(mul_public(xs[i], c), ys[i]), d, keys[i], me));
    }
    const RingElement want = c * x - y + d;
    EXPECT_EQ(reconstruct(s), want);
    EXPECT_EQ(reconstruct_mac(s), alpha_ * want);
  }
}

TEST_F(SharingTest, PublicShareReconstructsToConstant) {
  const auto keys = share_key(alpha_, 3, rng_);
  std::vector<AuthShare> s;
  for (int i = 0; i < 3; ++i) s.push_back(public_share(RingElement(9), keys[i], PartyId(i + 1)));
  EXPECT_EQ(reconstruct(s), RingElement(9));
  EXPECT_EQ(reconstruct_mac(s), alpha_ * RingElement(9));
}

TEST_F(SharingTest, WireFormatIsValueThenMacLittleEndian) {
  const AuthShare s{RingElement(0x0102), RingElement(0x0a0b)};
  std::vector<std::uint8_t> bytes;
  append_share(bytes, s);
  ASSERT_EQ(bytes.size(), kAuthShareBytes);
  EXPECT_EQ(bytes[0], 0x02);
  EXPECT_EQ(bytes[1], 0x01);
  EXPECT_EQ(bytes[kWordBytes], 0x0b);
  EXPECT_EQ(parse_share(std::span<const std::uint8_t, kAuthShareBytes>(bytes.data(),
                                                                      kAuthShareBytes)),
            s);
}

// Any n-1 value shares are uniform regardless of x. With a 2-party split the
// first share must look the same for x = 0 and for random x; compare the top
// byte histograms with a chi-square homogeneity test.
TEST_F(SharingTest, SingleShareIsIndependentOfSecret) {
  constexpr int kSamples = 20000;
  std::vector<int> fixed(256), random(256);
  for (int i = 0; i < kSamples; ++i) {
    const auto a = share(RingElement(0), 2, alpha_, rng_);
    const auto b = share(rng_.next_ring(), 2, alpha_, rng_);
    ++fixed[static_cast<std::uint8_t>(a[1].value.value >> (kRingBits - 8))];
    ++random[static_cast<std::uint8_t>(b[1].value.value >> (kRingBits - 8))];
  }
  double chi2 = 0;
  for (int k = 0; k < 256; ++k) {
    const double tot = fixed[k] + random[k];
    if (tot == 0) continue;
    const double e = tot / 2;
    chi2 += (fixed[k] - e) * (fixed[k] - e) / e + (random[k] - e) * (random[k] - e) / e;
  }
  // 255 degrees of freedom; the 0.999 quantile is about 330.5.
  EXPECT_LT(chi2, 330.5);
}

}  // namespace
}  // namespace weave
