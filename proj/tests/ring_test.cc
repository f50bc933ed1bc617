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

#include "weave/ring.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "weave/errors.h"

namespace weave {
namespace {

TEST(RingTest, AddWraps) {
  EXPECT_EQ(ring_add(RingElement(5), RingElement(7)), RingElement(12));
  EXPECT_EQ(ring_add(RingElement(~Word{0}), RingElement(1)), RingElement(0));
}

TEST(RingTest, AdditiveInverse) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 100; ++i) {
    const RingElement x(static_cast<Word>(gen()) << 1 | 1);
    EXPECT_EQ(ring_add(x, ring_neg(x)), RingElement(0));
  }
}

TEST(RingTest, MulWraps) {
  EXPECT_EQ(ring_mul(RingElement(3), RingElement(4)), RingElement(12));
  const RingElement a(0xdeadbeefcafef00dULL);
  EXPECT_EQ(ring_mul(a, RingElement(1)), a);
  const RingElement half(Word{1} << (kRingBits / 2));
  EXPECT_EQ(ring_mul(half, half), RingElement(0));
}

TEST(RingTest, AddIsAssociativeAndCommutative) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 1000; ++i) {
    const RingElement a(gen()), b(gen()), c(gen());
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ((a + b) + c, a + (b + c));
  }
}

TEST(RingTest, WordCodecRoundTrip) {
  std::vector<RingElement> xs = {RingElement(0), RingElement(1), RingElement(~Word{0}),
                                 RingElement(0x0102030405060708ULL)};
  std::vector<std::uint8_t> bytes;
  append_words(bytes, xs);
  ASSERT_EQ(bytes.size(), xs.size() * kWordBytes);
  EXPECT_EQ(bytes[3 * kWordBytes], 0x08);  // little-endian
  EXPECT_EQ(parse_words(bytes), xs);
  bytes.pop_back();
  EXPECT_THROW(parse_words(bytes), FormatError);
}

TEST(FixedPointTest, RejectsBadPrecision) {
  EXPECT_THROW(FixedPointCodec(0), std::invalid_argument);
  EXPECT_THROW(FixedPointCodec((kRingBits - 16) / 2 + 1), std::invalid_argument);
  EXPECT_NO_THROW(FixedPointCodec((kRingBits - 16) / 2));
  EXPECT_THROW(FixedPointCodec(8, kRingBits == 64 ? 128 : 64), std::invalid_argument);
}

TEST(FixedPointTest, QuantizeExamples) {
  const FixedPointCodec codec(8);
  EXPECT_EQ(codec.quantize(0.5), RingElement(128));
  EXPECT_EQ(codec.quantize(-1.0), RingElement(Word{0} - 256));
  // 0.1 * 256 = 25.6, nearest integer 26.
  EXPECT_EQ(codec.quantize(0.1), RingElement(26));
  EXPECT_EQ(codec.quantize(0.0), RingElement(0));
}

TEST(FixedPointTest, QuantizeRejectsOutOfRange) {
  const FixedPointCodec codec(8);
  const double bound = std::ldexp(1.0, kRingBits - 1 - 8);
  EXPECT_THROW(codec.quantize(bound), RangeError);
  EXPECT_THROW(codec.quantize(-bound), RangeError);
  EXPECT_THROW(codec.quantize(std::numeric_limits<double>::infinity()), RangeError);
  EXPECT_THROW(codec.quantize(std::numeric_limits<double>::quiet_NaN()), RangeError);
  EXPECT_NO_THROW(codec.quantize(1e6));
}

TEST(FixedPointTest, DequantizeExamples) {
  const FixedPointCodec codec(8);
  EXPECT_DOUBLE_EQ(codec.dequantize(RingElement(128)), 0.5);
  EXPECT_DOUBLE_EQ(codec.dequantize(RingElement(0)), 0.0);
  EXPECT_LE(std::abs(codec.dequantize(codec.quantize(0.3)) - 0.3), std::ldexp(1.0, -9));
}

TEST(FixedPointTest, RoundTripBound) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int p : {1, 8, 16}) {
    const FixedPointCodec codec(p);
    for (int i = 0; i < 1000; ++i) {
      const double m = u(gen);
      EXPECT_LE(std::abs(codec.dequantize(codec.quantize(m)) - m), std::ldexp(1.0, -p - 1));
    }
  }
}

TEST(FixedPointTest, QuantizeIsMonotone) {
  const FixedPointCodec codec(8);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    EXPECT_LE(codec.quantize(a).to_signed(), codec.quantize(b).to_signed());
  }
}

TEST(FixedPointTest, TruncateExamples) {
  const FixedPointCodec codec(8);
  EXPECT_EQ(codec.truncate(RingElement(1 << 16)), RingElement(256));
  EXPECT_EQ(codec.truncate(RingElement(0)), RingElement(0));
  // Round half up on the signed value.
  EXPECT_EQ(codec.truncate(RingElement(128)), RingElement(1));
  EXPECT_EQ(codec.truncate(RingElement(127)), RingElement(0));
  EXPECT_EQ(codec.truncate(RingElement::from_signed(-128)), RingElement(0));
  EXPECT_EQ(codec.truncate(RingElement::from_signed(-129)), RingElement::from_signed(-1));
}

TEST(FixedPointTest, TruncateClampsToRepresentableRange) {
  const FixedPointCodec codec(8);
  const SignedWord hi = SignedWord{1} << (kRingBits - 1 - 8);
  // The largest signed ring value divided by 2^8 lands exactly on the bound.
  const RingElement max = RingElement::from_signed(std::numeric_limits<SignedWord>::max());
  EXPECT_EQ(codec.truncate(max).to_signed(), hi - 1);
  const RingElement min = RingElement::from_signed(std::numeric_limits<SignedWord>::min());
  EXPECT_EQ(codec.truncate(min).to_signed(), -hi);
}

TEST(FixedPointTest, TruncatedProductMatchesFloatProduct) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const FixedPointCodec codec(8);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(gen), b = u(gen);
    const double got = codec.dequantize(codec.truncate(codec.quantize(a) * codec.quantize(b)));
    EXPECT_LE(std::abs(got - a * b), std::ldexp(1.0, -8 + 1)) << a << " * " << b;
  }
}

TEST(FixedPointTest, SpanOverloads) {
  const FixedPointCodec codec(4);
  const std::vector<double> in = {0.25, -0.5, 3.0};
  std::vector<RingElement> enc(in.size());
  codec.quantize(in, enc);
  std::vector<double> out(in.size());
  codec.dequantize(enc, out);
  EXPECT_EQ(out, in);
}

}  // namespace
}  // namespace weave
