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

#ifndef WEAVE_RING_H_
#define WEAVE_RING_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace weave {

// The ring Z_{2^kappa}. kappa is fixed at build time: 64 by default, 128 with
// -DWEAVE_RING_128=ON. Arithmetic on the native word wraps silently, which is
// exactly reduction modulo 2^kappa.
#ifdef WEAVE_RING_128
using Word = unsigned __int128;
using SignedWord = __int128;
inline constexpr int kRingBits = 128;
#else
using Word = std::uint64_t;
using SignedWord = std::int64_t;
inline constexpr int kRingBits = 64;
#endif
inline constexpr std::size_t kWordBytes = kRingBits / 8;

// An element of Z_{2^kappa}. Decoded as a two's-complement signed value when a
// real number is needed.
struct RingElement {
  Word value = 0;

  constexpr RingElement() = default;
  constexpr explicit RingElement(Word v) : value(v) {}

  static constexpr RingElement from_signed(SignedWord v) {
    return RingElement(static_cast<Word>(v));
  }
  constexpr SignedWord to_signed() const { return static_cast<SignedWord>(value); }

  friend constexpr bool operator==(RingElement, RingElement) = default;

  constexpr RingElement& operator+=(RingElement o) {
    value += o.value;
    return *this;
  }
  constexpr RingElement& operator-=(RingElement o) {
    value -= o.value;
    return *this;
  }
  constexpr RingElement& operator*=(RingElement o) {
    value *= o.value;
    return *this;
  }
  friend constexpr RingElement operator+(RingElement a, RingElement b) { return a += b; }
  friend constexpr RingElement operator-(RingElement a, RingElement b) { return a -= b; }
  friend constexpr RingElement operator*(RingElement a, RingElement b) { return a *= b; }
  friend constexpr RingElement operator-(RingElement a) { return RingElement(Word{0} - a.value); }
};

constexpr RingElement ring_add(RingElement a, RingElement b) { return a + b; }
constexpr RingElement ring_mul(RingElement a, RingElement b) { return a * b; }
constexpr RingElement ring_neg(RingElement a) { return -a; }

// Little-endian fixed-width (kWordBytes) encoding used on the wire and on disk.
void encode_word(RingElement x, std::span<std::uint8_t, kWordBytes> out);
RingElement decode_word(std::span<const std::uint8_t, kWordBytes> in);
void append_words(std::vector<std::uint8_t>& out, std::span<const RingElement> xs);
std::vector<RingElement> parse_words(std::span<const std::uint8_t> bytes);

// Fixed-point encoding Q(m, p) = round(m * 2^p) into the ring.
//
// The codec keeps one product of two encodings (scale 2^{2p}) plus at least
// kHeadroomBits of accumulation room inside kappa bits, so an n-term sum of
// products never wraps for any realistic n.
class FixedPointCodec {
 public:
  static constexpr int kHeadroomBits = 16;

  // Throws std::invalid_argument unless 1 <= p and 2p + 16 <= kappa.
  explicit FixedPointCodec(int precision_bits = 8, int kappa = kRingBits);

  int precision() const { return precision_; }
  int kappa() const { return kappa_; }

  // Largest magnitude accepted by quantize(): 2^{kappa-1-p}.
  double representable_bound() const;

  // Throws RangeError when |m| >= representable_bound() or m is not finite.
  RingElement quantize(double m) const;
  double dequantize(RingElement x) const;

  // Rescales a product of two encodings from 2^{2p} back to 2^p: the signed
  // value is divided by 2^p with round-half-up, then clamped to the
  // representable fixed-point range [-2^{kappa-1-p}, 2^{kappa-1-p}). Never
  // faults.
  RingElement truncate(RingElement x) const;

  void quantize(std::span<const double> in, std::span<RingElement> out) const;
  void dequantize(std::span<const RingElement> in, std::span<double> out) const;

 private:
  int precision_;
  int kappa_;
};

inline RingElement quantize(double m, const FixedPointCodec& codec) { return codec.quantize(m); }
inline double dequantize(RingElement x, const FixedPointCodec& codec) { return codec.dequantize(x); }
inline RingElement truncate(RingElement x, const FixedPointCodec& codec) { return codec.truncate(x); }

}  // namespace weave

#endif  // WEAVE_RING_H_
