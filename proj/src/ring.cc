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

#include <cmath>
#include <stdexcept>
#include <string>

#include "weave/errors.h"

namespace weave {

void encode_word(RingElement x, std::span<std::uint8_t, kWordBytes> out) {
  Word v = x.value;
  for (std::size_t i = 0; i < kWordBytes; ++i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

RingElement decode_word(std::span<const std::uint8_t, kWordBytes> in) {
  Word v = 0;
  for (std::size_t i = kWordBytes; i-- > 0;) {
    v = (v << 8) | in[i];
  }
  return RingElement(v);
}

void append_words(std::vector<std::uint8_t>& out, std::span<const RingElement> xs) {
  const std::size_t offset = out.size();
  out.resize(offset + xs.size() * kWordBytes);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    encode_word(xs[i], std::span<std::uint8_t, kWordBytes>(out.data() + offset + i * kWordBytes,
                                                           kWordBytes));
  }
}

std::vector<RingElement> parse_words(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kWordBytes != 0) {
    throw FormatError("ring payload of " + std::to_string(bytes.size()) +
                      " bytes is not a multiple of the word size");
  }
  std::vector<RingElement> out(bytes.size() / kWordBytes);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = decode_word(
        std::span<const std::uint8_t, kWordBytes>(bytes.data() + i * kWordBytes, kWordBytes));
  }
  return out;
}

FixedPointCodec::FixedPointCodec(int precision_bits, int kappa)
    : precision_(precision_bits), kappa_(kappa) {
  if (kappa != kRingBits) {
    throw std::invalid_argument("kappa=" + std::to_string(kappa) + " but this build uses a " +
                                std::to_string(kRingBits) + "-bit ring");
  }
  if (precision_bits < 1 || 2 * precision_bits + kHeadroomBits > kappa) {
    throw std::invalid_argument("precision p=" + std::to_string(precision_bits) +
                                " violates 1 <= p and 2p + 16 <= kappa");
  }
}

double FixedPointCodec::representable_bound() const {
  return std::ldexp(1.0, kappa_ - 1 - precision_);
}

RingElement FixedPointCodec::quantize(double m) const {
  if (!std::isfinite(m) || std::fabs(m) >= representable_bound()) {
    throw RangeError("value " + std::to_string(m) + " outside fixed-point range (p=" +
                     std::to_string(precision_) + ", kappa=" + std::to_string(kappa_) + ")");
  }
  // |m * 2^p| < 2^{kappa-1}, so the rounded value fits the signed word.
  const double scaled = std::round(std::ldexp(m, precision_));
  return RingElement::from_signed(static_cast<SignedWord>(scaled));
}

double FixedPointCodec::dequantize(RingElement x) const {
  return std::ldexp(static_cast<double>(x.to_signed()), -precision_);
}

RingElement FixedPointCodec::truncate(RingElement x) const {
  const SignedWord s = x.to_signed();
  const SignedWord half = SignedWord{1} << (precision_ - 1);
  // floor((s + half) / 2^p) without overflowing at the top of the range.
  SignedWord q = s >> precision_;
  const SignedWord rem = s - (q << precision_);  // in [0, 2^p)
  if (rem >= half) ++q;
  const SignedWord hi = SignedWord{1} << (kappa_ - 1 - precision_);
  if (q >= hi) q = hi - 1;
  if (q < -hi) q = -hi;
  return RingElement::from_signed(q);
}

void FixedPointCodec::quantize(std::span<const double> in, std::span<RingElement> out) const {
  if (in.size() != out.size()) throw ShapeMismatch("quantize: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = quantize(in[i]);
}

void FixedPointCodec::dequantize(std::span<const RingElement> in, std::span<double> out) const {
  if (in.size() != out.size()) throw ShapeMismatch("dequantize: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = dequantize(in[i]);
}

}  // namespace weave
