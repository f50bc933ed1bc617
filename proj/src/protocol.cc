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

#include "weave/protocol.h"

#include <stdexcept>
#include <string>

#include "weave/errors.h"
#include "weave/random.h"

namespace weave {

void require_checked(std::span<const OpenedValue> values) {
  for (const auto& v : values) {
    if (!v.checked) throw std::logic_error("opened value used before its MAC check");
  }
}

// ---------------------------------------------------------------------------
// Transcript

void Transcript::append(std::uint32_t round, PartyId sender, MessageKind kind,
                        std::span<const std::uint8_t> payload) {
  entries_.push_back({round, sender, kind, hash256(payload)});
}

std::vector<std::uint8_t> Transcript::bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(entries_.size() * 39);
  for (const auto& e : entries_) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(e.round >> (8 * i)));
    out.push_back(static_cast<std::uint8_t>(e.sender.index() >> 8));
    out.push_back(static_cast<std::uint8_t>(e.sender.index()));
    out.push_back(static_cast<std::uint8_t>(e.kind));
    out.insert(out.end(), e.digest.begin(), e.digest.end());
  }
  return out;
}

std::array<std::uint8_t, 32> Transcript::digest() const { return hash256(bytes()); }

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(Network& net, Preprocessing& pre)
    : net_(net), pre_(pre), self_(net.self()), n_(net.parties()), key_(pre.mac_key()) {
  if (pre.party() != self_ || pre.parties() != n_) {
    throw ConfigError("preprocessing for party " + std::to_string(pre.party().index()) + " of " +
                      std::to_string(pre.parties()) + " used by party " +
                      std::to_string(self_.index()) + " of " + std::to_string(n_));
  }
}

std::vector<std::vector<std::uint8_t>> Engine::exchange(MessageKind kind,
                                                        std::vector<std::uint8_t> payload) {
  const std::uint32_t r = round_++;
  Envelope env;
  env.round = r;
  env.kind = kind;
  env.payload = payload;
  net_.broadcast(env);
  env.payload = std::move(payload);
  net_.intercept_own(env);
  std::vector<std::vector<std::uint8_t>> all(static_cast<std::size_t>(n_));
  for (int j = 1; j <= n_; ++j) {
    all[j - 1] = j == self_.index() ? std::move(env.payload)
                                    : net_.receive(r, PartyId(j), kind).payload;
    transcript_.append(r, PartyId(j), kind, all[j - 1]);
  }
  return all;
}

void Engine::fail(const std::string& why) {
  Envelope env;
  env.round = round_;
  env.kind = MessageKind::kAbort;
  try {
    net_.broadcast(env);
  } catch (const TransportError&) {
    // Peers that are already gone cannot be told.
  }
  // Every caller has just finished the exchange of the round being judged.
  const std::uint32_t judged = round_ == 0 ? 0 : round_ - 1;
  throw MacCheckFailed("party " + std::to_string(self_.index()) + " aborts in round " +
                           std::to_string(judged) + ": " + why,
                       judged, self_.index());
}

namespace {

std::vector<RingElement> parse_exact(std::span<const std::uint8_t> payload, std::size_t count) {
  if (payload.size() != count * kWordBytes) return {};
  return parse_words(payload);
}

}  // namespace

std::vector<std::vector<AuthShare>> Engine::input_all(std::span<const RingElement> mine,
                                                      std::size_t count) {
  if (mine.size() != count) {
    throw ShapeMismatch("input_all: " + std::to_string(mine.size()) + " values for count " +
                        std::to_string(count));
  }
  std::vector<std::vector<InputMask>> masks(static_cast<std::size_t>(n_));
  for (int owner = 1; owner <= n_; ++owner) {
    auto& m = masks[owner - 1];
    m.reserve(count);
    for (std::size_t k = 0; k < count; ++k) m.push_back(pre_.take_input_mask(PartyId(owner)));
  }
  std::vector<RingElement> eps(count);
  for (std::size_t k = 0; k < count; ++k) eps[k] = mine[k] - *masks[self_.slot()][k].clear;
  std::vector<std::uint8_t> payload;
  append_words(payload, eps);

  const auto all = exchange(MessageKind::kInputAnnounce, std::move(payload));
  std::vector<std::vector<AuthShare>> out(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const auto e = parse_exact(all[j], count);
    if (e.size() != count) fail("malformed input announcement from party " + std::to_string(j + 1));
    out[j].resize(count);
    for (std::size_t k = 0; k < count; ++k) out[j][k] = add_constant(masks[j][k].share, e[k]);
  }
  return out;
}

std::vector<AuthShare> Engine::input(PartyId owner, std::span<const RingElement> values,
                                     std::size_t count) {
  std::vector<InputMask> masks;
  masks.reserve(count);
  for (std::size_t k = 0; k < count; ++k) masks.push_back(pre_.take_input_mask(owner));
  const std::uint32_t r = round_++;
  std::vector<std::uint8_t> payload;
  if (owner == self_) {
    if (values.size() != count) {
      throw ShapeMismatch("input: " + std::to_string(values.size()) + " values for count " +
                          std::to_string(count));
    }
    std::vector<RingElement> eps(count);
    for (std::size_t k = 0; k < count; ++k) eps[k] = values[k] - *masks[k].clear;
    append_words(payload, eps);
    Envelope env;
    env.round = r;
    env.kind = MessageKind::kInputAnnounce;
    env.payload = payload;
    net_.broadcast(env);
    net_.intercept_own(env);
    payload = std::move(env.payload);
  } else {
    payload = net_.receive(r, owner, MessageKind::kInputAnnounce).payload;
  }
  transcript_.append(r, owner, MessageKind::kInputAnnounce, payload);
  const auto e = parse_exact(payload, count);
  if (e.size() != count) fail("malformed input announcement from party " +
                              std::to_string(owner.index()));
  std::vector<AuthShare> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = add_constant(masks[k].share, e[k]);
  return out;
}

void Engine::absorb(RingElement value, RingElement mac) {
  if (!coeffs_) coeffs_ = std::make_unique<ChaChaRng>(pre_.shared_seed(), checks_);
  const RingElement r = coeffs_->next_ring();
  acc_value_ += r * value;
  acc_mac_ += r * mac;
  ++pending_;
}

std::vector<OpenedValue> Engine::partial_open(std::span<const AuthShare> shares,
                                              bool keep_provenance) {
  std::vector<RingElement> mine(shares.size());
  for (std::size_t k = 0; k < shares.size(); ++k) mine[k] = shares[k].value;
  std::vector<std::uint8_t> payload;
  append_words(payload, mine);

  const auto all = exchange(MessageKind::kShareAnnounce, std::move(payload));
  std::vector<std::vector<RingElement>> announced(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    announced[j] = parse_exact(all[j], shares.size());
    if (announced[j].size() != shares.size()) {
      fail("malformed share announcement from party " + std::to_string(j + 1));
    }
  }
  std::vector<OpenedValue> out(shares.size());
  for (std::size_t k = 0; k < shares.size(); ++k) {
    auto& o = out[k];
    if (keep_provenance) o.provenance.resize(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) {
      if (keep_provenance) o.provenance[j] = announced[j][k];
      o.value += announced[j][k];
    }
    absorb(o.value, shares[k].mac);
  }
  return out;
}

void Engine::mac_check(std::span<OpenedValue> covered) {
  const RingElement sigma[1] = {acc_mac_ - key_.alpha_i * acc_value_};
  coeffs_.reset();
  ++checks_;
  pending_ = 0;
  acc_value_ = acc_mac_ = RingElement();
  std::vector<std::uint8_t> payload;
  append_words(payload, sigma);

  const auto all = exchange(MessageKind::kSigmaAnnounce, std::move(payload));
  RingElement total;
  for (int j = 0; j < n_; ++j) {
    const auto s = parse_exact(all[j], 1);
    if (s.size() != 1) fail("malformed sigma from party " + std::to_string(j + 1));
    total += s[0];
  }
  if (total != RingElement(0)) fail("MAC check failed: sigma sum is nonzero");

  // Verdict round: a party that failed above sent ABORT instead, which every
  // other party receives here before releasing anything.
  exchange(MessageKind::kBarrier, {});
  for (auto& v : covered) v.checked = true;
}

std::vector<AuthShare> Engine::multiply(std::span<const AuthShare> x,
                                        std::span<const AuthShare> y) {
  if (x.size() != y.size()) {
    throw ShapeMismatch("multiply: operand counts " + std::to_string(x.size()) + " and " +
                        std::to_string(y.size()));
  }
  const std::size_t k = x.size();
  std::vector<BeaverTriple> triples;
  triples.reserve(k);
  for (std::size_t i = 0; i < k; ++i) triples.push_back(pre_.take_triple());

  std::vector<AuthShare> masked(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    masked[i] = sub_shares(x[i], triples[i].a);
    masked[k + i] = sub_shares(y[i], triples[i].b);
  }
  const auto opened = partial_open(masked);
  std::vector<AuthShare> z(k);
  for (std::size_t i = 0; i < k; ++i) {
    const RingElement mu = opened[i].value;
    const RingElement nu = opened[k + i].value;
    const auto& t = triples[i];
    AuthShare acc = add_shares(t.c, add_shares(mul_public(t.b, mu), mul_public(t.a, nu)));
    z[i] = add_constant(acc, mu * nu);
  }
  return z;
}

AuthShare Engine::beaver_mul(const AuthShare& x, const AuthShare& y) {
  const AuthShare xs[1] = {x};
  const AuthShare ys[1] = {y};
  return multiply(xs, ys)[0];
}

std::vector<OpenedValue> Engine::vector_mul_batch(std::span<const std::vector<AuthShare>> theta,
                                                  std::span<const std::vector<AuthShare>> v,
                                                  const FixedPointCodec& codec) {
  if (theta.size() != v.size()) throw ShapeMismatch("vector_mul: row count mismatch");
  std::vector<AuthShare> xs, ys;
  for (std::size_t r = 0; r < theta.size(); ++r) {
    if (theta[r].size() != v[r].size()) {
      throw ShapeMismatch("vector_mul: lengths " + std::to_string(theta[r].size()) + " and " +
                          std::to_string(v[r].size()));
    }
    xs.insert(xs.end(), theta[r].begin(), theta[r].end());
    ys.insert(ys.end(), v[r].begin(), v[r].end());
  }
  const auto products = multiply(xs, ys);
  std::vector<AuthShare> sums(theta.size());
  std::size_t at = 0;
  for (std::size_t r = 0; r < theta.size(); ++r) {
    for (std::size_t j = 0; j < theta[r].size(); ++j) sums[r] = add_shares(sums[r], products[at++]);
  }
  auto opened = partial_open(sums);
  mac_check(opened);
  for (auto& o : opened) o.value = codec.truncate(o.value);
  return opened;
}

OpenedValue Engine::vector_mul(std::span<const AuthShare> theta, std::span<const AuthShare> v,
                               const FixedPointCodec& codec) {
  const std::vector<AuthShare> t(theta.begin(), theta.end());
  const std::vector<AuthShare> x(v.begin(), v.end());
  return vector_mul_batch(std::span(&t, 1), std::span(&x, 1), codec)[0];
}

}  // namespace weave
