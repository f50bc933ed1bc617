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

#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <random>

#include "weave/errors.h"
#include "weave/simulation.h"

namespace weave {
namespace {

LocalRunOptions options(std::uint8_t seed) {
  LocalRunOptions o;
  o.dealer_seed[0] = seed;
  o.timeout = std::chrono::seconds(10);
  return o;
}

// Adds delta to word `index` of a payload.
void shift_word(Envelope& env, std::size_t index, RingElement delta) {
  auto words = parse_words(env.payload);
  words.at(index) += delta;
  env.payload.clear();
  append_words(env.payload, words);
}

// Party 1 inputs `values`; every party opens them.
std::vector<std::vector<RingElement>> open_inputs(int n, const std::vector<RingElement>& values,
                                                  LocalRunOptions opts, bool check,
                                                  LocalRunResult* out = nullptr) {
  std::vector<std::vector<RingElement>> seen(static_cast<std::size_t>(n));
  auto res = run_local(n, opts, [&](Engine& e) {
    const auto shares = e.input(PartyId(1), values, values.size());
    auto opened = e.partial_open(shares);
    if (check) {
      e.mac_check(opened);
      require_checked(opened);
    }
    for (const auto& o : opened) seen[e.self().slot()].push_back(o.value);
  });
  if (out) *out = res;
  res.rethrow();
  return seen;
}

TEST(PartialOpenTest, OpensSmallValues) {
  const auto seen = open_inputs(3, {RingElement(42), RingElement(0)}, options(1), false);
  for (const auto& s : seen) {
    EXPECT_EQ(s[0], RingElement(42));
    EXPECT_EQ(s[1], RingElement(0));
  }
}

TEST(PartialOpenTest, ThousandRandomValuesRoundTrip) {
  ChaChaRng rng(5);
  std::vector<RingElement> values(1000);
  for (auto& v : values) v = rng.next_ring();
  const auto seen = open_inputs(4, values, options(2), true);
  for (const auto& s : seen) EXPECT_EQ(s, values);
}

TEST(PartialOpenTest, OpenedValuesStartUnchecked) {
  run_local(2, options(3), [](Engine& e) {
    const RingElement v[1] = {RingElement(7)};
    const auto shares = e.input(PartyId(2), v, 1);
    auto opened = e.partial_open(shares);
    EXPECT_FALSE(opened[0].checked);
    EXPECT_EQ(opened[0].provenance.size(), 2u);
    EXPECT_EQ(opened[0].provenance[0] + opened[0].provenance[1], RingElement(7));
    EXPECT_THROW(require_checked(opened), std::logic_error);
    EXPECT_EQ(e.pending_checks(), 1u);
    e.mac_check(opened);
    EXPECT_TRUE(opened[0].checked);
    EXPECT_EQ(e.pending_checks(), 0u);
  }).rethrow();
}

TEST(InputTest, InputAllGivesEveryOwnerAShare) {
  std::vector<std::vector<RingElement>> got(3);
  run_local(3, options(4), [&](Engine& e) {
    const RingElement mine[2] = {RingElement(10 * e.self().index()),
                                 RingElement(10 * e.self().index() + 1)};
    const auto shares = e.input_all(mine, 2);
    for (const auto& per_owner : shares) {
      auto opened = e.partial_open(per_owner);
      for (auto& o : opened) got[e.self().slot()].push_back(o.value);
    }
    e.mac_check();
  }).rethrow();
  const std::vector<RingElement> want = {RingElement(10), RingElement(11), RingElement(20),
                                         RingElement(21), RingElement(30), RingElement(31)};
  for (const auto& g : got) EXPECT_EQ(g, want);
}

TEST(MacCheckTest, HonestBatchPasses) {
  EXPECT_NO_THROW(open_inputs(2, {RingElement(0)}, options(5), true));
  ChaChaRng rng(6);
  std::vector<RingElement> values(257);
  for (auto& v : values) v = rng.next_ring();
  EXPECT_NO_THROW(open_inputs(5, values, options(6), true));
}

TEST(MacCheckTest, EmptyBatchPasses) {
  run_local(3, options(7), [](Engine& e) { e.mac_check(); }).rethrow();
}

TEST(MacCheckTest, OddTamperAbortsEveryParty) {
  auto opts = options(8);
  opts.configure_network = [](PartyId me, Network& net) {
    if (me != PartyId(2)) return;
    net.set_interceptor([](Envelope& env, PartyId) {
      if (env.kind == MessageKind::kShareAnnounce) shift_word(env, 1, RingElement(3));
    });
  };
  std::vector<OpenedValue> released;
  std::mutex mu;
  auto res = run_local(3, opts, [&](Engine& e) {
    const RingElement v[3] = {RingElement(1), RingElement(2), RingElement(3)};
    const auto shares = e.input(PartyId(1), v, 3);
    auto opened = e.partial_open(shares);
    e.mac_check(opened);
    std::lock_guard<std::mutex> lock(mu);
    released.insert(released.end(), opened.begin(), opened.end());
  });
  EXPECT_TRUE(released.empty());
  for (const auto& err : res.errors) {
    ASSERT_TRUE(err);
    EXPECT_THROW(std::rethrow_exception(err), ProtocolAbort);
  }
  EXPECT_THROW(res.rethrow(), MacCheckFailed);
}

// Oracle for the check: with honest shares except a shift of delta on
// opening j, sum sigma = -alpha * r_j * delta. For odd alpha and odd delta the
// product is odd whenever r_j is odd; any r_j works for delta = 1 unless
// alpha * r_j = 0, which needs r_j divisible by 2^kappa.
TEST(MacCheckTest, SigmaSumMatchesAlgebraicOracle) {
  ChaChaRng rng(9);
  const int n = 3;
  const RingElement alpha(rng.next_ring().value | 1);
  std::vector<RingElement> values(5);
  std::vector<std::vector<AuthShare>> shares;
  for (auto& v : values) {
    v = rng.next_ring();
    shares.push_back(share(v, n, alpha, rng));
  }
  const auto keys = share_key(alpha, n, rng);
  Seed seed{};
  const auto r = prf_ring_vector(seed, 0, values.size());
  const RingElement delta(5);
  RingElement sum;
  for (int i = 0; i < n; ++i) {
    RingElement c, gamma;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const RingElement m = j == 2 ? values[j] + delta : values[j];
      c += r[j] * m;
      gamma += r[j] * shares[j][i].mac;
    }
    sum += gamma - keys[i].alpha_i * c;
  }
  EXPECT_EQ(sum, -(alpha * r[2] * delta));
}

TEST(MacCheckTest, InconsistentSigmaStillAbortsAllHonestParties) {
  auto opts = options(10);
  opts.configure_network = [](PartyId me, Network& net) {
    if (me != PartyId(3)) return;
    net.set_interceptor([](Envelope& env, PartyId to) {
      if (env.kind == MessageKind::kSigmaAnnounce && to == PartyId(1)) {
        shift_word(env, 0, RingElement(1));
      }
    });
  };
  auto res = run_local(3, opts, [&](Engine& e) {
    const RingElement v[1] = {RingElement(9)};
    auto opened = e.partial_open(e.input(PartyId(1), v, 1));
    e.mac_check(opened);
  });
  ASSERT_TRUE(res.errors[0]);
  ASSERT_TRUE(res.errors[1]);
  EXPECT_THROW(std::rethrow_exception(res.errors[0]), MacCheckFailed);
  EXPECT_THROW(std::rethrow_exception(res.errors[1]), ProtocolAbort);
}

TEST(BeaverTest, SmallProducts) {
  std::vector<RingElement> got;
  run_local(2, options(11), [&](Engine& e) {
    const RingElement v[3] = {RingElement(3), RingElement(4), RingElement(0)};
    const auto s = e.input(PartyId(1), v, 3);
    const AuthShare x[2] = {s[0], s[0]};
    const AuthShare y[2] = {s[1], s[2]};
    const auto z = e.multiply(x, y);
    auto opened = e.partial_open(z);
    e.mac_check(opened);
    if (e.self() == PartyId(1)) {
      for (const auto& o : opened) got.push_back(o.value);
    }
  }).rethrow();
  EXPECT_EQ(got, (std::vector<RingElement>{RingElement(12), RingElement(0)}));
}

TEST(BeaverTest, RandomRingPairsMatchPlaintextProduct) {
  for (int n : {2, 5}) {
    ChaChaRng rng(12 + n);
    std::vector<RingElement> xs(1000), ys(1000);
    for (auto& x : xs) x = rng.next_ring();
    for (auto& y : ys) y = rng.next_ring();
    std::vector<RingElement> got;
    run_local(n, options(static_cast<std::uint8_t>(13 + n)), [&](Engine& e) {
      const auto sx = e.input(PartyId(1), xs, xs.size());
      const auto sy = e.input(PartyId(n), ys, ys.size());
      std::vector<AuthShare> z;
      for (std::size_t k = 0; k < xs.size(); ++k) z.push_back(e.beaver_mul(sx[k], sy[k]));
      auto opened = e.partial_open(z);
      e.mac_check(opened);
      if (e.self() == PartyId(2)) {
        for (const auto& o : opened) got.push_back(o.value);
      }
    }).rethrow();
    ASSERT_EQ(got.size(), xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_EQ(got[k], ring_mul(xs[k], ys[k]));
  }
}

TEST(BeaverTest, ExhaustedPoolFailsLoudly) {
  LocalRunOptions opts = options(14);
  ChaChaRng rng(14);
  auto bundle = std::make_shared<PreprocessingBundle>(deal(2, 1, rng, 4));
  opts.make_preprocessing = [bundle](PartyId me) -> std::unique_ptr<Preprocessing> {
    return std::make_unique<PooledPreprocessing>((*bundle)[me.slot()]);
  };
  auto res = run_local(2, opts, [](Engine& e) {
    const RingElement v[2] = {RingElement(2), RingElement(5)};
    const auto s = e.input(PartyId(1), v, 2);
    e.beaver_mul(s[0], s[1]);
    e.beaver_mul(s[0], s[1]);
  });
  EXPECT_THROW(res.rethrow(), TriplesExhausted);
}

class VectorMulTest : public ::testing::Test {
 protected:
  // Party 1 supplies theta, the last party supplies v.
  std::vector<double> run(const std::vector<std::vector<double>>& theta,
                          const std::vector<std::vector<double>>& v, int n, std::uint8_t seed) {
    const FixedPointCodec codec(8);
    std::vector<RingElement> qt, qv;
    for (const auto& row : theta)
      for (double x : row) qt.push_back(codec.quantize(x));
    for (const auto& row : v)
      for (double x : row) qv.push_back(codec.quantize(x));
    std::vector<double> out;
    run_local(n, options(seed), [&](Engine& e) {
      const auto st = e.input(PartyId(1), qt, qt.size());
      const auto sv = e.input(PartyId(n), qv, qv.size());
      std::vector<std::vector<AuthShare>> rt, rv;
      std::size_t at = 0;
      for (const auto& row : theta) {
        rt.emplace_back(st.begin() + at, st.begin() + at + row.size());
        rv.emplace_back(sv.begin() + at, sv.begin() + at + row.size());
        at += row.size();
      }
      const auto res = e.vector_mul_batch(rt, rv, codec);
      require_checked(res);
      if (e.self() == PartyId(1)) {
        for (const auto& o : res) out.push_back(codec.dequantize(o.value));
      }
    }).rethrow();
    return out;
  }
};

TEST_F(VectorMulTest, SelectorRow) {
  const auto got = run({{1.0, 0.0}}, {{0.37, -0.81}}, 2, 20);
  EXPECT_NEAR(got[0], 0.37, std::ldexp(1.0, -8));
}

TEST_F(VectorMulTest, ConvexCombinationOfOnes) {
  const auto got = run({{0.5, 0.5}}, {{1.0, 1.0}}, 2, 21);
  EXPECT_NEAR(got[0], 1.0, 2 * std::ldexp(1.0, -8 + 1));
}

TEST_F(VectorMulTest, SingleCallMatchesBatch) {
  const FixedPointCodec codec(8);
  run_local(2, options(22), [&](Engine& e) {
    const RingElement t[2] = {codec.quantize(0.25), codec.quantize(0.75)};
    const RingElement x[2] = {codec.quantize(0.5), codec.quantize(-1.0)};
    const auto st = e.input(PartyId(1), t, 2);
    const auto sx = e.input(PartyId(2), x, 2);
    const auto o = e.vector_mul(st, sx, codec);
    EXPECT_TRUE(o.checked);
    EXPECT_NEAR(codec.dequantize(o.value), -0.625, 2 * std::ldexp(1.0, -7));
  }).rethrow();
}

TEST_F(VectorMulTest, RandomVectorsMatchFloatDotProduct) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  for (int n = 2; n <= 10; n += 4) {
    std::vector<std::vector<double>> theta, v;
    for (int k = 0; k < 100; ++k) {
      std::vector<double> t(n), x(n);
      for (auto& a : t) a = unit(gen);
      for (auto& b : x) b = sym(gen);
      theta.push_back(t);
      v.push_back(x);
    }
    const auto got = run(theta, v, n, static_cast<std::uint8_t>(24 + n));
    for (std::size_t k = 0; k < theta.size(); ++k) {
      double want = 0;
      for (int j = 0; j < n; ++j) want += theta[k][j] * v[k][j];
      EXPECT_LE(std::abs(got[k] - want), n * std::ldexp(1.0, -8 + 1));
    }
  }
}

TEST(DeterminismTest, TranscriptsMatchAcrossPartiesAndRuns) {
  auto body = [](Engine& e) {
    const FixedPointCodec codec(8);
    const RingElement mine[3] = {codec.quantize(0.1 * e.self().index()), RingElement(2),
                                 RingElement(3)};
    const auto s = e.input_all(mine, 3);
    const auto z = e.multiply(s[0], s[1]);
    auto opened = e.partial_open(z);
    e.mac_check(opened);
  };
  const auto a = run_local(3, options(30), body);
  const auto b = run_local(3, options(30), body);
  a.rethrow();
  b.rethrow();
  for (int i = 0; i < 3; ++i) {
    EXPECT_FALSE(a.transcripts[i].empty());
    EXPECT_EQ(a.transcripts[i], a.transcripts[0]);
    EXPECT_EQ(a.transcripts[i], b.transcripts[i]);
  }
  const auto c = run_local(3, options(31), body);
  EXPECT_NE(c.transcripts[0], a.transcripts[0]);
}

}  // namespace
}  // namespace weave
