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

#include "weave/cnn.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "weave/errors.h"

namespace weave {
namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(s);
  for (auto& v : t.data) v = u(gen);
  return t;
}

LayerSpec layer(LayerKind kind, std::string name, int kernel = 0, int units = 0) {
  LayerSpec s;
  s.kind = kind;
  s.name = std::move(name);
  s.kernel = kernel;
  s.units = units;
  return s;
}

// 6x6x1 -> conv 3x3x3 -> relu -> pool -> standardize -> full 4.
NetworkSpec toy(bool standardize) {
  NetworkSpec s;
  s.name = "toy";
  s.input = {1, 6, 6, 1};
  s.classes = 4;
  s.layers.push_back(layer(LayerKind::kConv, "conv", 3, 3));
  s.layers.push_back(layer(LayerKind::kRelu, "relu"));
  s.layers.push_back(layer(LayerKind::kMaxPool, "pool"));
  if (standardize) s.layers.push_back(layer(LayerKind::kStandardize, "norm"));
  s.layers.push_back(layer(LayerKind::kFull, "full", 0, 4));
  return s;
}

double loss_of(Model& m, const Tensor& x, const std::vector<int>& y) {
  return softmax_cross_entropy(m.forward(x, true), y).loss;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

TEST(NetworkSpecTest, NetworkOneShapeChain) {
  const auto s = NetworkSpec::network_i();
  const auto shapes = s.shapes();
  std::vector<std::string> got;
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    const auto k = s.layers[i].kind;
    if (k == LayerKind::kConv || k == LayerKind::kMaxPool || k == LayerKind::kFull) {
      got.push_back(shapes[i].str());
    }
  }
  const std::vector<std::string> want = {Shape{1, 24, 24, 6}.str(), Shape{1, 12, 12, 6}.str(),
                                         Shape{1, 8, 8, 12}.str(), Shape{1, 4, 4, 12}.str(),
                                         Shape{1, 1, 1, 10}.str()};
  EXPECT_EQ(got, want);
  EXPECT_EQ(s.hook_names(), (std::vector<std::string>{"pool2", "pool4"}));
  EXPECT_EQ(s.hook_shape("pool2"), (Shape{1, 12, 12, 6}));
  EXPECT_EQ(s.hook_shape("pool4"), (Shape{1, 4, 4, 12}));
}

TEST(NetworkSpecTest, OtherNetworks) {
  const auto ii = NetworkSpec::network_ii();
  EXPECT_EQ(ii.hook_shape("pool2"), (Shape{1, 12, 12, 20}));
  const auto iii = NetworkSpec::network_iii();
  EXPECT_EQ(iii.hook_shape("pool2"), (Shape{1, 14, 14, 6}));
  EXPECT_EQ(iii.hook_shape("pool4"), (Shape{1, 5, 5, 16}));
  const auto shapes = iii.shapes();
  EXPECT_EQ(shapes[0], (Shape{1, 28, 28, 6}));
  EXPECT_EQ(shapes[8], (Shape{1, 1, 1, 120}));
  EXPECT_EQ(NetworkSpec::by_name("II").name, "II");
  EXPECT_THROW(NetworkSpec::by_name("IV"), ConfigError);
}

TEST(NetworkSpecTest, SetHooks) {
  auto s = NetworkSpec::network_i();
  s.set_hooks({"pool4"});
  EXPECT_EQ(s.hook_names(), (std::vector<std::string>{"pool4"}));
  s.set_hooks({});
  EXPECT_TRUE(s.hook_names().empty());
  EXPECT_THROW(s.set_hooks({"conv1"}), ConfigError);
}

TEST(NetworkSpecTest, InconsistentChainRejected) {
  NetworkSpec s;
  s.name = "bad";
  s.input = {1, 4, 4, 1};
  s.layers.push_back(layer(LayerKind::kConv, "conv", 5, 2));
  EXPECT_THROW(s.shapes(), ShapeMismatch);
  NetworkSpec t = toy(false);
  t.classes = 10;
  EXPECT_THROW(t.shapes(), ShapeMismatch);
}

TEST(ModelTest, ParameterCountNetworkOne) {
  Model m(NetworkSpec::network_i(), 1);
  EXPECT_EQ(m.param_count(), 156u + 1812u + 1930u);
}

TEST(ModelTest, WrongInputShape) {
  Model m(NetworkSpec::network_i(), 1);
  EXPECT_THROW(m.forward(Tensor(Shape{2, 27, 28, 1}), false), ShapeMismatch);
}

TEST(ModelTest, ZeroWeightsGiveZeroLogits) {
  Model m(NetworkSpec::network_i(), 3);
  for (auto& p : m.params()) std::fill(p.values.begin(), p.values.end(), 0.0);
  const auto logits = m.forward(random_tensor({4, 28, 28, 1}, 9), false);
  for (double v : logits.data) EXPECT_EQ(v, 0.0);
}

TEST(ModelTest, OneByOneConvIsIdentity) {
  NetworkSpec s;
  s.name = "id";
  s.input = {1, 4, 4, 1};
  s.classes = 16;
  s.layers.push_back(layer(LayerKind::kConv, "conv", 1, 1));
  Model m(s, 1);
  auto p = m.params();
  p[0].values[0] = 1.0;
  p[1].values[0] = 0.0;
  const auto x = random_tensor({2, 4, 4, 1}, 5);
  EXPECT_EQ(m.forward(x, false).data, x.data);
}

TEST(ModelTest, MaxPoolRoutesToArgmaxOnly) {
  NetworkSpec s;
  s.name = "pool";
  s.input = {1, 4, 4, 1};
  s.classes = 4;
  s.layers.push_back(layer(LayerKind::kMaxPool, "pool"));
  Model m(s, 1);
  Tensor x(Shape{1, 4, 4, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = static_cast<double>((i * 7) % 16);
  const auto y = m.forward(x, false);
  Tensor g(y.shape, 1.0);
  const auto dx = m.backward(g);
  for (int oy = 0; oy < 2; ++oy) {
    for (int ox = 0; ox < 2; ++ox) {
      int by = 0, bx = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int ddx = 0; ddx < 2; ++ddx) {
          if (x.at(0, 2 * oy + dy, 2 * ox + ddx, 0) > x.at(0, 2 * oy + by, 2 * ox + bx, 0)) {
            by = dy;
            bx = ddx;
          }
        }
      }
      EXPECT_EQ(y.at(0, oy, ox, 0), x.at(0, 2 * oy + by, 2 * ox + bx, 0));
      for (int dy = 0; dy < 2; ++dy) {
        for (int ddx = 0; ddx < 2; ++ddx) {
          EXPECT_EQ(dx.at(0, 2 * oy + dy, 2 * ox + ddx, 0), (dy == by && ddx == bx) ? 1.0 : 0.0);
        }
      }
    }
  }
}

class GradientCheck : public ::testing::TestWithParam<bool> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  Model m(toy(GetParam()), 11);
  const auto x = random_tensor({3, 6, 6, 1}, 12);
  const std::vector<int> y = {0, 3, 1};
  m.zero_grads();
  const auto dx = m.backward(softmax_cross_entropy(m.forward(x, true), y).grad);
  constexpr double h = 1e-5;
  double worst = 0;
  for (auto& p : m.params()) {
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double keep = p.values[i];
      p.values[i] = keep + h;
      const double up = loss_of(m, x, y);
      p.values[i] = keep - h;
      const double down = loss_of(m, x, y);
      p.values[i] = keep;
      worst = std::max(worst, rel_err(p.grads[i], (up - down) / (2 * h)));
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    const double numeric = (loss_of(m, xp, y) - loss_of(m, xm, y)) / (2 * h);
    worst = std::max(worst, rel_err(dx.data[i], numeric));
  }
  EXPECT_LT(worst, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Toy, GradientCheck, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Standardized" : "Plain"; });

TEST(ModelTest, HookGradientMatchesFiniteDifferences) {
  // A hook that scales its activation by 0.7 has backward 0.7 * g.
  Model m(NetworkSpec::network_i(1.0), 21);
  const auto x = random_tensor({2, 28, 28, 1}, 22);
  const std::vector<int> y = {4, 7};
  auto fwd = [](const std::string&, Tensor& a) {
    for (auto& v : a.data) v *= 0.7;
  };
  auto bwd = [](const std::string&, Tensor& g) {
    for (auto& v : g.data) v *= 0.7;
  };
  m.zero_grads();
  m.backward(softmax_cross_entropy(m.forward(x, true, fwd), y).grad, bwd);
  auto p = m.params();
  constexpr double h = 1e-5;
  double worst = 0;
  for (std::size_t i = 0; i < p[0].values.size(); i += 7) {
    const double keep = p[0].values[i];
    p[0].values[i] = keep + h;
    const double up = softmax_cross_entropy(m.forward(x, true, fwd), y).loss;
    p[0].values[i] = keep - h;
    const double down = softmax_cross_entropy(m.forward(x, true, fwd), y).loss;
    p[0].values[i] = keep;
    worst = std::max(worst, rel_err(p[0].grads[i], (up - down) / (2 * h)));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(LossTest, ConfidentCorrectPredictionHasNearZeroGradient) {
  Tensor logits(Shape{1, 1, 1, 10});
  logits.data[3] = 100.0;
  const std::vector<int> y = {3};
  const auto r = softmax_cross_entropy(logits, y);
  EXPECT_LT(r.loss, 1e-30);
  for (double g : r.grad.data) EXPECT_LT(std::abs(g), 1e-30);
}

TEST(LossTest, LabelOutOfRange) {
  Tensor logits(Shape{1, 1, 1, 10});
  const std::vector<int> y = {10};
  EXPECT_THROW(softmax_cross_entropy(logits, y), RangeError);
}

TEST(ModelTest, DuplicatedSampleDoublesContribution) {
  Model m(toy(false), 31);
  const auto a = random_tensor({1, 6, 6, 1}, 32);
  const auto b = random_tensor({1, 6, 6, 1}, 33);
  auto grads = [&](std::vector<const Tensor*> xs, std::vector<int> ys) {
    Tensor x(Shape{static_cast<int>(xs.size()), 6, 6, 1});
    for (std::size_t k = 0; k < xs.size(); ++k) {
      std::copy(xs[k]->data.begin(), xs[k]->data.end(), x.data.begin() + k * 36);
    }
    m.zero_grads();
    m.backward(softmax_cross_entropy(m.forward(x, true), ys).grad);
    std::vector<double> out;
    for (auto& p : m.params()) out.insert(out.end(), p.grads.begin(), p.grads.end());
    return out;
  };
  const auto ga = grads({&a}, {1});
  const auto gb = grads({&b}, {2});
  const auto gaab = grads({&a, &a, &b}, {1, 1, 2});
  for (std::size_t i = 0; i < ga.size(); ++i) {
    EXPECT_NEAR(gaab[i], (2 * ga[i] + gb[i]) / 3, 1e-12);
  }
}

TEST(ModelTest, DropoutScalesKeptUnits) {
  NetworkSpec s;
  s.name = "drop";
  s.input = {1, 10, 10, 1};
  s.classes = 100;
  LayerSpec d = layer(LayerKind::kDropout, "dropout");
  d.keep = 0.8;
  s.layers.push_back(d);
  Model m(s, 4);
  Tensor x(Shape{50, 10, 10, 1}, 1.0);
  const auto y = m.forward(x, true);
  std::size_t kept = 0;
  for (double v : y.data) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.25) < 1e-12);
    kept += v != 0.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / y.size(), 0.8, 0.02);
  EXPECT_EQ(m.forward(x, false).data, x.data);
}

TEST(ModelTest, SaveLoadRoundTrip) {
  Model a(NetworkSpec::network_i(), 1), b(NetworkSpec::network_i(), 2);
  const auto x = random_tensor({2, 28, 28, 1}, 3);
  a.forward(x, true);  // moves the running statistics
  const std::string path = ::testing::TempDir() + "/weave_model.bin";
  a.save(path);
  b.load(path);
  EXPECT_EQ(a.forward(x, false).data, b.forward(x, false).data);
  Model c(NetworkSpec::network_ii(), 1);
  EXPECT_THROW(c.load(path), FormatError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace weave
