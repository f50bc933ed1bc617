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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "weave/errors.h"

namespace weave {

namespace {

constexpr double kStdEps = 1e-5;
constexpr double kStdMomentum = 0.9;

std::vector<double> he_uniform(std::size_t count, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-limit, limit);
  std::vector<double> w(count);
  for (auto& v : w) v = u(rng);
  return w;
}

Shape per_sample(Shape s) {
  s.n = 1;
  return s;
}

void require_input(const std::string& layer, const Shape& expected, const Shape& got) {
  if (got.h != expected.h || got.w != expected.w || got.c != expected.c) {
    throw ShapeMismatch(layer + ": expected input " + per_sample(expected).str() + ", got " +
                        per_sample(got).str());
  }
}

class Conv final : public Layer {
 public:
  Conv(const LayerSpec& s, const Shape& in, std::mt19937_64& rng)
      : Layer(s.name), in_(per_sample(in)), k_(s.kernel), out_c_(s.units), pad_(s.padding) {
    const std::size_t fan_in = static_cast<std::size_t>(k_) * k_ * in_.c;
    w_ = he_uniform(fan_in * out_c_, fan_in, rng);
    b_.assign(out_c_, 0.0);
    dw_.assign(w_.size(), 0.0);
    db_.assign(b_.size(), 0.0);
  }

  Shape output_shape(const Shape& in) const override {
    const int h = in.h + 2 * pad_ - k_ + 1;
    const int w = in.w + 2 * pad_ - k_ + 1;
    if (h <= 0 || w <= 0) throw ShapeMismatch(name() + ": kernel larger than input " + in.str());
    return {in.n, h, w, out_c_};
  }

  Tensor forward(const Tensor& x, bool) override {
    require_input(name(), in_, x.shape);
    x_ = x;
    Tensor out(output_shape(x.shape));
    const int C = in_.c;
    for (int b = 0; b < x.shape.n; ++b) {
      for (int oy = 0; oy < out.shape.h; ++oy) {
        for (int ox = 0; ox < out.shape.w; ++ox) {
          double* o = &out.data[out.index(b, oy, ox, 0)];
          for (int oc = 0; oc < out_c_; ++oc) o[oc] = b_[oc];
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy + ky - pad_;
            if (iy < 0 || iy >= in_.h) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox + kx - pad_;
              if (ix < 0 || ix >= in_.w) continue;
              const double* in = &x.data[x.index(b, iy, ix, 0)];
              for (int oc = 0; oc < out_c_; ++oc) {
                const double* w = &w_[((static_cast<std::size_t>(oc) * k_ + ky) * k_ + kx) * C];
                double acc = 0;
                for (int ci = 0; ci < C; ++ci) acc += w[ci] * in[ci];
                o[oc] += acc;
              }
            }
          }
        }
      }
    }
    return out;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(x_.shape);
    const int C = in_.c;
    for (int b = 0; b < g.shape.n; ++b) {
      for (int oy = 0; oy < g.shape.h; ++oy) {
        for (int ox = 0; ox < g.shape.w; ++ox) {
          const double* go = &g.data[g.index(b, oy, ox, 0)];
          for (int oc = 0; oc < out_c_; ++oc) db_[oc] += go[oc];
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy + ky - pad_;
            if (iy < 0 || iy >= in_.h) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox + kx - pad_;
              if (ix < 0 || ix >= in_.w) continue;
              const std::size_t at = x_.index(b, iy, ix, 0);
              const double* in = &x_.data[at];
              double* din = &dx.data[at];
              for (int oc = 0; oc < out_c_; ++oc) {
                const double gv = go[oc];
                if (gv == 0.0) continue;
                const std::size_t wo = ((static_cast<std::size_t>(oc) * k_ + ky) * k_ + kx) * C;
                const double* w = &w_[wo];
                double* dw = &dw_[wo];
                for (int ci = 0; ci < C; ++ci) {
                  din[ci] += gv * w[ci];
                  dw[ci] += gv * in[ci];
                }
              }
            }
          }
        }
      }
    }
    return dx;
  }

  std::vector<ParamView> params() override { return {{w_, dw_}, {b_, db_}}; }

 private:
  Shape in_;
  int k_, out_c_, pad_;
  std::vector<double> w_, b_, dw_, db_;
  Tensor x_;
};

class Full final : public Layer {
 public:
  Full(const LayerSpec& s, const Shape& in, std::mt19937_64& rng)
      : Layer(s.name), in_(per_sample(in)), d_(in.per_sample()), u_(s.units) {
    w_ = he_uniform(d_ * u_, d_, rng);
    b_.assign(u_, 0.0);
    dw_.assign(w_.size(), 0.0);
    db_.assign(b_.size(), 0.0);
  }

  Shape output_shape(const Shape& in) const override { return {in.n, 1, 1, u_}; }

  Tensor forward(const Tensor& x, bool) override {
    require_input(name(), in_, x.shape);
    x_ = x;
    Tensor out(output_shape(x.shape));
    for (int b = 0; b < x.shape.n; ++b) {
      const double* in = &x.data[b * d_];
      for (int u = 0; u < u_; ++u) {
        const double* w = &w_[u * d_];
        double acc = b_[u];
        for (std::size_t d = 0; d < d_; ++d) acc += w[d] * in[d];
        out.data[b * u_ + u] = acc;
      }
    }
    return out;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(x_.shape);
    for (int b = 0; b < g.shape.n; ++b) {
      const double* in = &x_.data[b * d_];
      double* din = &dx.data[b * d_];
      for (int u = 0; u < u_; ++u) {
        const double gv = g.data[b * u_ + u];
        db_[u] += gv;
        const double* w = &w_[u * d_];
        double* dw = &dw_[u * d_];
        for (std::size_t d = 0; d < d_; ++d) {
          din[d] += gv * w[d];
          dw[d] += gv * in[d];
        }
      }
    }
    return dx;
  }

  std::vector<ParamView> params() override { return {{w_, dw_}, {b_, db_}}; }

 private:
  Shape in_;
  std::size_t d_;
  int u_;
  std::vector<double> w_, b_, dw_, db_;
  Tensor x_;
};

class Relu final : public Layer {
 public:
  using Layer::Layer;
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x, bool) override {
    Tensor out = x;
    mask_.assign(x.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out.data[i] > 0) {
        mask_[i] = 1;
      } else {
        out.data[i] = 0;
      }
    }
    return out;
  }
  Tensor backward(const Tensor& g) override {
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (!mask_[i]) dx.data[i] = 0;
    }
    return dx;
  }

 private:
  std::vector<std::uint8_t> mask_;
};

// 2x2 window, stride 2. The gradient is routed to the argmax only.
class MaxPool final : public Layer {
 public:
  using Layer::Layer;
  Shape output_shape(const Shape& in) const override {
    if (in.h < 2 || in.w < 2) throw ShapeMismatch(name() + ": input too small " + in.str());
    return {in.n, in.h / 2, in.w / 2, in.c};
  }
  Tensor forward(const Tensor& x, bool) override {
    in_shape_ = x.shape;
    Tensor out(output_shape(x.shape));
    argmax_.assign(out.size(), 0);
    for (int b = 0; b < out.shape.n; ++b) {
      for (int y = 0; y < out.shape.h; ++y) {
        for (int xx = 0; xx < out.shape.w; ++xx) {
          for (int c = 0; c < out.shape.c; ++c) {
            std::size_t best = x.index(b, 2 * y, 2 * xx, c);
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const std::size_t at = x.index(b, 2 * y + dy, 2 * xx + dx, c);
                if (x.data[at] > x.data[best]) best = at;
              }
            }
            const std::size_t o = out.index(b, y, xx, c);
            out.data[o] = x.data[best];
            argmax_[o] = best;
          }
        }
      }
    }
    return out;
  }
  Tensor backward(const Tensor& g) override {
    Tensor dx(in_shape_);
    for (std::size_t o = 0; o < g.size(); ++o) dx.data[argmax_[o]] += g.data[o];
    return dx;
  }

 private:
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

// Per-channel standardization to zero mean and unit variance. Training uses
// batch statistics over (n, h, w); evaluation uses running averages.
class Standardize final : public Layer {
 public:
  Standardize(const LayerSpec& s, const Shape& in)
      : Layer(s.name), mean_(in.c, 0.0), var_(in.c, 1.0) {}
  Shape output_shape(const Shape& in) const override { return in; }

  Tensor forward(const Tensor& x, bool training) override {
    const int C = x.shape.c;
    if (static_cast<std::size_t>(C) != mean_.size()) {
      throw ShapeMismatch(name() + ": channel count " + std::to_string(C));
    }
    const std::size_t m = x.size() / C;
    training_ = training;
    inv_std_.assign(C, 0.0);
    std::vector<double> mu(C, 0.0), var(C, 0.0);
    if (training) {
      for (std::size_t i = 0; i < x.size(); ++i) mu[i % C] += x.data[i];
      for (auto& v : mu) v /= static_cast<double>(m);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - mu[i % C];
        var[i % C] += d * d;
      }
      for (auto& v : var) v /= static_cast<double>(m);
      for (int c = 0; c < C; ++c) {
        mean_[c] = kStdMomentum * mean_[c] + (1 - kStdMomentum) * mu[c];
        var_[c] = kStdMomentum * var_[c] + (1 - kStdMomentum) * var[c];
      }
    } else {
      mu = mean_;
      var = var_;
    }
    for (int c = 0; c < C; ++c) inv_std_[c] = 1.0 / std::sqrt(var[c] + kStdEps);
    y_ = x;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      y_.data[i] = (x.data[i] - mu[i % C]) * inv_std_[i % C];
    }
    return y_;
  }

  Tensor backward(const Tensor& g) override {
    const int C = g.shape.c;
    Tensor dx(g.shape);
    if (!training_) {
      for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] = g.data[i] * inv_std_[i % C];
      return dx;
    }
    const double m = static_cast<double>(g.size() / C);
    std::vector<double> mean_g(C, 0.0), mean_gy(C, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      mean_g[i % C] += g.data[i];
      mean_gy[i % C] += g.data[i] * y_.data[i];
    }
    for (int c = 0; c < C; ++c) {
      mean_g[c] /= m;
      mean_gy[c] /= m;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int c = static_cast<int>(i % C);
      dx.data[i] = inv_std_[c] * (g.data[i] - mean_g[c] - y_.data[i] * mean_gy[c]);
    }
    return dx;
  }

  std::vector<std::span<double>> state() override { return {mean_, var_}; }

 private:
  std::vector<double> mean_, var_, inv_std_;
  Tensor y_;
  bool training_ = false;
};

// Inverted dropout: kept units are scaled by 1 / keep during training.
class Dropout final : public Layer {
 public:
  Dropout(const LayerSpec& s, std::mt19937_64& rng) : Layer(s.name), keep_(s.keep), rng_(rng()) {
    if (!(keep_ > 0 && keep_ <= 1)) throw ConfigError(name() + ": keep probability out of (0, 1]");
  }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(const Tensor& x, bool training) override {
    active_ = training && keep_ < 1;
    if (!active_) return x;
    std::bernoulli_distribution keep(keep_);
    scale_.assign(x.size(), 0.0);
    Tensor out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      scale_[i] = keep(rng_) ? 1.0 / keep_ : 0.0;
      out.data[i] *= scale_[i];
    }
    return out;
  }
  Tensor backward(const Tensor& g) override {
    if (!active_) return g;
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= scale_[i];
    return dx;
  }

 private:
  double keep_;
  std::mt19937_64 rng_;
  std::vector<double> scale_;
  bool active_ = false;
};

LayerSpec simple(LayerKind kind, std::string name) {
  LayerSpec s;
  s.kind = kind;
  s.name = std::move(name);
  return s;
}
LayerSpec conv(std::string name, int kernel, int out, int padding = 0) {
  LayerSpec s = simple(LayerKind::kConv, std::move(name));
  s.kernel = kernel;
  s.units = out;
  s.padding = padding;
  return s;
}
LayerSpec full(std::string name, int units) {
  LayerSpec s = simple(LayerKind::kFull, std::move(name));
  s.units = units;
  return s;
}
LayerSpec dropout(double keep) {
  LayerSpec s = simple(LayerKind::kDropout, "dropout");
  s.keep = keep;
  return s;
}

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in, std::mt19937_64& rng) {
  switch (spec.kind) {
    case LayerKind::kConv:
      if (spec.kernel <= 0 || spec.units <= 0 || spec.padding < 0) {
        throw ConfigError(spec.name + ": bad convolution parameters");
      }
      return std::make_unique<Conv>(spec, in, rng);
    case LayerKind::kFull:
      if (spec.units <= 0) throw ConfigError(spec.name + ": bad unit count");
      return std::make_unique<Full>(spec, in, rng);
    case LayerKind::kRelu:
      return std::make_unique<Relu>(spec.name);
    case LayerKind::kMaxPool:
      return std::make_unique<MaxPool>(spec.name);
    case LayerKind::kStandardize:
      return std::make_unique<Standardize>(spec, in);
    case LayerKind::kDropout:
      return std::make_unique<Dropout>(spec, rng);
  }
  throw ConfigError("unknown layer kind");
}

// ---------------------------------------------------------------------------
// NetworkSpec

NetworkSpec NetworkSpec::network_i(double keep) {
  NetworkSpec s;
  s.name = "I";
  s.layers = {conv("conv1", 5, 6),
              simple(LayerKind::kRelu, "relu1"),
              simple(LayerKind::kMaxPool, "pool2"),
              simple(LayerKind::kStandardize, "norm2"),
              conv("conv3", 5, 12),
              simple(LayerKind::kRelu, "relu3"),
              simple(LayerKind::kMaxPool, "pool4"),
              simple(LayerKind::kStandardize, "norm4"),
              dropout(keep),
              full("full5", 10)};
  s.set_hooks({"pool2", "pool4"});
  return s;
}

NetworkSpec NetworkSpec::network_ii(double keep) {
  NetworkSpec s;
  s.name = "II";
  s.layers = {conv("conv1", 5, 20),
              simple(LayerKind::kRelu, "relu1"),
              simple(LayerKind::kMaxPool, "pool2"),
              simple(LayerKind::kStandardize, "norm2"),
              full("full3", 100),
              simple(LayerKind::kRelu, "relu3"),
              dropout(keep),
              full("out", 10)};
  s.set_hooks({"pool2"});
  return s;
}

NetworkSpec NetworkSpec::network_iii(double keep) {
  NetworkSpec s;
  s.name = "III";
  s.layers = {conv("conv1", 5, 6, 2),
              simple(LayerKind::kRelu, "relu1"),
              simple(LayerKind::kMaxPool, "pool2"),
              simple(LayerKind::kStandardize, "norm2"),
              conv("conv3", 5, 16),
              simple(LayerKind::kRelu, "relu3"),
              simple(LayerKind::kMaxPool, "pool4"),
              simple(LayerKind::kStandardize, "norm4"),
              conv("conv5", 5, 120),
              simple(LayerKind::kRelu, "relu5"),
              full("full6", 84),
              simple(LayerKind::kRelu, "relu6"),
              dropout(keep),
              full("out", 10)};
  s.set_hooks({"pool2", "pool4"});
  return s;
}

NetworkSpec NetworkSpec::by_name(const std::string& name, double keep) {
  if (name == "I") return network_i(keep);
  if (name == "II") return network_ii(keep);
  if (name == "III") return network_iii(keep);
  throw ConfigError("unknown network '" + name + "' (expected I, II or III)");
}

std::vector<Shape> NetworkSpec::shapes() const {
  std::vector<Shape> out;
  Shape s = per_sample(input);
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::kConv:
        s = {1, s.h + 2 * l.padding - l.kernel + 1, s.w + 2 * l.padding - l.kernel + 1, l.units};
        if (s.h <= 0 || s.w <= 0) throw ShapeMismatch(l.name + ": kernel larger than its input");
        break;
      case LayerKind::kMaxPool:
        if (s.h < 2 || s.w < 2) throw ShapeMismatch(l.name + ": input too small to pool");
        s = {1, s.h / 2, s.w / 2, s.c};
        break;
      case LayerKind::kFull:
        s = {1, 1, 1, l.units};
        break;
      default:
        break;
    }
    out.push_back(s);
  }
  if (out.empty() || out.back().per_sample() != static_cast<std::size_t>(classes)) {
    throw ShapeMismatch("network " + name + ": output does not have " + std::to_string(classes) +
                        " units");
  }
  return out;
}

std::vector<std::string> NetworkSpec::hook_names() const {
  std::vector<std::string> out;
  for (const auto& l : layers) {
    if (!l.hook.empty()) out.push_back(l.hook);
  }
  return out;
}

Shape NetworkSpec::hook_shape(const std::string& hook) const {
  const auto all = shapes();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].hook == hook) return all[i];
  }
  throw ConfigError("network " + name + " has no hook '" + hook + "'");
}

void NetworkSpec::set_hooks(const std::vector<std::string>& pool_names) {
  for (auto& l : layers) l.hook.clear();
  for (const auto& pool : pool_names) {
    std::size_t i = 0;
    while (i < layers.size() && !(layers[i].kind == LayerKind::kMaxPool && layers[i].name == pool)) {
      ++i;
    }
    if (i == layers.size()) {
      throw ConfigError("network " + name + " has no pooling layer '" + pool + "'");
    }
    if (i + 1 < layers.size() && layers[i + 1].kind == LayerKind::kStandardize) ++i;
    layers[i].hook = pool;
  }
}

// ---------------------------------------------------------------------------
// Loss

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const int n = logits.shape.n;
  const int k = static_cast<int>(logits.shape.per_sample());
  if (labels.size() != static_cast<std::size_t>(n)) {
    throw ShapeMismatch("loss: " + std::to_string(labels.size()) + " labels for batch of " +
                        std::to_string(n));
  }
  LossResult r;
  r.grad = Tensor(logits.shape);
  for (int b = 0; b < n; ++b) {
    const double* z = &logits.data[static_cast<std::size_t>(b) * k];
    double* g = &r.grad.data[static_cast<std::size_t>(b) * k];
    const double zmax = *std::max_element(z, z + k);
    double sum = 0;
    for (int j = 0; j < k; ++j) sum += std::exp(z[j] - zmax);
    const int y = labels[b];
    if (y < 0 || y >= k) throw RangeError("loss: label " + std::to_string(y) + " out of range");
    r.loss += -(z[y] - zmax - std::log(sum));
    for (int j = 0; j < k; ++j) g[j] = std::exp(z[j] - zmax) / sum / n;
    g[y] -= 1.0 / n;
  }
  r.loss /= n;
  return r;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t k = logits.shape.per_sample();
  std::vector<int> out(logits.shape.n);
  for (int b = 0; b < logits.shape.n; ++b) {
    const double* z = &logits.data[b * k];
    out[b] = static_cast<int>(std::max_element(z, z + k) - z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.shapes();
  std::mt19937_64 rng(seed);
  Shape s = per_sample(spec_.input);
  for (const auto& l : spec_.layers) {
    layers_.push_back(make_layer(l, s, rng));
    s = layers_.back()->output_shape(s);
  }
}

Tensor Model::forward(const Tensor& x, bool training, const ForwardHook& hook) {
  Tensor a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    a = layers_[i]->forward(a, training);
    if (hook && !spec_.layers[i].hook.empty()) {
      const Shape before = a.shape;
      hook(spec_.layers[i].hook, a);
      if (!(a.shape == before)) throw ShapeMismatch("hook " + spec_.layers[i].hook + " changed shape");
    }
  }
  return a;
}

Tensor Model::backward(const Tensor& grad_logits, const BackwardHook& hook) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (hook && !spec_.layers[i].hook.empty()) hook(spec_.layers[i].hook, g);
    g = layers_[i]->backward(g);
  }
  return g;
}

std::vector<ParamView> Model::params() {
  std::vector<ParamView> out;
  for (auto& l : layers_) {
    for (auto& p : l->params()) out.push_back(p);
  }
  return out;
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (auto& p : params()) n += p.values.size();
  return n;
}

void Model::zero_grads() {
  for (auto& p : params()) std::fill(p.grads.begin(), p.grads.end(), 0.0);
}

void Model::sgd_step(double lr) {
  for (auto& p : params()) {
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] -= lr * p.grads[i];
  }
  zero_grads();
}

bool Model::finite() {
  for (auto& p : params()) {
    for (double v : p.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

constexpr char kModelMagic[4] = {'W', 'M', 'D', 'L'};

std::vector<std::span<double>> all_buffers(Model& m) {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < m.layer_count(); ++i) {
    for (auto& p : m.layer(i).params()) out.push_back(p.values);
    for (auto& s : m.layer(i).state()) out.push_back(s);
  }
  return out;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>(v >> (8 * i)));
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(is.get())) << (8 * i);
  return v;
}

}  // namespace

void Model::save(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write model file " + path);
  os.write(kModelMagic, 4);
  const auto bufs = all_buffers(*this);
  std::uint64_t total = 0;
  for (const auto& b : bufs) total += b.size();
  put_u64(os, total);
  for (const auto& b : bufs) {
    for (double v : b) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(os, bits);
    }
  }
  if (!os) throw Error("failed writing model file " + path);
}

void Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read model file " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kModelMagic, 4) != 0) throw FormatError(path + ": not a model file");
  const auto bufs = all_buffers(*this);
  std::uint64_t total = 0;
  for (const auto& b : bufs) total += b.size();
  if (get_u64(is) != total) throw FormatError(path + ": parameter count does not match network");
  for (const auto& b : bufs) {
    for (double& v : b) {
      const std::uint64_t bits = get_u64(is);
      std::memcpy(&v, &bits, 8);
    }
  }
  if (!is) throw FormatError(path + ": truncated");
}

}  // namespace weave
