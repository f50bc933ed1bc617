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

#ifndef WEAVE_CNN_H_
#define WEAVE_CNN_H_

// A small CNN for 28x28 single-channel images: convolution, ReLU, 2x2 max
// pooling, per-channel standardization, inverted dropout and dense layers,
// trained with softmax cross-entropy and plain SGD in double precision.
//
// Transfer hooks are named points in the layer chain. During forward the
// hook callback may replace the activation in place; during backward the
// matching callback maps the gradient of the hook's output to the gradient of
// its input.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "weave/tensor.h"

namespace weave {

enum class LayerKind { kConv, kRelu, kMaxPool, kStandardize, kDropout, kFull };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::string name;
  int kernel = 0;     // conv: square kernel size
  int units = 0;      // conv: output channels; full: output units
  int padding = 0;    // conv: zero padding on every side
  double keep = 1.0;  // dropout: keep probability
  std::string hook;   // non-empty: a transfer hook of this name follows
};

struct NetworkSpec {
  std::string name;
  Shape input{1, 28, 28, 1};
  int classes = 10;
  std::vector<LayerSpec> layers;

  // 24x24x6 -> pool 12x12x6 -> 8x8x12 -> pool 4x4x12 -> 10, hooks after the
  // standardized output of each pool.
  static NetworkSpec network_i(double keep = 0.8);
  // 24x24x20 -> pool 12x12x20 -> 100 -> 10, one hook after the pool.
  static NetworkSpec network_ii(double keep = 0.8);
  // padded 28x28x6 -> pool 14x14x6 -> 10x10x16 -> pool 5x5x16 -> 120 -> 84 -> 10.
  static NetworkSpec network_iii(double keep = 0.8);
  // "I", "II" or "III". Throws ConfigError otherwise.
  static NetworkSpec by_name(const std::string& name, double keep = 0.8);

  // Per-sample output shape after every layer. Throws ShapeMismatch when the
  // chain is inconsistent.
  std::vector<Shape> shapes() const;
  std::vector<std::string> hook_names() const;
  // Per-sample shape seen at the named hook.
  Shape hook_shape(const std::string& hook) const;
  // Moves hooks to the standardized outputs of the named pooling layers.
  // Throws ConfigError for unknown names.
  void set_hooks(const std::vector<std::string>& pool_names);
};

struct ParamView {
  std::span<double> values;
  std::span<double> grads;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;
  const std::string& name() const { return name_; }

  virtual Shape output_shape(const Shape& in) const = 0;
  // Caches what backward needs.
  virtual Tensor forward(const Tensor& x, bool training) = 0;
  // Returns the input gradient and accumulates parameter gradients.
  virtual Tensor backward(const Tensor& grad) = 0;
  virtual std::vector<ParamView> params() { return {}; }
  // Non-trained buffers that still belong in a saved model.
  virtual std::vector<std::span<double>> state() { return {}; }

 private:
  std::string name_;
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in, std::mt19937_64& rng);

// Mean softmax cross-entropy over the batch and its gradient w.r.t. logits.
struct LossResult {
  double loss = 0;
  Tensor grad;
};
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

class Model {
 public:
  using ForwardHook = std::function<void(const std::string& hook, Tensor& activation)>;
  using BackwardHook = std::function<void(const std::string& hook, Tensor& grad)>;

  // He-uniform weights, zero biases, dropout masks from `seed`.
  Model(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  Tensor forward(const Tensor& x, bool training, const ForwardHook& hook = {});
  // Returns the gradient w.r.t. the input.
  Tensor backward(const Tensor& grad_logits, const BackwardHook& hook = {});
  void zero_grads();
  void sgd_step(double lr);

  std::vector<ParamView> params();
  std::size_t param_count();
  bool finite();
  Layer& layer(std::size_t i) { return *layers_[i]; }
  std::size_t layer_count() const { return layers_.size(); }

  // Flat little-endian dump of every parameter ("WMDL" header).
  void save(const std::string& path);
  void load(const std::string& path);

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace weave

#endif  // WEAVE_CNN_H_
