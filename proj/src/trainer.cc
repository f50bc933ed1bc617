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

#include "weave/trainer.h"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <numeric>
#include <random>

#include "weave/errors.h"

namespace weave {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(keep > 0 && keep <= 1)) throw ConfigError("dropout keep must be in (0, 1]");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be non-negative");
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t init_seed(std::uint64_t seed, int domain) {
  return mix(mix(seed) ^ static_cast<std::uint64_t>(domain));
}

std::uint64_t shuffle_seed(std::uint64_t seed, int domain) {
  return mix(init_seed(seed, domain) ^ 0x53485546464c45ULL);
}

double evaluate(Model& model, const Dataset& test, int batch_size,
                const Model::ForwardHook& hook) {
  if (test.size() == 0) throw RangeError("evaluate: empty test set");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  std::vector<int> labels;
  for (std::size_t start = 0; start < test.size(); start += batch_size) {
    const std::size_t end = std::min(test.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor x = test.batch(idx, &labels);
    const auto pred = argmax_rows(model.forward(x, false, hook));
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

DomainResult train_domain(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                          const TrainConfig& cfg, int domain, Engine* engine,
                          const DegreeMatrix* theta, const CollaborationOptions& options,
                          const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) throw RangeError("domain " + std::to_string(domain) + " has no samples");
  if (engine && !theta) throw ConfigError("collaborative training needs a degree matrix");
  if (engine && theta->size() != engine->parties()) {
    throw ConfigError("degree matrix is " + std::to_string(theta->size()) + "x" +
                      std::to_string(theta->size()) + " for " +
                      std::to_string(engine->parties()) + " domains");
  }

  NetworkSpec net = spec;
  for (auto& l : net.layers) {
    if (l.kind == LayerKind::kDropout) l.keep = cfg.keep;
  }
  DomainResult result;
  result.model = std::make_unique<Model>(net, init_seed(cfg.seed, domain));
  Model& model = *result.model;

  Model::ForwardHook fwd;
  Model::BackwardHook bwd;
  if (engine) {
    fwd = [&](const std::string& hook, Tensor& a) {
      a = weave_forward_secure(*engine, a, *theta, options.codec, hook, options.transfer);
    };
    bwd = [&](const std::string&, Tensor& g) { g = local_backward(g, *theta, engine->self()); };
  }

  std::mt19937_64 shuffle(shuffle_seed(cfg.seed, domain));
  const std::size_t per_epoch = options.epoch_samples ? options.epoch_samples : train.size();
  std::vector<std::size_t> order(train.size());
  std::vector<std::size_t> idx;
  std::vector<int> labels;

  const int local_epochs = engine ? cfg.pretrain_epochs : 0;
  for (int epoch = 1; epoch <= local_epochs + cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool mixing = epoch > local_epochs;
    const auto& f = mixing ? fwd : Model::ForwardHook{};
    const auto& b = mixing ? bwd : Model::BackwardHook{};
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle);
    double loss_sum = 0;
    int batches = 0;
    auto& losses = result.batch_losses.emplace_back();
    const std::size_t samples = mixing ? per_epoch : train.size();
    for (std::size_t start = 0; start < samples; start += cfg.batch_size) {
      const std::size_t end = std::min(samples, start + cfg.batch_size);
      idx.clear();
      for (std::size_t i = start; i < end; ++i) idx.push_back(order[i % order.size()]);
      const Tensor x = train.batch(idx, &labels);
      const Tensor logits = model.forward(x, true, f);
      auto loss = softmax_cross_entropy(logits, labels);
      model.backward(loss.grad, b);
      model.sgd_step(cfg.learning_rate);
      loss_sum += loss.loss;
      losses.push_back(loss.loss);
      ++batches;
    }
    if (!model.finite()) {
      throw Error("domain " + std::to_string(domain) + ": parameters diverged in epoch " +
                  std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.domain = domain;
    rec.train_loss = batches ? loss_sum / batches : 0.0;
    rec.test_accuracy = evaluate(model, test, cfg.batch_size, f);
    if (!cfg.reproducible) {
      rec.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    result.records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

DomainResult train_solo(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                        const TrainConfig& cfg, int domain, const EpochCallback& on_epoch) {
  return train_domain(spec, train, test, cfg, domain, nullptr, nullptr, {}, on_epoch);
}

CollaborativeResult train_collaborative(const NetworkSpec& spec,
                                        const std::vector<Dataset>& domains,
                                        const Dataset& test, const DegreeMatrix& theta,
                                        const TrainConfig& cfg, CollaborationOptions options,
                                        const LocalRunOptions& run_options,
                                        const EpochCallback& on_epoch) {
  const int n = static_cast<int>(domains.size());
  if (n == 0) throw ConfigError("no domains");
  if (theta.size() != n) {
    throw ConfigError("degree matrix size " + std::to_string(theta.size()) + " for " +
                      std::to_string(n) + " domains");
  }
  CollaborativeResult out;
  if (n == 1) {
    out.domains.push_back(train_solo(spec, domains[0], test, cfg, 1, on_epoch));
    return out;
  }
  if (options.epoch_samples == 0) {
    for (const auto& d : domains) options.epoch_samples = std::max(options.epoch_samples, d.size());
  }
  std::vector<DomainResult> results(n);
  std::mutex cb_mu;
  EpochCallback locked;
  if (on_epoch) {
    locked = [&](const EpochRecord& r) {
      std::lock_guard<std::mutex> lock(cb_mu);
      on_epoch(r);
    };
  }
  out.run = run_local(n, run_options, [&](Engine& engine) {
    const int me = engine.self().index();
    results[me - 1] =
        train_domain(spec, domains[me - 1], test, cfg, me, &engine, &theta, options, locked);
  });
  if (out.run.all_ok()) out.domains = std::move(results);
  return out;
}

}  // namespace weave
