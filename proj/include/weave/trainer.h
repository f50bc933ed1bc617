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

#ifndef WEAVE_TRAINER_H_
#define WEAVE_TRAINER_H_

// Training loops. A domain trains on its own data; in a collaborative run
// every hook activation goes through the secure weave unit and the gradient
// at the hook is mapped back with the domain's own degree. All domains run
// the same number of steps with index-aligned batches, so their transfer
// rounds line up.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "weave/cnn.h"
#include "weave/dataset.h"
#include "weave/protocol.h"
#include "weave/simulation.h"
#include "weave/transfer.h"

namespace weave {

struct TrainConfig {
  int batch_size = 128;
  double learning_rate = 0.01;
  double keep = 0.8;
  int epochs = 10;
  // Collaborative runs first train each domain locally for this many epochs,
  // then run `epochs` epochs through the transfer units. Ignored by solo
  // training.
  int pretrain_epochs = 0;
  std::uint64_t seed = 1;
  // Omits wall_time so that metrics of equal-seed runs are byte-identical.
  bool reproducible = false;

  // Throws ConfigError.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;   // 1-based
  int domain = 0;  // 1-based party index
  double train_loss = 0;  // mean over the epoch's batches
  double test_accuracy = 0;
  double wall_time = 0;  // seconds spent in this epoch, evaluation included
};

using EpochCallback = std::function<void(const EpochRecord&)>;

struct CollaborationOptions {
  FixedPointCodec codec{};
  SecureTransferOptions transfer{};
  // Samples per epoch shared by all domains; a domain with fewer samples
  // wraps around its shuffled order. 0 means the domain's own size.
  std::size_t epoch_samples = 0;
};

struct DomainResult {
  std::unique_ptr<Model> model;
  std::vector<EpochRecord> records;
  std::vector<std::vector<double>> batch_losses;  // [epoch - 1][batch]
};

// Seeds derived from (seed, domain) for initialization and for shuffling;
// solo and collaborative runs of the same domain use the same ones.
std::uint64_t init_seed(std::uint64_t seed, int domain);
std::uint64_t shuffle_seed(std::uint64_t seed, int domain);

// Fraction of argmax-correct predictions, in batches of `batch_size`. Throws
// RangeError on an empty test set.
double evaluate(Model& model, const Dataset& test, int batch_size,
                const Model::ForwardHook& hook = {});

// One domain's loop. With a null engine the hooks are inactive (solo). With
// an engine, `theta` is required and every party must call this with the
// same config, test set size and epoch_samples.
DomainResult train_domain(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                          const TrainConfig& cfg, int domain, Engine* engine,
                          const DegreeMatrix* theta, const CollaborationOptions& options = {},
                          const EpochCallback& on_epoch = {});

DomainResult train_solo(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                        const TrainConfig& cfg, int domain = 1,
                        const EpochCallback& on_epoch = {});

struct CollaborativeResult {
  // Empty unless every party completed.
  std::vector<DomainResult> domains;
  LocalRunResult run;
};

// All domains as threads of this process. With one domain no protocol runs
// and the result equals train_solo. epoch_samples defaults to the largest
// domain. On abort the partial models are discarded.
CollaborativeResult train_collaborative(const NetworkSpec& spec,
                                        const std::vector<Dataset>& domains,
                                        const Dataset& test, const DegreeMatrix& theta,
                                        const TrainConfig& cfg,
                                        CollaborationOptions options = {},
                                        const LocalRunOptions& run_options = {},
                                        const EpochCallback& on_epoch = {});

}  // namespace weave

#endif  // WEAVE_TRAINER_H_
