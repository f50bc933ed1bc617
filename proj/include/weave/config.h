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

#ifndef WEAVE_CONFIG_H_
#define WEAVE_CONFIG_H_

// Run configuration, loaded from YAML. Every field has a default; unknown
// keys and invalid values raise ConfigError prefixed with "origin:line:col".
//
//   parties: 2
//   precision: 8
//   network: I                  # I, II or III
//   hooks: [pool2, pool4]       # pooling layers followed by a transfer unit
//   theta: [[0.9, 0.1], [0.1, 0.9]]   # or theta_t: 0.1 for the uniform matrix
//   theta_mode: public          # or secret
//   data:
//     images: data/mnist-subset-images-idx3-ubyte.gz
//     labels: data/mnist-subset-labels-idx1-ubyte.gz
//     test_samples: 2000
//     samples_per_domain: 1000  # or one count per domain
//   train: {epochs: 10, pretrain_epochs: 0, batch_size: 128, learning_rate: 0.01,
//           keep: 0.8, seed: 1}
//   mode: in-process            # solo, in-process or tcp
//   roster: ["127.0.0.1:9101", "127.0.0.1:9102"]
//   tamper: {strategy: AddDeltaToValueShare, targets: [2], round: 0, element: 0, delta: 1}

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weave/adversary.h"
#include "weave/cnn.h"
#include "weave/dataset.h"
#include "weave/trainer.h"
#include "weave/transfer.h"
#include "weave/transport.h"

namespace weave {

enum class RunMode { kSolo, kInProcess, kTcp };
const char* to_string(RunMode m);

struct DataConfig {
  std::string images;
  std::string labels;
  // When set, a synthetic dataset from this seed replaces the IDX files.
  std::optional<std::uint64_t> synthetic_seed;
  std::size_t test_samples = 2000;
  // One entry per domain, or a single entry used by every domain.
  std::vector<std::size_t> samples_per_domain = {1000};

  std::size_t samples_of(int domain) const;
};

struct RunConfig {
  int parties = 2;
  int kappa = kRingBits;
  int precision = 8;
  std::string network = "I";
  std::optional<std::vector<std::string>> hooks;  // default: the network's own
  std::optional<std::vector<std::vector<double>>> theta;
  double theta_t = 0.1;
  ThetaMode theta_mode = ThetaMode::kPublic;
  std::size_t chunk_locations = 2048;
  DataConfig data;
  TrainConfig train;
  RunMode mode = RunMode::kInProcess;
  std::vector<HostPort> roster;
  int party = 0;  // this process's party in tcp mode
  std::string preprocessing_dir;
  std::chrono::milliseconds timeout = kDefaultRoundTimeout;
  int cv_folds = 0;  // 0: fixed held-out split
  std::optional<TamperPlan> tamper;

  NetworkSpec network_spec() const;
  DegreeMatrix degree_matrix() const;
  FixedPointCodec codec() const { return FixedPointCodec(precision, kappa); }
  // Cross-field checks; throws ConfigError.
  void validate() const;
};

RunConfig parse_run_config(const std::string& yaml, const std::string& origin = "<config>");
RunConfig load_run_config(const std::string& path);

// Training split and shared test split. The first test_samples samples are
// the test set; domain i takes the next samples_of(i) samples in order.
struct DomainData {
  std::vector<Dataset> domains;
  Dataset test;
};
DomainData load_domain_data(const RunConfig& cfg);

// Offline material one collaborative run consumes, training and evaluation
// included, before and after the safety margin of one tenth (rounded up).
struct RunDemand {
  std::uint64_t triples = 0;
  std::uint64_t masks_per_owner = 0;
  std::uint64_t triples_with_margin = 0;
  std::uint64_t masks_with_margin = 0;
};
// Throws ConfigError("demand overflow ...") if a count does not fit 64 bits.
RunDemand run_demand(const RunConfig& cfg);

}  // namespace weave

#endif  // WEAVE_CONFIG_H_
