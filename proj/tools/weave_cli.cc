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

// weave: preprocessing, training runs, reports and tamper sweeps.
//
// Exit codes: 0 completed, 2 usage or configuration error, 3 protocol abort,
// 4 other failure (I/O, data), 5 transport failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weave/adversary.h"
#include "weave/config.h"
#include "weave/errors.h"
#include "weave/metrics.h"
#include "weave/runner.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;
constexpr int kExitFailure = 4;
constexpr int kExitTransport = 5;

using namespace weave;

struct Overrides {
  std::string config;
  std::optional<int> parties, epochs, pretrain_epochs, party, cv_folds, batch_size;
  std::optional<std::uint64_t> seed, synthetic_seed;
  std::optional<std::size_t> samples, test_samples;
  std::optional<std::string> network, mode, preprocessing, images, labels, theta_mode;
  std::optional<double> theta_t;
  bool reproducible = false;

  void add_to(CLI::App& app) {
    app.add_option("-c,--config", config, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("-n,--parties", parties, "number of domains");
    app.add_option("--network", network, "I, II or III");
    app.add_option("--epochs", epochs);
    app.add_option("--pretrain-epochs", pretrain_epochs, "local epochs before collaboration");
    app.add_option("--batch-size", batch_size);
    app.add_option("--seed", seed, "training seed");
    app.add_option("--samples", samples, "training samples per domain");
    app.add_option("--test-samples", test_samples);
    app.add_option("--images", images, "IDX image file (.gz or raw)");
    app.add_option("--labels", labels, "IDX label file (.gz or raw)");
    app.add_option("--synthetic", synthetic_seed, "use a synthetic dataset with this seed");
    app.add_option("--theta-t", theta_t, "off-diagonal degree of the uniform matrix");
    app.add_option("--theta-mode", theta_mode, "public or secret");
    app.add_option("--mode", mode, "solo, in-process or tcp");
    app.add_option("--party", party, "this process's party (tcp mode)");
    app.add_option("--preprocessing", preprocessing, "directory of per-party preprocessing files");
    app.add_option("--cv-folds", cv_folds, "k-fold cross validation instead of the held-out split");
    app.add_flag("--reproducible", reproducible, "omit wall_time so equal seeds give identical metrics");
  }

  RunConfig load() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    if (config.empty()) {
      cfg.data.images = "data/mnist-subset-images-idx3-ubyte.gz";
      cfg.data.labels = "data/mnist-subset-labels-idx1-ubyte.gz";
    }
    if (parties) cfg.parties = *parties;
    if (network) cfg.network = *network;
    if (epochs) cfg.train.epochs = *epochs;
    if (pretrain_epochs) cfg.train.pretrain_epochs = *pretrain_epochs;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (seed) cfg.train.seed = *seed;
    if (samples) cfg.data.samples_per_domain = {*samples};
    if (test_samples) cfg.data.test_samples = *test_samples;
    if (images) cfg.data.images = *images;
    if (labels) cfg.data.labels = *labels;
    if (synthetic_seed) cfg.data.synthetic_seed = *synthetic_seed;
    if (theta_t) {
      cfg.theta_t = *theta_t;
      cfg.theta.reset();
    }
    if (theta_mode) {
      if (*theta_mode == "public") {
        cfg.theta_mode = ThetaMode::kPublic;
      } else if (*theta_mode == "secret") {
        cfg.theta_mode = ThetaMode::kSecret;
      } else {
        throw ConfigError("--theta-mode must be public or secret");
      }
    }
    if (mode) {
      if (*mode == "solo") {
        cfg.mode = RunMode::kSolo;
      } else if (*mode == "in-process") {
        cfg.mode = RunMode::kInProcess;
      } else if (*mode == "tcp") {
        cfg.mode = RunMode::kTcp;
      } else {
        throw ConfigError("--mode must be solo, in-process or tcp");
      }
    }
    if (party) cfg.party = *party;
    if (preprocessing) cfg.preprocessing_dir = *preprocessing;
    if (cv_folds) cfg.cv_folds = *cv_folds;
    if (reproducible) cfg.train.reproducible = true;
    cfg.validate();
    return cfg;
  }
};

int cmd_deal(const Overrides& o, const std::string& out, std::optional<std::uint64_t> seed) {
  const RunConfig cfg = o.load();
  std::unique_ptr<RandomSource> rng;
  if (seed) {
    rng = std::make_unique<ChaChaRng>(derive_seed(seed_from_u64(*seed), "deal"));
  } else {
    rng = std::make_unique<SystemRng>();
  }
  const auto d = deal_files(cfg, out, *rng);
  nlohmann::json j;
  j["parties"] = cfg.parties;
  j["triples"] = d.triples;
  j["triples_dealt"] = d.triples_with_margin;
  j["masks_per_owner"] = d.masks_per_owner;
  j["masks_dealt"] = d.masks_with_margin;
  j["dir"] = out;
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int cmd_run(const Overrides& o, const std::string& metrics_path, const std::string& model_dir) {
  const RunConfig cfg = o.load();
  std::ofstream file;
  std::ostream* metrics = &std::cout;
  if (!metrics_path.empty() && metrics_path != "-") {
    file.open(metrics_path);
    if (!file) throw Error("cannot write metrics to " + metrics_path);
    metrics = &file;
  }
  const auto report = execute_run(cfg, {metrics, model_dir});
  if (report.status == RunStatus::kAborted) {
    std::cerr << error_record("ProtocolAbort", report.detail, report.detected_by, report.abort_round)
              << '\n';
    return kExitAbort;
  }
  nlohmann::json j;
  j["status"] = to_string(report.status);
  j["mode"] = to_string(cfg.mode);
  j["models"] = report.model_files;
  std::cerr << j.dump() << '\n';
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& files, const std::string& format) {
  std::vector<ReportRow> rows;
  for (const auto& f : files) {
    const auto records = read_metrics(f);
    if (format == "jsonl") {
      for (const auto& r : records) std::cout << to_json_line(r) << '\n';
    }
    rows.push_back(summarize(f, records));
  }
  if (format == "table") std::cout << render_table(rows);
  return kExitOk;
}

int cmd_sweep(int parties, std::uint64_t trials, std::uint64_t seed,
              const std::vector<std::string>& strategies, const std::string& delta_mode,
              long long delta) {
  DeltaMode mode = DeltaMode::kFixed;
  if (delta_mode == "uniform") {
    mode = DeltaMode::kUniform;
  } else if (delta_mode == "odd") {
    mode = DeltaMode::kUniformOdd;
  } else if (delta_mode == "high-bit") {
    mode = DeltaMode::kFixed;
  } else if (delta_mode != "fixed") {
    throw ConfigError("--delta-mode must be fixed, uniform, odd or high-bit");
  }
  std::vector<std::string> names = strategies;
  if (names.empty()) {
    names = {"AddDeltaToValueShare", "CorruptMacShare", "SkewBeaverTriple", "InconsistentBroadcast"};
  }
  for (const auto& name : names) {
    TamperPlan plan;
    plan.strategy = parse_strategy(name);
    for (int i = 2; i <= parties; ++i) plan.targets.push_back(i);
    if (plan.strategy == TamperStrategy::kNone) plan.targets.clear();
    plan.delta = RingElement::from_signed(delta);
    if (delta_mode == "high-bit") plan.delta.value = Word{1} << (kRingBits - 1);
    const auto s = detection_rate(plan, parties, trials, seed, mode);
    nlohmann::json j;
    j["strategy"] = name;
    j["parties"] = parties;
    j["delta_mode"] = delta_mode;
    j["trials"] = s.trials;
    j["aborted"] = s.aborted;
    j["undetected"] = s.undetected;
    j["rate"] = s.rate();
    std::cout << j.dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiparty training over shared activation maps"};
  app.require_subcommand(1);

  Overrides deal_o, run_o;
  std::string deal_out;
  std::optional<std::uint64_t> deal_seed;
  auto* deal = app.add_subcommand("deal", "write per-party preprocessing files");
  deal_o.add_to(*deal);
  deal->add_option("-o,--out", deal_out, "output directory")->required();
  deal->add_option("--dealer-seed", deal_seed, "deterministic dealer (tests only)");

  std::string metrics_path, model_dir;
  auto* run = app.add_subcommand("run", "train and emit per-epoch metrics");
  run_o.add_to(*run);
  run->add_option("-m,--metrics", metrics_path, "metrics file (default stdout)");
  run->add_option("--model-dir", model_dir, "write trained models here on completion");

  std::vector<std::string> report_files;
  std::string report_format = "table";
  auto* report = app.add_subcommand("report", "compare metrics files");
  report->add_option("files", report_files, "metrics files")->required()->check(CLI::ExistingFile);
  report->add_option("--format", report_format, "table or jsonl")
      ->check(CLI::IsMember({"table", "jsonl"}));

  int sweep_n = 2;
  std::uint64_t sweep_trials = 1000, sweep_seed = 1;
  std::vector<std::string> sweep_strategies;
  std::string sweep_delta_mode = "odd";
  long long sweep_delta = 1;
  auto* sweep = app.add_subcommand("tamper-sweep", "measure detection rates");
  sweep->add_option("-n,--parties", sweep_n);
  sweep->add_option("--trials", sweep_trials);
  sweep->add_option("--seed", sweep_seed);
  sweep->add_option("--strategy", sweep_strategies, "repeatable; default all deviating ones");
  sweep->add_option("--delta-mode", sweep_delta_mode, "fixed, uniform, odd or high-bit");
  sweep->add_option("--delta", sweep_delta, "delta for --delta-mode fixed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*deal) return cmd_deal(deal_o, deal_out, deal_seed);
    if (*run) return cmd_run(run_o, metrics_path, model_dir);
    if (*report) return cmd_report(report_files, report_format);
    if (*sweep) return cmd_sweep(sweep_n, sweep_trials, sweep_seed, sweep_strategies, sweep_delta_mode, sweep_delta);
  } catch (const ConfigError& e) {
    std::cerr << error_record("ConfigError", e.what()) << '\n';
    return kExitUsage;
  } catch (const ProtocolAbort& e) {
    std::cerr << error_record("ProtocolAbort", e.what(), e.detected_by(), e.round()) << '\n';
    return kExitAbort;
  } catch (const TransportError& e) {
    std::cerr << error_record("TransportError", e.what()) << '\n';
    return kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << error_record("Error", e.what()) << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
