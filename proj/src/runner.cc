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

#include "weave/runner.h"

#include <algorithm>
#include <memory>
#include <mutex>

#include "weave/adversary.h"
#include "weave/errors.h"
#include "weave/preprocessing.h"
#include "weave/simulation.h"

namespace weave {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted:
      return "Completed";
    case RunStatus::kAborted:
      return "Aborted";
    case RunStatus::kUndetectedDeviation:
      return "UndetectedDeviation";
  }
  return "?";
}

std::filesystem::path preprocessing_path(const std::filesystem::path& dir, int party) {
  return dir / ("party-" + std::to_string(party) + ".vtlp");
}

namespace {

// One training pass over every domain: the whole data split or one fold.
struct Split {
  std::vector<Dataset> train;
  std::vector<Dataset> test;  // one per domain
  std::optional<int> fold;
};

std::vector<Split> make_splits(const RunConfig& cfg, const DomainData& data) {
  if (cfg.cv_folds == 0) {
    return {{data.domains, std::vector<Dataset>(data.domains.size(), data.test), std::nullopt}};
  }
  const std::size_t k = static_cast<std::size_t>(cfg.cv_folds);
  std::vector<Split> out;
  for (std::size_t f = 0; f < k; ++f) {
    Split s;
    s.fold = static_cast<int>(f + 1);
    for (const auto& d : data.domains) {
      if (d.size() < k) throw ConfigError("cv_folds exceeds a domain's sample count");
      const std::size_t lo = d.size() * f / k, hi = d.size() * (f + 1) / k;
      Dataset train = d.slice(0, lo);
      const Dataset tail = d.slice(hi, d.size());
      train.pixels.insert(train.pixels.end(), tail.pixels.begin(), tail.pixels.end());
      train.labels.insert(train.labels.end(), tail.labels.begin(), tail.labels.end());
      s.train.push_back(std::move(train));
      s.test.push_back(d.slice(lo, hi));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t epoch_samples(const std::vector<Dataset>& domains) {
  std::size_t m = 0;
  for (const auto& d : domains) m = std::max(m, d.size());
  return m;
}

void add_records(std::vector<MetricsRecord>& out, const std::vector<EpochRecord>& recs,
                 const RunConfig& cfg, std::optional<int> fold) {
  for (const auto& r : recs) out.push_back({r, !cfg.train.reproducible, fold});
}

void write_models(const RunSinks& sinks,
                  std::vector<std::pair<int, Model*>> models, RunReport& report) {
  if (sinks.model_dir.empty()) return;
  std::filesystem::create_directories(sinks.model_dir);
  for (auto& [domain, model] : models) {
    const auto path = std::filesystem::path(sinks.model_dir) / ("domain-" + std::to_string(domain) + ".wmdl");
    model->save(path.string());
    report.model_files.push_back(path.string());
  }
}

CollaborationOptions collab_options(const RunConfig& cfg, const std::vector<Dataset>& train) {
  CollaborationOptions o;
  o.codec = cfg.codec();
  o.transfer.mode = cfg.theta_mode;
  o.transfer.chunk_locations = cfg.chunk_locations;
  o.epoch_samples = epoch_samples(train);
  return o;
}

}  // namespace

RunReport execute_run(const RunConfig& cfg, const RunSinks& sinks) {
  cfg.validate();
  const auto spec = cfg.network_spec();
  const auto data = load_domain_data(cfg);
  const auto splits = make_splits(cfg, data);
  RunReport report;
  std::vector<std::unique_ptr<Model>> last_models;
  std::vector<int> last_domains;

  for (const auto& split : splits) {
    last_models.clear();
    last_domains.clear();
    if (cfg.mode == RunMode::kSolo) {
      for (int i = 1; i <= cfg.parties; ++i) {
        auto r = train_solo(spec, split.train[i - 1], split.test[i - 1], cfg.train, i);
        add_records(report.records, r.records, cfg, split.fold);
        last_models.push_back(std::move(r.model));
        last_domains.push_back(i);
      }
      continue;
    }

    const auto theta = cfg.degree_matrix();
    const auto options = collab_options(cfg, split.train);

    if (cfg.mode == RunMode::kTcp) {
      const PartyId me(cfg.party);
      if (cfg.party < 1 || cfg.party > cfg.parties) {
        throw ConfigError("tcp mode needs --party in [1, " + std::to_string(cfg.parties) + "]");
      }
      PooledPreprocessing pre(read_preprocessing_file(preprocessing_path(cfg.preprocessing_dir, cfg.party)));
      TcpNetwork net(me, cfg.roster, cfg.timeout);
      net.set_timeout(cfg.timeout);
      Engine engine(net, pre);
      try {
        auto r = train_domain(spec, split.train[me.slot()], split.test[me.slot()], cfg.train,
                              cfg.party, &engine, &theta, options);
        add_records(report.records, r.records, cfg, split.fold);
        last_models.push_back(std::move(r.model));
        last_domains.push_back(cfg.party);
      } catch (const ProtocolAbort& e) {
        report.status = RunStatus::kAborted;
        report.abort_round = e.round();
        report.detected_by = e.detected_by();
        report.detail = e.what();
        break;
      }
      continue;
    }

    // In-process.
    Experiment ex;
    ex.n = cfg.parties;
    ex.options.timeout = cfg.timeout;
    ex.options.dealer_seed = derive_seed(seed_from_u64(cfg.train.seed), "dealer",
                                         static_cast<std::uint64_t>(split.fold.value_or(0)));
    if (!cfg.preprocessing_dir.empty()) {
      const std::string dir = cfg.preprocessing_dir;
      ex.options.make_preprocessing = [dir, n = cfg.parties](PartyId p) {
        auto m = read_preprocessing_file(preprocessing_path(dir, p.index()));
        if (m.parties != n || m.party != p) {
          throw ConfigError(preprocessing_path(dir, p.index()).string() +
                            " was dealt for a different party set");
        }
        return std::unique_ptr<Preprocessing>(std::make_unique<PooledPreprocessing>(std::move(m)));
      };
    }
    std::vector<DomainResult> results(static_cast<std::size_t>(cfg.parties));
    ex.body = [&](Engine& engine) {
      const int me = engine.self().index();
      results[me - 1] = train_domain(spec, split.train[me - 1], split.test[me - 1], cfg.train, me,
                                     &engine, &theta, options);
    };
    TamperPlan plan;
    if (cfg.tamper) plan = *cfg.tamper;
    const auto out = run_with_adversary(plan, ex);
    report.transcripts = out.run.transcripts;
    if (out.kind == OutcomeKind::kAborted) {
      report.status = RunStatus::kAborted;
      report.abort_round = out.abort_round;
      report.detected_by = out.detected_by;
      report.detail = out.detail;
      break;
    }
    if (out.kind == OutcomeKind::kUndetectedDeviation) report.status = RunStatus::kUndetectedDeviation;
    for (int i = 1; i <= cfg.parties; ++i) {
      add_records(report.records, results[i - 1].records, cfg, split.fold);
      last_models.push_back(std::move(results[i - 1].model));
      last_domains.push_back(i);
    }
  }

  if (sinks.metrics) write_metrics(*sinks.metrics, report.records);
  if (report.status != RunStatus::kAborted) {
    std::vector<std::pair<int, Model*>> models;
    for (std::size_t k = 0; k < last_models.size(); ++k) models.emplace_back(last_domains[k], last_models[k].get());
    write_models(sinks, models, report);
  }
  return report;
}

RunDemand deal_files(const RunConfig& cfg, const std::filesystem::path& dir, RandomSource& rng) {
  if (cfg.parties < 2) throw ConfigError("dealing needs at least two parties");
  const auto demand = run_demand(cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  const auto bundle = deal(cfg.parties, demand.triples_with_margin, rng, demand.masks_with_margin);
  for (const auto& m : bundle) write_preprocessing_file(preprocessing_path(dir, m.party.index()), m);
  return demand;
}

}  // namespace weave
