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

#include "weave/config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "weave/errors.h"

namespace weave {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::kSolo:
      return "solo";
    case RunMode::kInProcess:
      return "in-process";
    case RunMode::kTcp:
      return "tcp";
  }
  return "?";
}

std::size_t DataConfig::samples_of(int domain) const {
  if (samples_per_domain.empty()) return 0;
  if (samples_per_domain.size() == 1) return samples_per_domain[0];
  return samples_per_domain.at(static_cast<std::size_t>(domain - 1));
}

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const auto m = at.Mark();
    std::ostringstream os;
    os << origin_;
    if (m.line >= 0) os << ':' << m.line + 1 << ':' << m.column + 1;
    os << ": " << what;
    throw ConfigError(os.str());
  }

  template <class T>
  T get(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, key + ": cannot read '" + scalar(n) + "' as " + type_name<T>());
    }
  }

  void only_keys(const YAML::Node& map, const std::string& where,
                 std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
      const auto k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        fail(kv.first, "unknown key '" + k + "' in " + where);
      }
    }
  }

 private:
  static std::string scalar(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    if constexpr (std::is_integral_v<T>) return "an integer";
    if constexpr (std::is_floating_point_v<T>) return "a number";
    return "a string";
  }

  std::string origin_;
};

template <class T>
void read_into(const Reader& r, const YAML::Node& map, const char* key, T& out) {
  if (const auto n = map[key]) out = r.get<T>(n, key);
}

std::vector<std::string> string_list(const Reader& r, const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) r.fail(n, key + " must be a list");
  std::vector<std::string> out;
  for (const auto& e : n) out.push_back(r.get<std::string>(e, key));
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  const Reader r(origin);
  r.only_keys(root, "run configuration",
              {"parties", "kappa", "precision", "network", "hooks", "theta", "theta_t",
               "theta_mode", "chunk_locations", "data", "train", "mode", "roster", "party",
               "preprocessing_dir", "timeout_ms", "cv_folds", "tamper"});

  read_into(r, root, "parties", cfg.parties);
  read_into(r, root, "kappa", cfg.kappa);
  read_into(r, root, "precision", cfg.precision);
  read_into(r, root, "network", cfg.network);
  read_into(r, root, "theta_t", cfg.theta_t);
  read_into(r, root, "chunk_locations", cfg.chunk_locations);
  read_into(r, root, "party", cfg.party);
  read_into(r, root, "preprocessing_dir", cfg.preprocessing_dir);
  read_into(r, root, "cv_folds", cfg.cv_folds);

  if (const auto n = root["parties"]; n && cfg.parties < 1) r.fail(n, "parties must be at least 1");
  if (const auto n = root["kappa"]; n && cfg.kappa != kRingBits) {
    r.fail(n, "kappa " + std::to_string(cfg.kappa) + " does not match this build's ring (" +
                  std::to_string(kRingBits) + " bits)");
  }
  if (const auto n = root["precision"]) {
    try {
      FixedPointCodec(cfg.precision, cfg.kappa);
    } catch (const std::invalid_argument& e) {
      r.fail(n, e.what());
    }
  }
  if (const auto n = root["network"]) {
    try {
      NetworkSpec::by_name(cfg.network);
    } catch (const ConfigError& e) {
      r.fail(n, e.what());
    }
  }
  if (const auto n = root["hooks"]) {
    cfg.hooks = string_list(r, n, "hooks");
    try {
      NetworkSpec::by_name(cfg.network).set_hooks(*cfg.hooks);
    } catch (const ConfigError& e) {
      r.fail(n, e.what());
    }
  }
  if (const auto n = root["theta"]) {
    if (!n.IsSequence()) r.fail(n, "theta must be a list of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : n) {
      if (!row.IsSequence()) r.fail(row, "theta rows must be lists");
      auto& out = rows.emplace_back();
      for (const auto& v : row) out.push_back(r.get<double>(v, "theta"));
    }
    try {
      DegreeMatrix{rows};
    } catch (const ConfigError& e) {
      r.fail(n, e.what());
    }
    cfg.theta = rows;
  }
  if (const auto n = root["theta_mode"]) {
    const auto v = r.get<std::string>(n, "theta_mode");
    if (v == "public") {
      cfg.theta_mode = ThetaMode::kPublic;
    } else if (v == "secret") {
      cfg.theta_mode = ThetaMode::kSecret;
    } else {
      r.fail(n, "theta_mode must be public or secret");
    }
  }
  if (const auto n = root["mode"]) {
    const auto v = r.get<std::string>(n, "mode");
    if (v == "solo") {
      cfg.mode = RunMode::kSolo;
    } else if (v == "in-process") {
      cfg.mode = RunMode::kInProcess;
    } else if (v == "tcp") {
      cfg.mode = RunMode::kTcp;
    } else {
      r.fail(n, "mode must be solo, in-process or tcp");
    }
  }
  if (const auto n = root["roster"]) {
    for (const auto& e : n.IsSequence() ? n : YAML::Node()) {
      try {
        cfg.roster.push_back(parse_host_port(r.get<std::string>(e, "roster")));
      } catch (const ConfigError& ex) {
        r.fail(e, ex.what());
      }
    }
    if (!n.IsSequence()) r.fail(n, "roster must be a list of host:port");
  }
  if (const auto n = root["timeout_ms"]) {
    const auto ms = r.get<long long>(n, "timeout_ms");
    if (ms <= 0) r.fail(n, "timeout_ms must be positive");
    cfg.timeout = std::chrono::milliseconds(ms);
  }
  if (const auto d = root["data"]) {
    r.only_keys(d, "data", {"images", "labels", "synthetic_seed", "test_samples",
                            "samples_per_domain"});
    read_into(r, d, "images", cfg.data.images);
    read_into(r, d, "labels", cfg.data.labels);
    if (const auto n = d["synthetic_seed"]) cfg.data.synthetic_seed = r.get<std::uint64_t>(n, "synthetic_seed");
    read_into(r, d, "test_samples", cfg.data.test_samples);
    if (const auto n = d["samples_per_domain"]) {
      cfg.data.samples_per_domain.clear();
      if (n.IsSequence()) {
        for (const auto& e : n) cfg.data.samples_per_domain.push_back(r.get<std::size_t>(e, "samples_per_domain"));
      } else {
        cfg.data.samples_per_domain.push_back(r.get<std::size_t>(n, "samples_per_domain"));
      }
      if (cfg.data.samples_per_domain.empty()) r.fail(n, "samples_per_domain is empty");
    }
  }
  if (const auto t = root["train"]) {
    r.only_keys(t, "train", {"epochs", "pretrain_epochs", "batch_size", "learning_rate", "keep",
                                 "seed", "reproducible"});
    read_into(r, t, "epochs", cfg.train.epochs);
    read_into(r, t, "pretrain_epochs", cfg.train.pretrain_epochs);
    read_into(r, t, "batch_size", cfg.train.batch_size);
    read_into(r, t, "learning_rate", cfg.train.learning_rate);
    read_into(r, t, "keep", cfg.train.keep);
    read_into(r, t, "seed", cfg.train.seed);
    read_into(r, t, "reproducible", cfg.train.reproducible);
    try {
      cfg.train.validate();
    } catch (const ConfigError& e) {
      r.fail(t, e.what());
    }
  }
  if (const auto t = root["tamper"]) {
    r.only_keys(t, "tamper", {"strategy", "targets", "round", "element", "delta"});
    TamperPlan plan;
    if (const auto n = t["strategy"]) {
      try {
        plan.strategy = parse_strategy(r.get<std::string>(n, "strategy"));
      } catch (const ConfigError& e) {
        r.fail(n, e.what());
      }
    }
    if (const auto n = t["targets"]) {
      if (!n.IsSequence()) r.fail(n, "targets must be a list of party indices");
      for (const auto& e : n) plan.targets.push_back(r.get<int>(e, "targets"));
    }
    read_into(r, t, "round", plan.trigger.round);
    read_into(r, t, "element", plan.trigger.element);
    if (const auto n = t["delta"]) {
      plan.delta = RingElement::from_signed(r.get<long long>(n, "delta"));
    }
    try {
      plan.validate(cfg.parties);
    } catch (const ConfigError& e) {
      r.fail(t, e.what());
    }
    cfg.tamper = plan;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    r.fail(root, e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

NetworkSpec RunConfig::network_spec() const {
  auto spec = NetworkSpec::by_name(network, train.keep);
  if (hooks) spec.set_hooks(*hooks);
  return spec;
}

DegreeMatrix RunConfig::degree_matrix() const {
  if (theta) return DegreeMatrix(*theta);
  return DegreeMatrix::uniform(parties, theta_t);
}

void RunConfig::validate() const {
  if (parties < 1) throw ConfigError("parties must be at least 1");
  if (mode != RunMode::kSolo && parties < 2) {
    throw ConfigError("collaborative modes need at least two parties; use mode: solo");
  }
  train.validate();
  FixedPointCodec(precision, kappa);
  if (mode != RunMode::kSolo) {
    const auto t = degree_matrix();
    if (t.size() != parties) {
      throw ConfigError("theta is " + std::to_string(t.size()) + "x" + std::to_string(t.size()) +
                        " but parties is " + std::to_string(parties));
    }
  }
  if (data.samples_per_domain.size() != 1 &&
      data.samples_per_domain.size() != static_cast<std::size_t>(parties)) {
    throw ConfigError("samples_per_domain has " + std::to_string(data.samples_per_domain.size()) +
                      " entries for " + std::to_string(parties) + " parties");
  }
  for (int i = 1; i <= parties; ++i) {
    if (data.samples_of(i) == 0) throw ConfigError("domain " + std::to_string(i) + " has no samples");
  }
  if (!data.synthetic_seed && (data.images.empty() || data.labels.empty())) {
    throw ConfigError("data needs images and labels paths, or synthetic_seed");
  }
  if (mode == RunMode::kTcp) {
    if (roster.size() != static_cast<std::size_t>(parties)) {
      throw ConfigError("tcp mode needs a roster entry per party");
    }
    if (preprocessing_dir.empty()) throw ConfigError("tcp mode needs preprocessing_dir");
  }
  if (cv_folds < 0 || cv_folds == 1) throw ConfigError("cv_folds must be 0 or at least 2");
  if (cv_folds > 0 && (mode == RunMode::kTcp || !preprocessing_dir.empty())) {
    throw ConfigError("cv_folds needs in-process or solo mode without preprocessing files");
  }
  if (tamper) {
    if (mode != RunMode::kInProcess) throw ConfigError("tamper plans run in in-process mode only");
    tamper->validate(parties);
  }
  if (chunk_locations == 0) throw ConfigError("chunk_locations must be positive");
}

DomainData load_domain_data(const RunConfig& cfg) {
  std::size_t total = cfg.data.test_samples;
  for (int i = 1; i <= cfg.parties; ++i) total += cfg.data.samples_of(i);
  Dataset all = cfg.data.synthetic_seed ? make_synthetic(total, *cfg.data.synthetic_seed)
                                        : load_idx(cfg.data.images, cfg.data.labels, total);
  if (all.size() < total) {
    throw ConfigError("dataset has " + std::to_string(all.size()) + " samples, configuration needs " +
                      std::to_string(total));
  }
  DomainData out;
  out.test = all.slice(0, cfg.data.test_samples);
  std::size_t at = cfg.data.test_samples;
  for (int i = 1; i <= cfg.parties; ++i) {
    out.domains.push_back(all.slice(at, at + cfg.data.samples_of(i)));
    at += cfg.data.samples_of(i);
  }
  return out;
}

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ConfigError("demand overflow: preprocessing count exceeds 64 bits");
  return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ConfigError("demand overflow: preprocessing count exceeds 64 bits");
  return r;
}

std::uint64_t with_margin(std::uint64_t x) { return checked_add(x, x / 10 + (x % 10 != 0)); }

}  // namespace

RunDemand run_demand(const RunConfig& cfg) {
  RunDemand d;
  if (cfg.mode == RunMode::kSolo || cfg.parties < 2) return d;
  const auto spec = cfg.network_spec();
  std::uint64_t epoch_samples = 0;
  for (int i = 1; i <= cfg.parties; ++i) {
    epoch_samples = std::max<std::uint64_t>(epoch_samples, cfg.data.samples_of(i));
  }
  const auto batch = static_cast<std::uint64_t>(cfg.train.batch_size);
  const auto n = static_cast<std::uint64_t>(cfg.parties);
  // Every forward pass, training or evaluation, runs each hook once per batch.
  auto add_batches = [&](std::uint64_t count, std::uint64_t b) {
    if (count == 0 || b == 0) return;
    for (const auto& h : spec.hook_names()) {
      const std::uint64_t locations = checked_mul(b, spec.hook_shape(h).per_sample());
      checked_add(checked_mul(n * n, locations), n);  // transfer_demand's largest term
      const auto t = transfer_demand(cfg.parties, locations, cfg.theta_mode);
      d.triples = checked_add(d.triples, checked_mul(count, t.triples));
      d.masks_per_owner = checked_add(d.masks_per_owner, checked_mul(count, t.masks_per_owner));
    }
  };
  auto add_pass = [&](std::uint64_t samples) {
    add_batches(samples / batch, batch);
    add_batches(1, samples % batch);
  };
  add_pass(epoch_samples);
  add_pass(cfg.data.test_samples);
  const auto epochs = static_cast<std::uint64_t>(cfg.train.epochs);
  d.triples = checked_mul(d.triples, epochs);
  d.masks_per_owner = checked_mul(d.masks_per_owner, epochs);
  d.triples_with_margin = with_margin(d.triples);
  d.masks_with_margin = with_margin(d.masks_per_owner);
  return d;
}

}  // namespace weave
