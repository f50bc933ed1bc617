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

#ifndef WEAVE_RUNNER_H_
#define WEAVE_RUNNER_H_

// Executes a RunConfig: solo baselines, in-process collaborative runs (with
// an optional tamper plan), or this process's party of a TCP run.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "weave/config.h"
#include "weave/metrics.h"
#include "weave/random.h"

namespace weave {

enum class RunStatus { kCompleted, kAborted, kUndetectedDeviation };
const char* to_string(RunStatus s);

struct RunSinks {
  std::ostream* metrics = nullptr;
  // Models are written here as domain-<i>.wmdl, and only when the whole run
  // completed. Empty: no model files.
  std::string model_dir;
};

struct RunReport {
  RunStatus status = RunStatus::kCompleted;
  std::vector<MetricsRecord> records;
  std::vector<std::string> model_files;
  std::vector<std::vector<std::uint8_t>> transcripts;  // in-process runs, per party
  std::uint32_t abort_round = 0;
  int detected_by = 0;
  std::string detail;
};

// Protocol aborts are reported through the status; configuration, data and
// transport failures throw.
RunReport execute_run(const RunConfig& cfg, const RunSinks& sinks);

std::filesystem::path preprocessing_path(const std::filesystem::path& dir, int party);

// Deals material for run_demand(cfg) (with margin) and writes one file per
// party. Throws Error when the directory is not writable.
RunDemand deal_files(const RunConfig& cfg, const std::filesystem::path& dir, RandomSource& rng);

}  // namespace weave

#endif  // WEAVE_RUNNER_H_
