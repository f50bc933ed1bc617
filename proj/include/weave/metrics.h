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

#ifndef WEAVE_METRICS_H_
#define WEAVE_METRICS_H_

// Line-delimited JSON metrics: one object per epoch and domain.
//
//   {"epoch":1,"domain":2,"train_loss":1.93,"test_accuracy":0.41,"wall_time":3.2}
//
// wall_time is omitted in reproducible runs; "fold" is present only under
// cross validation.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "weave/trainer.h"

namespace weave {

struct MetricsRecord {
  EpochRecord epoch;
  bool has_wall_time = true;
  std::optional<int> fold;
};

std::string to_json_line(const MetricsRecord& r);
// Sorted by (fold, epoch, domain) so in-process runs write identical files.
void write_metrics(std::ostream& os, std::vector<MetricsRecord> records);

// Throws FormatError "path:line: ..." on malformed lines and on files with
// no records.
std::vector<MetricsRecord> read_metrics(const std::string& path);

struct ReportRow {
  std::string run;
  int domains = 0;
  int epochs = 0;
  int folds = 0;
  double final_accuracy = 0;  // mean over domains (and folds) at the last epoch
  double final_loss = 0;
  double wall_time = 0;  // summed over records; 0 when absent
  bool has_wall_time = false;
};

ReportRow summarize(const std::string& run, const std::vector<MetricsRecord>& records);
std::string render_table(const std::vector<ReportRow>& rows);

// Machine-parsable failure record for stderr.
std::string error_record(const std::string& kind, const std::string& message, int party = 0,
                         std::optional<std::uint32_t> round = std::nullopt);

}  // namespace weave

#endif  // WEAVE_METRICS_H_
