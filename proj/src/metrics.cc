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

#include "weave/metrics.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "weave/errors.h"

namespace weave {

using nlohmann::json;

std::string to_json_line(const MetricsRecord& r) {
  json j;
  j["epoch"] = r.epoch.epoch;
  j["domain"] = r.epoch.domain;
  if (r.fold) j["fold"] = *r.fold;
  j["train_loss"] = r.epoch.train_loss;
  j["test_accuracy"] = r.epoch.test_accuracy;
  if (r.has_wall_time) j["wall_time"] = r.epoch.wall_time;
  return j.dump();
}

void write_metrics(std::ostream& os, std::vector<MetricsRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.fold.value_or(0), a.epoch.epoch, a.epoch.domain) <
           std::make_tuple(b.fold.value_or(0), b.epoch.epoch, b.epoch.domain);
  });
  for (const auto& r : records) os << to_json_line(r) << '\n';
  os.flush();
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open metrics file");
  std::vector<MetricsRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + "not a JSON object (" + e.what() + ")");
    }
    if (!j.is_object()) throw FormatError(where + "not a JSON object");
    MetricsRecord r;
    try {
      r.epoch.epoch = j.at("epoch").get<int>();
      r.epoch.domain = j.at("domain").get<int>();
      r.epoch.train_loss = j.at("train_loss").get<double>();
      r.epoch.test_accuracy = j.at("test_accuracy").get<double>();
      r.has_wall_time = j.contains("wall_time");
      if (r.has_wall_time) r.epoch.wall_time = j["wall_time"].get<double>();
      if (j.contains("fold")) r.fold = j["fold"].get<int>();
    } catch (const json::exception& e) {
      throw FormatError(where + e.what());
    }
    out.push_back(r);
  }
  if (out.empty()) throw FormatError(path + ": no metrics records");
  return out;
}

ReportRow summarize(const std::string& run, const std::vector<MetricsRecord>& records) {
  ReportRow row;
  row.run = run;
  std::set<int> domains, folds;
  for (const auto& r : records) {
    row.epochs = std::max(row.epochs, r.epoch.epoch);
    domains.insert(r.epoch.domain);
    if (r.fold) folds.insert(*r.fold);
    if (r.has_wall_time) {
      row.wall_time += r.epoch.wall_time;
      row.has_wall_time = true;
    }
  }
  row.domains = static_cast<int>(domains.size());
  row.folds = static_cast<int>(folds.size());
  int last = 0;
  for (const auto& r : records) {
    if (r.epoch.epoch != row.epochs) continue;
    row.final_accuracy += r.epoch.test_accuracy;
    row.final_loss += r.epoch.train_loss;
    ++last;
  }
  if (last) {
    row.final_accuracy /= last;
    row.final_loss /= last;
  }
  return row;
}

std::string render_table(const std::vector<ReportRow>& rows) {
  std::size_t width = 3;
  for (const auto& r : rows) width = std::max(width, r.run.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "run" << "  domains  epochs  folds"
     << "  accuracy  train_loss  time_s\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.run << std::right << "  "
       << std::setw(7) << r.domains << "  " << std::setw(6) << r.epochs << "  " << std::setw(5)
       << r.folds << "  " << std::setw(7) << std::fixed << std::setprecision(2)
       << 100 * r.final_accuracy << "%  " << std::setw(10) << std::setprecision(4) << r.final_loss
       << "  ";
    if (r.has_wall_time) {
      os << std::setw(6) << std::setprecision(1) << r.wall_time;
    } else {
      os << std::setw(6) << "-";
    }
    os << '\n';
  }
  return os.str();
}

std::string error_record(const std::string& kind, const std::string& message, int party,
                         std::optional<std::uint32_t> round) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  if (party) j["party"] = party;
  if (round) j["round"] = *round;
  return j.dump();
}

}  // namespace weave
