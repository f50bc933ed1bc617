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

#ifndef WEAVE_ADVERSARY_H_
#define WEAVE_ADVERSARY_H_

// Scripted deviations by corrupted parties. Message tampering is injected on
// the corrupted party's send path (the honest protocol code is unchanged);
// tampering with preprocessed material goes through a decorator around that
// party's preprocessing.

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "weave/protocol.h"
#include "weave/simulation.h"

namespace weave {

enum class TamperStrategy {
  kNone,
  // Adds delta to one word of an opening, identically for every receiver.
  kAddDeltaToValueShare,
  // Adds delta to the MAC share of one input mask.
  kCorruptMacShare,
  // Adds delta to the value share of c in one Beaver triple.
  kSkewBeaverTriple,
  // Adds delta to one word of an opening for one honest receiver only.
  kInconsistentBroadcast,
  // Follows the protocol and records everything the corrupted parties see.
  kHonestButCurious,
};

const char* to_string(TamperStrategy s);
// Accepts the enumerator names without the k prefix, e.g. "AddDeltaToValueShare".
TamperStrategy parse_strategy(const std::string& name);

struct TamperTrigger {
  // Message tampering hits the first eligible message at or after this round.
  std::uint32_t round = 0;
  // Word index within that message (clamped to its last word), or for the
  // preprocessing strategies the index of the item the target takes.
  std::uint64_t element = 0;
};

struct TamperPlan {
  std::vector<int> targets;  // corrupted party indices
  TamperStrategy strategy = TamperStrategy::kNone;
  TamperTrigger trigger;
  RingElement delta{1};

  // Throws ConfigError unless the targets are distinct, in [1, n], and at
  // most n - 1 of them.
  void validate(int n) const;
  bool deviates() const {
    return strategy != TamperStrategy::kNone && strategy != TamperStrategy::kHonestButCurious;
  }
};

enum class OutcomeKind { kCompleted, kAborted, kUndetectedDeviation };
const char* to_string(OutcomeKind k);

struct Observation {
  PartyId observer;
  Envelope env;
};

struct AdversaryOutcome {
  OutcomeKind kind = OutcomeKind::kCompleted;
  std::uint32_t abort_round = 0;
  int detected_by = 0;   // party that raised the failed check, 0 if unknown
  bool deviated = false;  // the scripted deviation actually fired
  std::string detail;
  std::vector<Observation> observed;  // HonestButCurious only
  LocalRunResult run;
};

struct Experiment {
  int n = 2;
  LocalRunOptions options;
  std::function<void(Engine&)> body;
};

// Installs the plan on top of experiment.options and runs it. Errors that
// are not protocol aborts propagate.
AdversaryOutcome run_with_adversary(const TamperPlan& plan, const Experiment& experiment);

// A short probe: every party inputs `width` values, then the elementwise
// products of party 1's and party 2's vectors are summed, opened and checked.
// Returns the experiment; values come from `seed`.
Experiment probe_experiment(int n, std::uint64_t seed, std::size_t width = 4);

enum class DeltaMode {
  kFixed,       // plan.delta every trial
  kUniform,     // fresh uniform nonzero delta per trial
  kUniformOdd,  // fresh uniform odd delta per trial
};

struct DetectionStats {
  std::uint64_t trials = 0;
  std::uint64_t aborted = 0;
  std::uint64_t undetected = 0;  // deviation fired, run completed
  double rate() const { return trials ? static_cast<double>(aborted) / trials : 0.0; }
};

// Runs the probe experiment `trials` times with fresh dealer seeds (so fresh
// MAC keys and check coefficients) and counts aborts.
DetectionStats detection_rate(const TamperPlan& plan, int n, std::uint64_t trials,
                              std::uint64_t seed, DeltaMode mode = DeltaMode::kFixed);

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
struct KsResult {
  double d = 0;
  double p_value = 1;
  double critical(double alpha) const;  // D above which H0 is rejected
  std::size_t n1 = 0, n2 = 0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// What n - 1 honest-but-curious parties see of party 1's secret input over
// `runs` independent runs: the masked announcement and their own value
// shares, each mapped to [0, 1). One sample uses the fixed secret, the other
// a fresh uniform secret per run.
struct PrivacyAudit {
  KsResult announced;
  KsResult held_share;
  bool independent(double alpha) const;
};
PrivacyAudit privacy_audit(int n, RingElement fixed_secret, std::size_t runs, std::uint64_t seed);

}  // namespace weave

#endif  // WEAVE_ADVERSARY_H_
