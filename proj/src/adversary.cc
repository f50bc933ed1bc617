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

#include "weave/adversary.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <set>

#include "weave/errors.h"
#include "weave/random.h"

namespace weave {

namespace {

struct StrategyName {
  TamperStrategy s;
  const char* name;
};
constexpr StrategyName kStrategies[] = {
    {TamperStrategy::kNone, "None"},
    {TamperStrategy::kAddDeltaToValueShare, "AddDeltaToValueShare"},
    {TamperStrategy::kCorruptMacShare, "CorruptMacShare"},
    {TamperStrategy::kSkewBeaverTriple, "SkewBeaverTriple"},
    {TamperStrategy::kInconsistentBroadcast, "InconsistentBroadcast"},
    {TamperStrategy::kHonestButCurious, "HonestButCurious"},
};

}  // namespace

const char* to_string(TamperStrategy s) {
  for (const auto& e : kStrategies) {
    if (e.s == s) return e.name;
  }
  return "?";
}

TamperStrategy parse_strategy(const std::string& name) {
  for (const auto& e : kStrategies) {
    if (name == e.name) return e.s;
  }
  throw ConfigError("unknown tamper strategy '" + name + "'");
}

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::kCompleted:
      return "Completed";
    case OutcomeKind::kAborted:
      return "Aborted";
    case OutcomeKind::kUndetectedDeviation:
      return "UndetectedDeviation";
  }
  return "?";
}

void TamperPlan::validate(int n) const {
  std::set<int> seen;
  for (int t : targets) {
    if (t < 1 || t > n) {
      throw ConfigError("tamper target " + std::to_string(t) + " is not a party of " +
                        std::to_string(n));
    }
    if (!seen.insert(t).second) throw ConfigError("tamper target " + std::to_string(t) + " repeated");
  }
  if (static_cast<int>(targets.size()) > n - 1) {
    throw ConfigError("at most n - 1 = " + std::to_string(n - 1) + " parties may be corrupted");
  }
  if (strategy != TamperStrategy::kNone && targets.empty()) {
    throw ConfigError(std::string(to_string(strategy)) + " needs at least one target");
  }
}

namespace {

class TamperingPreprocessing final : public Preprocessing {
 public:
  TamperingPreprocessing(std::unique_ptr<Preprocessing> inner, const TamperPlan& plan,
                         std::atomic<bool>& fired)
      : inner_(std::move(inner)), plan_(plan), fired_(fired) {}

  PartyId party() const override { return inner_->party(); }
  int parties() const override { return inner_->parties(); }
  MacKeyShare mac_key() const override { return inner_->mac_key(); }
  const Seed& shared_seed() const override { return inner_->shared_seed(); }
  std::uint64_t triples_taken() const override { return inner_->triples_taken(); }

  BeaverTriple take_triple() override {
    BeaverTriple t = inner_->take_triple();
    if (plan_.strategy == TamperStrategy::kSkewBeaverTriple && triples_++ == plan_.trigger.element) {
      t.c.value += plan_.delta;
      fired_ = true;
    }
    return t;
  }

  InputMask take_input_mask(PartyId owner) override {
    InputMask m = inner_->take_input_mask(owner);
    if (plan_.strategy == TamperStrategy::kCorruptMacShare && masks_++ == plan_.trigger.element) {
      m.share.mac += plan_.delta;
      fired_ = true;
    }
    return m;
  }

 private:
  std::unique_ptr<Preprocessing> inner_;
  const TamperPlan& plan_;
  std::atomic<bool>& fired_;
  std::uint64_t triples_ = 0;
  std::uint64_t masks_ = 0;
};

void add_to_word(Envelope& env, std::uint64_t element, RingElement delta) {
  const std::size_t words = env.payload.size() / kWordBytes;
  if (words == 0) return;
  const std::size_t k = static_cast<std::size_t>(std::min<std::uint64_t>(element, words - 1));
  auto at = std::span<std::uint8_t, kWordBytes>(env.payload.data() + k * kWordBytes, kWordBytes);
  encode_word(decode_word(at) + delta, at);
}

// Per-target state of the message-tampering strategies.
struct SendTamper {
  bool armed = true;
  std::uint32_t round = 0;
};

}  // namespace

AdversaryOutcome run_with_adversary(const TamperPlan& plan, const Experiment& experiment) {
  plan.validate(experiment.n);
  const std::set<int> corrupted(plan.targets.begin(), plan.targets.end());
  int victim = 0;  // lowest honest party
  for (int i = 1; i <= experiment.n && victim == 0; ++i) {
    if (!corrupted.count(i)) victim = i;
  }

  AdversaryOutcome out;
  std::atomic<bool> fired{false};
  std::mutex observed_mu;
  std::vector<SendTamper> state(static_cast<std::size_t>(experiment.n) + 1);

  LocalRunOptions opts = experiment.options;
  const auto base_configure = opts.configure_network;
  opts.configure_network = [&](PartyId me, Network& net) {
    if (base_configure) base_configure(me, net);
    if (!corrupted.count(me.index())) return;
    switch (plan.strategy) {
      case TamperStrategy::kAddDeltaToValueShare:
      case TamperStrategy::kInconsistentBroadcast: {
        const bool consistent = plan.strategy == TamperStrategy::kAddDeltaToValueShare;
        auto& st = state[me.index()];
        net.set_interceptor([&plan, &fired, &st, consistent, victim](Envelope& env, PartyId to) {
          if (env.kind != MessageKind::kShareAnnounce || env.round < plan.trigger.round) return;
          if (st.armed) {
            st.armed = false;
            st.round = env.round;
          }
          if (env.round != st.round) return;
          if (!consistent && to.index() != victim) return;
          add_to_word(env, plan.trigger.element, plan.delta);
          fired = true;
        });
        break;
      }
      case TamperStrategy::kHonestButCurious:
        net.set_observer([&out, &observed_mu, me](const Envelope& env) {
          std::lock_guard<std::mutex> lock(observed_mu);
          out.observed.push_back({me, env});
        });
        break;
      default:
        break;
    }
  };
  if (plan.strategy == TamperStrategy::kCorruptMacShare ||
      plan.strategy == TamperStrategy::kSkewBeaverTriple) {
    const auto base_wrap = opts.wrap_preprocessing;
    opts.wrap_preprocessing = [&](PartyId me, std::unique_ptr<Preprocessing> pre) {
      if (base_wrap) pre = base_wrap(me, std::move(pre));
      if (!corrupted.count(me.index())) return pre;
      return std::unique_ptr<Preprocessing>(
          std::make_unique<TamperingPreprocessing>(std::move(pre), plan, fired));
    };
  }

  out.run = run_local(experiment.n, opts, experiment.body);
  out.deviated = fired.load();

  bool aborted = false;
  bool other = false;
  for (const auto& e : out.run.errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const MacCheckFailed& ex) {
      if (!aborted || out.detected_by == 0 || ex.round() < out.abort_round) {
        out.abort_round = ex.round();
        out.detected_by = ex.detected_by();
        out.detail = ex.what();
      }
      aborted = true;
    } catch (const ProtocolAbort& ex) {
      if (!aborted) {
        out.abort_round = ex.round();
        out.detail = ex.what();
      }
      aborted = true;
    } catch (const TransportError&) {
      // A consequence of a peer leaving after its abort.
    } catch (...) {
      other = true;
    }
  }
  if (aborted) {
    out.kind = OutcomeKind::kAborted;
  } else if (other || !out.run.all_ok()) {
    out.run.rethrow();
  } else {
    out.kind = out.deviated ? OutcomeKind::kUndetectedDeviation : OutcomeKind::kCompleted;
  }
  return out;
}

Experiment probe_experiment(int n, std::uint64_t seed, std::size_t width) {
  Experiment ex;
  ex.n = n;
  ex.options.dealer_seed = derive_seed(seed_from_u64(seed), "dealer");
  ex.body = [seed, width](Engine& e) {
    ChaChaRng rng(derive_seed(seed_from_u64(seed), "inputs", e.self().index()));
    std::vector<RingElement> mine(width);
    for (auto& v : mine) v = rng.next_ring();
    const auto shares = e.input_all(mine, width);
    const auto products = e.multiply(shares[0], shares[1]);
    AuthShare sum[1];
    for (const auto& p : products) sum[0] = add_shares(sum[0], p);
    auto opened = e.partial_open(sum);
    e.mac_check(opened);
    require_checked(opened);
  };
  return ex;
}

DetectionStats detection_rate(const TamperPlan& plan, int n, std::uint64_t trials,
                              std::uint64_t seed, DeltaMode mode) {
  if (trials < 1) throw ConfigError("detection_rate needs at least one trial");
  ChaChaRng deltas(derive_seed(seed_from_u64(seed), "delta"));
  DetectionStats stats;
  TamperPlan p = plan;
  for (std::uint64_t t = 0; t < trials; ++t) {
    if (mode != DeltaMode::kFixed) {
      do {
        p.delta = deltas.next_ring();
        if (mode == DeltaMode::kUniformOdd) p.delta.value |= 1;
      } while (p.delta == RingElement(0));
    }
    const auto out = run_with_adversary(p, probe_experiment(n, seed * 1000003 + t));
    ++stats.trials;
    if (out.kind == OutcomeKind::kAborted) ++stats.aborted;
    if (out.kind == OutcomeKind::kUndetectedDeviation) ++stats.undetected;
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Privacy audit

double KsResult::critical(double alpha) const {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2));
  return c * std::sqrt(static_cast<double>(n1 + n2) / (static_cast<double>(n1) * n2));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw RangeError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  KsResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    r.d = std::max(r.d, std::abs(static_cast<double>(i) / r.n1 - static_cast<double>(j) / r.n2));
  }
  // Asymptotic Kolmogorov tail with the usual small-sample correction.
  const double ne = static_cast<double>(r.n1) * r.n2 / (r.n1 + r.n2);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * r.d;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1 : -1) * term;
    if (term < 1e-12) break;
  }
  r.p_value = std::clamp(2 * sum, 0.0, 1.0);
  if (lambda < 0.3) r.p_value = 1.0;  // the series does not converge usefully there
  return r;
}

bool PrivacyAudit::independent(double alpha) const {
  return announced.p_value > alpha && held_share.p_value > alpha;
}

namespace {

double to_unit(RingElement x) {
  const auto top = static_cast<std::uint64_t>(x.value >> (kRingBits - 53));
  return std::ldexp(static_cast<double>(top), -53);
}

}  // namespace

PrivacyAudit privacy_audit(int n, RingElement fixed_secret, std::size_t runs, std::uint64_t seed) {
  if (n < 2) throw ConfigError("privacy audit needs at least two parties");
  TamperPlan plan;
  plan.strategy = TamperStrategy::kHonestButCurious;
  for (int i = 2; i <= n; ++i) plan.targets.push_back(i);

  std::vector<double> announced[2], held[2];
  ChaChaRng secrets(derive_seed(seed_from_u64(seed), "secrets"));
  for (int sample = 0; sample < 2; ++sample) {
    for (std::size_t r = 0; r < runs; ++r) {
      const RingElement x = sample == 0 ? fixed_secret : secrets.next_ring();
      Experiment ex;
      ex.n = n;
      ex.options.dealer_seed = derive_seed(seed_from_u64(seed), "audit", 2 * r + sample);
      RingElement share_at_2;
      ex.body = [&](Engine& e) {
        const RingElement mine[1] = {x};
        const auto s = e.input(PartyId(1), mine, 1);
        if (e.self() == PartyId(2)) share_at_2 = s[0].value;
      };
      const auto out = run_with_adversary(plan, ex);
      for (const auto& o : out.observed) {
        if (o.observer == PartyId(2) && o.env.kind == MessageKind::kInputAnnounce) {
          announced[sample].push_back(to_unit(parse_words(o.env.payload).at(0)));
        }
      }
      held[sample].push_back(to_unit(share_at_2));
    }
  }
  PrivacyAudit audit;
  audit.announced = ks_two_sample(announced[0], announced[1]);
  audit.held_share = ks_two_sample(held[0], held[1]);
  return audit;
}

}  // namespace weave
