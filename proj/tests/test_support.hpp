// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#ifndef BYZLAB_TESTS_TEST_SUPPORT_HPP_
#define BYZLAB_TESTS_TEST_SUPPORT_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "byzlab/byzlab.hpp"

namespace byzlab::testing {

inline Value val(const std::string& hex) { return Value(from_hex(hex)); }

inline RunConfig cfg_of(Protocol proto, int n, int f, const std::string& strategy,
                        std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.protocol = proto;
  cfg.n = n;
  cfg.t = (n - 1) / 2;
  cfg.f = f;
  cfg.strategy = strategy;
  cfg.seed = seed;
  cfg.delta = 10;
  return cfg;
}

inline void uniform_inputs(RunConfig& cfg, const Value& v) {
  for (SignerId id = 1; id <= cfg.n; ++id) cfg.inputs[id] = v;
}

inline void bit_inputs(RunConfig& cfg, const std::string& bits) {
  for (SignerId id = 1; id <= cfg.n; ++id) {
    cfg.inputs[id] = Value::binary(bits[static_cast<std::size_t>(id - 1)] == '1');
  }
}

// Run with an explicit family/strategy pair (for test-only scenarios the
// CLI surface does not build).
inline RunResult run_custom(const RunConfig& cfg, ProtocolFamily& family,
                            StrategyIface& strategy) {
  Simulation sim(cfg, family, strategy);
  RunResult rr;
  rr.trace = sim.run();
  rr.checks = evaluate_trace(rr.trace);
  return rr;
}

inline int count_events(const RunTrace& trace, EventKind kind) {
  int total = 0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.kind == kind) ++total;
  }
  return total;
}

template <typename M>
int count_sends(const RunTrace& trace, bool correct_only = false) {
  int total = 0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.kind != EventKind::kSend || !ev.msg) continue;
    if (correct_only && !trace.is_correct(ev.from)) continue;
    if (std::holds_alternative<M>(*ev.msg)) ++total;
  }
  return total;
}

// Stays silent through the phases (forcing the help round and a fallback
// certificate from the correct help requests alone when n-f >= t+1), then
// floods the fallback execution with chains for its own slot carrying the
// globally minimal plain value. The plurality tie then lands on that value,
// the restrictive predicate rejects it, and every correct process must
// decide the no-value default.
class JunkChainStrategy : public StrategyIface {
 public:
  std::string name() const override { return "junk-chain"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    std::set<SignerId> out;
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void on_round(AdvCtx& ctx, int round) override {
    // Inject once, right after the help round; chains arrive before the
    // correct processes' stretched round 1 closes.
    if (round != ctx.sched().help_round3) return;
    for (SignerId id : ctx.corrupted()) {
      ChainMsg chain;
      chain.slot = id;
      chain.round = 1;
      chain.value = BaValue(Value());  // the domain minimum
      chain.sigs.push_back(*ctx.crypto().try_adversary_sign(id, digest_chain(id, chain.value)));
      for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
        if (!ctx.corrupted().count(to)) ctx.send(id, to, chain, ctx.cfg().delta);
      }
    }
  }
};

// A Byzantine slot owner that signs two different values for its own slot
// and deals the chains to different halves; extraction agreement must
// resolve the slot identically (to nothing) everywhere.
class ChainEquivocatorStrategy : public StrategyIface {
 public:
  std::string name() const override { return "chain-equivocator"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    std::set<SignerId> out;
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void on_round(AdvCtx& ctx, int round) override {
    if (round != 0) return;
    int i = 0;
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (ctx.corrupted().count(to)) continue;
      ChainMsg chain;
      chain.slot = 1;
      chain.round = 1;
      chain.value = BaValue(i++ % 2 == 0 ? val("11") : val("22"));
      chain.sigs.push_back(
          *ctx.crypto().try_adversary_sign(1, digest_chain(chain.slot, chain.value)));
      ctx.send(1, to, chain, ctx.cfg().delta);
    }
  }

 private:
  static Value val(const std::string& hex) { return Value(from_hex(hex)); }
};

// Sends the same signed vote twice to the same recipient; the second copy
// must be dropped as a duplicate.
class DuplicateSenderStrategy : public StrategyIface {
 public:
  std::string name() const override { return "duplicate-sender"; }

  std::set<SignerId> corrupt_choice(const RunConfig&) const override { return {1}; }

  void on_round(AdvCtx& ctx, int round) override {
    if (round != 0) return;
    VoteMsg m;
    m.phase = 1;
    m.value = BaValue(Value(from_hex("aa")));
    m.sig = *ctx.crypto().try_adversary_sign(1, digest_vote(m.value, 1));
    ctx.send(1, 2, m, 1);
    ctx.send(1, 2, m, 2);
  }
};

}  // namespace byzlab::testing

#endif  // BYZLAB_TESTS_TEST_SUPPORT_HPP_
