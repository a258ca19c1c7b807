// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Pluggable strong agreement used once the quorum path gives up. The
// reference implementation is an authenticated broadcast per slot over t+1
// stretched rounds with grow-by-one signature chains, then a plurality
// decision; it is correct for n = 2t+1 but deliberately not word-optimal.
// The oracle implementation is a simulator-level cheat that reveals every
// participant's input atomically and applies the same decision rule, used
// to isolate caller bugs from fallback bugs.

#ifndef BYZLAB_FALLBACK_HPP_
#define BYZLAB_FALLBACK_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/net.hpp"

namespace byzlab {

// Number of stretched relay rounds; results materialize rounds * 2delta
// after a process's local start. Known a priori so the simulator can bound
// its horizon.
inline int fallback_rounds(int t) { return t + 1; }

// Plurality over resolved slots. Unresolved slots count as no-value; ties
// go to the smaller value in canonical order; with nothing resolved the
// domain minimum is returned (which restrictive predicates will reject,
// exercising the no-value agreement outcome honestly).
inline BaValue fallback_decide(const std::map<SignerId, std::optional<BaValue>>& slots,
                               const BaValue& domain_min) {
  std::map<std::string, std::pair<int, BaValue>> tally;
  for (const auto& [slot, v] : slots) {
    if (!v) continue;
    auto [it, fresh] = tally.emplace(ba_encoding(*v), std::make_pair(0, *v));
    ++it->second.first;
  }
  std::optional<BaValue> best;
  int best_count = 0;
  for (const auto& [enc, entry] : tally) {
    const auto& [count, value] = entry;
    if (count > best_count || (count == best_count && best && ba_less(value, *best))) {
      best = value;
      best_count = count;
    }
  }
  return best ? *best : domain_min;
}

// Shared blackboard for the oracle cheat: one per run, keyed off the
// simulation's shared-state slot.
struct OracleState {
  std::map<SignerId, BaValue> inputs;
  std::optional<BaValue> decision;
};

// One process's fallback execution. The owner drives it: start() at the
// process's fallback_start, on_chain() for chain deliveries (any time),
// on_timer() for the round timers it schedules. result() is set once the
// final round resolves.
class FallbackMachine {
 public:
  using DomainCheck = bool (*)(const BaValue&);

  explicit FallbackMachine(BaValue domain_min, DomainCheck domain_ok = nullptr)
      : domain_min_(std::move(domain_min)), domain_ok_(domain_ok) {}

  bool running() const { return started_ && !result_; }
  bool started() const { return started_; }
  const std::optional<BaValue>& result() const { return result_; }
  const std::optional<BaValue>& input() const { return input_; }

  void start(ProcCtx& ctx, FallbackKind kind, BaValue input) {
    started_ = true;
    kind_ = kind;
    input_ = input;
    start_at_ = ctx.now();
    rounds_ = fallback_rounds(ctx.cfg().t);
    TraceEvent ev;
    ev.kind = EventKind::kFallbackInput;
    ev.note = to_hex(ba_encoding(input));
    ctx.event(std::move(ev));
    const Ticks round_len = 2 * ctx.cfg().delta;
    if (kind_ == FallbackKind::kOracle) {
      auto& shared = ctx.shared_state();
      if (!shared.has_value()) shared = OracleState{};
      auto& oracle = std::any_cast<OracleState&>(shared);
      oracle.inputs.emplace(ctx.self(), input);
      maybe_resolve_oracle(ctx, oracle);
      ctx.set_timer(start_at_ + rounds_ * round_len, kTimerOracleResult, 0);
      return;
    }
    // Relay round 1: broadcast the own-slot chain.
    ChainMsg chain;
    chain.slot = ctx.self();
    chain.round = 1;
    chain.value = input;
    chain.sigs.push_back(ctx.sign(digest_chain(chain.slot, chain.value)));
    extracted_[chain.slot].push_back(chain.value);
    ctx.broadcast(chain);
    for (int r = 1; r <= rounds_; ++r) {
      ctx.set_timer(start_at_ + r * round_len, kTimerFallbackRound, r);
    }
  }

  void on_chain(ProcCtx& ctx, const Envelope& env) {
    (void)ctx;
    pending_.push_back(env);
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) {
    if (tag == kTimerOracleResult) {
      auto& shared = ctx.shared_state();
      if (shared.has_value()) {
        auto& oracle = std::any_cast<OracleState&>(shared);
        maybe_resolve_oracle(ctx, oracle);
        if (oracle.decision) {
          result_ = oracle.decision;
        } else {
          ctx.note(EventKind::kNote, "oracle fallback unresolved: not all correct started");
        }
      }
      return;
    }
    if (tag != kTimerFallbackRound) return;
    const int r = static_cast<int>(arg);
    const Ticks round_start = start_at_ + (r - 1) * 2 * ctx.cfg().delta;
    // End of relay round r: accept round-r chains delivered inside the
    // stretched window, relay fresh extractions in round r+1.
    std::vector<Envelope> keep;
    std::vector<ChainMsg> fresh;
    for (const Envelope& env : pending_) {
      const auto& chain = std::get<ChainMsg>(env.msg);
      if (chain.round != r) {
        if (chain.round > r) keep.push_back(env);
        continue;  // stale rounds are dropped
      }
      if (!deliver_window_check(round_start, env.deliver_at, ctx.cfg().delta)) {
        TraceEvent ev;
        ev.kind = EventKind::kDrop;
        ev.msg = env.msg;
        ev.from = env.from;
        ev.note = "outside stretched-round window";
        ctx.event(std::move(ev));
        continue;
      }
      if (!accept_chain(ctx, chain)) continue;
      TraceEvent ev;
      ev.kind = EventKind::kWindowAccept;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.aux_time = round_start;
      ev.aux_time2 = env.deliver_at;
      ctx.event(std::move(ev));
      auto& known = extracted_[chain.slot];
      bool seen = false;
      for (const BaValue& v : known) {
        if (ba_equal(v, chain.value)) seen = true;
      }
      if (seen) continue;
      // Two distinct values already prove slot equivocation; further ones
      // cannot change the resolution.
      if (known.size() >= 2) continue;
      known.push_back(chain.value);
      bool own_sig = false;
      for (const Sig& s : chain.sigs) {
        if (s.signer == ctx.self()) own_sig = true;
      }
      if (r < rounds_ && !own_sig) {
        ChainMsg relay = chain;
        relay.round = r + 1;
        relay.sigs.push_back(ctx.sign(digest_chain(chain.slot, chain.value)));
        fresh.push_back(std::move(relay));
      }
    }
    pending_ = std::move(keep);
    for (ChainMsg& relay : fresh) ctx.broadcast(relay);
    if (r == rounds_) resolve(ctx);
  }

 private:
  bool accept_chain(ProcCtx& ctx, const ChainMsg& chain) const {
    if (chain.slot < 1 || chain.slot > ctx.cfg().n) return false;
    if (domain_ok_ && !domain_ok_(chain.value)) return false;
    if (static_cast<int>(chain.sigs.size()) < chain.round) return false;
    if (chain.sigs.empty() || chain.sigs.front().signer != chain.slot) return false;
    const Digest want = digest_chain(chain.slot, chain.value);
    std::set<SignerId> signers;
    for (const Sig& s : chain.sigs) {
      if (s.digest != want) return false;
      if (!ctx.crypto().verify_sig(s)) return false;
      if (!signers.insert(s.signer).second) return false;
    }
    return true;
  }

  void maybe_resolve_oracle(ProcCtx& ctx, OracleState& oracle) const {
    if (oracle.decision) return;
    int correct = 0;
    for (SignerId id = 1; id <= ctx.cfg().n; ++id) {
      if (!ctx.crypto().is_corrupted(id)) ++correct;
    }
    if (static_cast<int>(oracle.inputs.size()) < correct) return;
    std::map<SignerId, std::optional<BaValue>> slots;
    for (SignerId id = 1; id <= ctx.cfg().n; ++id) {
      auto it = oracle.inputs.find(id);
      slots[id] = it == oracle.inputs.end() ? std::nullopt : std::optional<BaValue>(it->second);
    }
    oracle.decision = fallback_decide(slots, domain_min_);
  }

  void resolve(ProcCtx& ctx) {
    std::map<SignerId, std::optional<BaValue>> slots;
    for (SignerId id = 1; id <= ctx.cfg().n; ++id) {
      auto it = extracted_.find(id);
      if (it != extracted_.end() && it->second.size() == 1) {
        slots[id] = it->second.front();
      } else {
        slots[id] = std::nullopt;
      }
    }
    result_ = fallback_decide(slots, domain_min_);
    TraceEvent ev;
    ev.kind = EventKind::kFallbackResult;
    ev.note = to_hex(ba_encoding(*result_));
    ctx.event(std::move(ev));
  }

  BaValue domain_min_;
  DomainCheck domain_ok_ = nullptr;
  bool started_ = false;
  FallbackKind kind_ = FallbackKind::kReference;
  std::optional<BaValue> input_;
  Ticks start_at_ = 0;
  int rounds_ = 0;
  std::vector<Envelope> pending_;
  std::map<SignerId, std::vector<BaValue>> extracted_;
  std::optional<BaValue> result_;
};

// Test family that runs the fallback directly, with per-process start
// offsets to model the <= delta activation skew of the callers.
class FallbackOnlyProcess : public ProcessBase {
 public:
  FallbackOnlyProcess(BaValue input, Ticks start_offset, BaValue domain_min)
      : input_(std::move(input)), start_offset_(start_offset), machine_(std::move(domain_min)) {}

  void on_round(ProcCtx& ctx, int round) override {
    if (round != 0) return;
    ctx.set_timer(start_offset_, kTimerFallbackStart, 0);
  }

  void on_deliver(ProcCtx& ctx, const Envelope& env) override {
    if (std::holds_alternative<ChainMsg>(env.msg)) machine_.on_chain(ctx, env);
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) override {
    if (tag == kTimerFallbackStart) {
      TraceEvent ev;
      ev.kind = EventKind::kFallbackStart;
      ctx.event(std::move(ev));
      machine_.start(ctx, ctx.cfg().fallback, input_);
      return;
    }
    machine_.on_timer(ctx, tag, arg);
  }

  ProcessReport report() const override {
    ProcessReport rep;
    rep.agreement_input = input_;
    if (machine_.result()) {
      rep.decision = Decision::of(*machine_.result());
      rep.decision_transitions = 1;
    }
    return rep;
  }

 private:
  BaValue input_;
  Ticks start_offset_;
  FallbackMachine machine_;
};

class FallbackOnlyFamily : public ProtocolFamily {
 public:
  FallbackOnlyFamily(RunConfig cfg, std::map<SignerId, BaValue> inputs,
                     std::map<SignerId, Ticks> start_offsets, BaValue domain_min)
      : cfg_(std::move(cfg)),
        inputs_(std::move(inputs)),
        start_offsets_(std::move(start_offsets)),
        domain_min_(std::move(domain_min)) {}

  Schedule schedule() const override { return Schedule::for_config(cfg_); }
  ValidityPredicate predicate() const override { return make_always_true(); }

  std::unique_ptr<ProcessBase> make_process(SignerId id, CryptoContext&) const override {
    Ticks offset = 0;
    if (auto it = start_offsets_.find(id); it != start_offsets_.end()) offset = it->second;
    return std::make_unique<FallbackOnlyProcess>(inputs_.at(id), offset, domain_min_);
  }

 private:
  RunConfig cfg_;
  std::map<SignerId, BaValue> inputs_;
  std::map<SignerId, Ticks> start_offsets_;
  BaValue domain_min_;
};

}  // namespace byzlab

#endif  // BYZLAB_FALLBACK_HPP_
