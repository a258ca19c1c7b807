// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Binary strong agreement with a linear failure-free fast path: one leader
// collects signed inputs, batches a t+1 propose certificate (pigeonhole
// guarantees one exists when everyone participates), then an n-of-n decide
// certificate. Any process left undecided after round 5 triggers the
// stretched-round fallback; decided processes only echo, carrying their
// decide certificate into the 2*delta safety window.

#ifndef BYZLAB_STRONG_FF_HPP_
#define BYZLAB_STRONG_FF_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/fallback.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/net.hpp"
#include "byzlab/trace.hpp"

namespace byzlab {

inline constexpr SignerId kFfLeader = 1;

// Leader's propose choice from distinct-signer counts per binary value.
// Both values can reach t+1 only through duplicate Byzantine inputs; the
// larger count wins and ties go to 0, so the choice is deterministic.
// Safety is unaffected: deciding still needs the n-of-n certificate.
inline std::optional<Value> ff_propose_choice(const std::map<int, std::set<SignerId>>& by_bit,
                                              int t) {
  int count0 = 0, count1 = 0;
  if (auto it = by_bit.find(0); it != by_bit.end()) count0 = static_cast<int>(it->second.size());
  if (auto it = by_bit.find(1); it != by_bit.end()) count1 = static_cast<int>(it->second.size());
  const bool q0 = count0 >= t + 1, q1 = count1 >= t + 1;
  if (!q0 && !q1) return std::nullopt;
  if (q0 && q1) return Value::binary(count1 > count0 ? 1 : 0);
  return Value::binary(q1 ? 1 : 0);
}

inline bool ff_domain_check(const BaValue& v) {
  const auto* plain = std::get_if<Value>(&v);
  return plain && plain->is_binary();
}

class StrongFfProcess : public ProcessBase {
 public:
  StrongFfProcess(SignerId self, Value input)
      : self_(self), input_(std::move(input)),
        machine_(BaValue(Value::binary(0)), &ff_domain_check) {}

  void on_round(ProcCtx& ctx, int round) override {
    switch (round) {
      case 0: {
        FfInputMsg m;
        m.value = input_;
        m.sig = ctx.sign(digest_ff_input(m.value));
        ctx.send(kFfLeader, m);
        break;
      }
      case 1:
        leader_propose_step(ctx);
        break;
      case 2:
        answer_propose(ctx);
        break;
      case 3:
        leader_decide_step(ctx);
        break;
      case 4:
        round5(ctx);
        break;
    }
  }

  void on_deliver(ProcCtx& ctx, const Envelope& env) override {
    if (!verify_outer(ctx.crypto(), env.from, env.msg)) {
      TraceEvent ev;
      ev.kind = EventKind::kDrop;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.note = "bad outer signature";
      ctx.event(std::move(ev));
      return;
    }
    if (std::holds_alternative<ChainMsg>(env.msg)) {
      machine_.on_chain(ctx, env);
      return;
    }
    if (std::holds_alternative<FfFallbackMsg>(env.msg)) {
      handle_fallback(ctx, env);
      return;
    }
    inbox_.push_back(env);
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) override {
    if (tag == kTimerFallbackStart) {
      if (machine_.started()) return;
      TraceEvent ev;
      ev.kind = EventKind::kFallbackStart;
      ctx.event(std::move(ev));
      machine_.start(ctx, ctx.cfg().fallback, fallback_input());
      return;
    }
    if (tag == kTimerFallbackRound || tag == kTimerOracleResult) {
      machine_.on_timer(ctx, tag, arg);
      if (machine_.result() && !fallback_applied_) {
        fallback_applied_ = true;
        if (decision_.is_undecided()) {
          set_decision(ctx, Decision::of(*machine_.result()), "fallback result");
        }
      }
    }
  }

  ProcessReport report() const override {
    ProcessReport rep;
    rep.decision = decision_;
    rep.decision_transitions = transitions_;
    rep.agreement_input = BaValue(input_);
    return rep;
  }

 private:
  void set_decision(ProcCtx& ctx, Decision d, const std::string& why) {
    decision_ = std::move(d);
    ++transitions_;
    TraceEvent ev;
    ev.kind = EventKind::kDecision;
    ev.note = decision_.render() + " (" + why + ")";
    ctx.event(std::move(ev));
  }

  void leader_propose_step(ProcCtx& ctx) {
    if (self_ != kFfLeader) return;
    std::map<int, std::set<SignerId>> by_bit;
    std::map<int, std::vector<Sig>> sigs;
    for (const Envelope& env : inbox_) {
      const auto* in = std::get_if<FfInputMsg>(&env.msg);
      if (!in || !in->value.is_binary()) continue;
      if (by_bit[in->value.bit()].insert(in->sig.signer).second) {
        sigs[in->value.bit()].push_back(in->sig);
      }
    }
    auto choice = ff_propose_choice(by_bit, ctx.cfg().t);
    if (!choice) return;  // fallback will take over
    ThresholdCert cert =
        ctx.crypto().aggregate(sigs[choice->bit()], ctx.cfg().t + 1, ctx.cfg().n);
    TraceEvent ev;
    ev.kind = EventKind::kCertFormed;
    ev.note = "propose cert, value " + std::to_string(choice->bit());
    ctx.event(std::move(ev));
    FfProposeMsg m;
    m.value = *choice;
    m.cert = cert;
    m.sig = ctx.sign(digest_ff_propose_msg(m.value, m.cert));
    ctx.broadcast(m);
  }

  // Correct processes sign exactly one decide vote.
  void answer_propose(ProcCtx& ctx) {
    if (signed_decide_) return;
    for (const Envelope& env : inbox_) {
      const auto* p = std::get_if<FfProposeMsg>(&env.msg);
      if (!p || env.from != kFfLeader) continue;
      if (!p->value.is_binary()) continue;
      if (!verify_ff_propose_cert(ctx.crypto(), p->cert, p->value, ctx.cfg().t)) continue;
      signed_decide_ = true;
      FfDecideSigMsg d;
      d.value = p->value;
      d.sig = ctx.sign(digest_ff_decide(d.value));
      ctx.send(kFfLeader, d);
      return;
    }
  }

  void leader_decide_step(ProcCtx& ctx) {
    if (self_ != kFfLeader) return;
    const int n = ctx.cfg().n;
    std::map<int, std::set<SignerId>> by_bit;
    std::map<int, std::vector<Sig>> sigs;
    for (const Envelope& env : inbox_) {
      const auto* d = std::get_if<FfDecideSigMsg>(&env.msg);
      if (!d || !d->value.is_binary()) continue;
      if (by_bit[d->value.bit()].insert(d->sig.signer).second) {
        sigs[d->value.bit()].push_back(d->sig);
      }
    }
    for (int bit = 0; bit <= 1; ++bit) {
      if (static_cast<int>(by_bit[bit].size()) < n) continue;
      ThresholdCert cert = ctx.crypto().aggregate(sigs[bit], n, n);
      TraceEvent ev;
      ev.kind = EventKind::kCertFormed;
      ev.note = "decide cert, value " + std::to_string(bit);
      ctx.event(std::move(ev));
      FfDecideCertMsg m;
      m.value = Value::binary(bit);
      m.cert = cert;
      m.sig = ctx.sign(digest_ff_decide_cert_msg(m.value, m.cert));
      ctx.broadcast(m);
      return;
    }
  }

  // Round 5: decide on a verified n-of-n certificate; otherwise announce
  // the fallback. Processes that decided do not initiate, only echo.
  void round5(ProcCtx& ctx) {
    for (const Envelope& env : inbox_) {
      const auto* c = std::get_if<FfDecideCertMsg>(&env.msg);
      if (!c || env.from != kFfLeader) continue;
      if (!c->value.is_binary()) continue;
      if (!verify_ff_decide_cert(ctx.crypto(), c->cert, c->value, ctx.cfg().n)) continue;
      if (decision_.is_undecided()) {
        proof_ = c->cert;
        set_decision(ctx, Decision::of(BaValue(c->value)), "decide cert");
      }
      return;
    }
    if (decision_.is_undecided() && fallback_start_ == kNever) {
      arm_fallback(ctx);  // before the self-delivering broadcast
      FfFallbackMsg m;
      m.sig = ctx.sign(digest_ff_fallback_msg(m.claim, m.proof));
      ctx.broadcast(m);
    }
  }

  void handle_fallback(ProcCtx& ctx, const Envelope& env) {
    const auto& msg = std::get<FfFallbackMsg>(env.msg);
    if (machine_.started()) return;
    if (decision_.is_undecided() && msg.claim && msg.proof && msg.claim->is_binary() &&
        verify_ff_decide_cert(ctx.crypto(), *msg.proof, *msg.claim, ctx.cfg().n)) {
      adopted_claim_ = std::make_pair(*msg.claim, *msg.proof);
    }
    if (fallback_start_ == kNever) {
      arm_fallback(ctx);  // before the self-delivering broadcast
      TraceEvent ev;
      ev.kind = EventKind::kFallbackEcho;
      ctx.event(std::move(ev));
      FfFallbackMsg echo;
      if (decision_.has_value() && proof_) {
        echo.claim = std::get<Value>(decision_.value());
        echo.proof = *proof_;
      } else if (adopted_claim_) {
        echo.claim = adopted_claim_->first;
        echo.proof = adopted_claim_->second;
      }
      echo.sig = ctx.sign(digest_ff_fallback_msg(echo.claim, echo.proof));
      ctx.broadcast(echo);
    }
  }

  void arm_fallback(ProcCtx& ctx) {
    fallback_start_ = ctx.now() + 2 * ctx.cfg().delta;
    ctx.set_timer(fallback_start_, kTimerFallbackStart, 0);
  }

  BaValue fallback_input() const {
    if (decision_.has_value()) return decision_.value();
    if (adopted_claim_) return BaValue(adopted_claim_->first);
    return BaValue(input_);
  }

  SignerId self_;
  Value input_;
  Decision decision_ = Decision::undecided();
  std::optional<ThresholdCert> proof_;
  std::optional<std::pair<Value, ThresholdCert>> adopted_claim_;
  bool signed_decide_ = false;
  Ticks fallback_start_ = kNever;
  bool fallback_applied_ = false;
  int transitions_ = 0;
  std::vector<Envelope> inbox_;
  FallbackMachine machine_;
};

class StrongFfFamily : public ProtocolFamily {
 public:
  explicit StrongFfFamily(RunConfig cfg) : cfg_(std::move(cfg)) {}

  Schedule schedule() const override { return Schedule::for_config(cfg_); }
  ValidityPredicate predicate() const override { return make_always_true(); }

  std::unique_ptr<ProcessBase> make_process(SignerId id, CryptoContext&) const override {
    return std::make_unique<StrongFfProcess>(id, cfg_.inputs.at(id));
  }

 private:
  RunConfig cfg_;
};

}  // namespace byzlab

#endif  // BYZLAB_STRONG_FF_HPP_
