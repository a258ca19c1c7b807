// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Byzantine strategy library. Each strategy is a deterministic function of
// (config, seed, observed deliveries); signing is restricted to corrupted
// ids by the crypto ledger, so no strategy can fake correct-process
// evidence. Several strategies host "shadow" protocol instances so a
// corrupted id can follow the protocol up to a scripted betrayal.

#ifndef BYZLAB_ADVERSARY_HPP_
#define BYZLAB_ADVERSARY_HPP_

#include <algorithm>
#include <any>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/bb.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/net.hpp"
#include "byzlab/strong_ff.hpp"
#include "byzlab/trace.hpp"
#include "byzlab/weak_ba.hpp"

namespace byzlab {

inline Value alt_value(const Value& v) {
  std::string p = v.payload();
  if (p.empty()) return Value(std::string(1, '\x01'));
  p[0] = static_cast<char>(p[0] ^ 0x5a);
  return Value(p);
}

// Count of refused sign attempts charged to the run's adversary.
inline int forge_attempts(const RunTrace& trace) { return trace.forgery_attempts; }

// ---------------------------------------------------------------------------
// Shadow hosting: run a corrupted id as if it were correct
// ---------------------------------------------------------------------------

class ShadowHost {
 public:
  ShadowHost(SignerId id, const ProtocolFamily& family, CryptoContext& crypto,
             ValidityPredicate pred)
      : id_(id), pred_(std::move(pred)), ctx_(*this) {
    proc_ = family.make_process(id, crypto);
  }

  SignerId id() const { return id_; }

  void round(AdvCtx& adv, int r) {
    ctx_.adv = &adv;
    proc_->on_round(ctx_, r);
    ctx_.adv = nullptr;
  }

  void deliver(AdvCtx& adv, const Envelope& env) {
    ctx_.adv = &adv;
    deliver_inner(env);
    ctx_.adv = nullptr;
  }

 private:
  void deliver_inner(const Envelope& env) {
    std::string key = dedupe_key(env.msg) + "@" + std::to_string(env.from);
    if (!seen_.insert(key).second) return;
    proc_->on_deliver(ctx_, env);
  }

  struct Ctx : ProcCtx {
    explicit Ctx(ShadowHost& host) : h(host) {}
    ShadowHost& h;
    AdvCtx* adv = nullptr;
    std::any dummy_shared;

    SignerId self() const override { return h.id_; }
    Ticks now() const override { return adv->now(); }
    const RunConfig& cfg() const override { return adv->cfg(); }
    const Schedule& sched() const override { return adv->sched(); }
    const CryptoContext& crypto() const override { return adv->crypto(); }
    const ValidityPredicate& predicate() const override { return h.pred_; }
    Sig sign(const Digest& digest) override {
      return *adv->crypto().try_adversary_sign(h.id_, digest);
    }
    void send(SignerId to, ProtocolMessage m) override {
      if (to == h.id_) {
        Envelope env;
        env.from = h.id_;
        env.to = h.id_;
        env.msg = std::move(m);
        env.sent_at = adv->now();
        env.deliver_at = adv->now();
        h.deliver_inner(env);
        return;
      }
      adv->send(h.id_, to, std::move(m), adv->cfg().delta);
    }
    void broadcast(const ProtocolMessage& m) override {
      for (SignerId to = 1; to <= adv->cfg().n; ++to) {
        if (to != h.id_) adv->send(h.id_, to, m, adv->cfg().delta);
      }
      Envelope env;
      env.from = h.id_;
      env.to = h.id_;
      env.msg = m;
      env.sent_at = adv->now();
      env.deliver_at = adv->now();
      h.deliver_inner(env);
    }
    void set_timer(Ticks, int, std::int64_t) override {}  // shadows stop before fallback
    void event(TraceEvent) override {}
    std::any& shared_state() override { return dummy_shared; }
  };

  SignerId id_;
  ValidityPredicate pred_;
  Ctx ctx_;
  std::unique_ptr<ProcessBase> proc_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

class HonestStrategy : public StrategyIface {
 public:
  std::string name() const override { return "honest"; }
  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f != 0) throw ConfigError("honest strategy requires f = 0");
    return {};
  }
};

// Corrupted ids follow the protocol until the crash round, then go silent.
class CrashStrategy : public StrategyIface {
 public:
  explicit CrashStrategy(int crash_round) : crash_round_(crash_round) {}

  std::string name() const override {
    return crash_round_ == 0 ? "crash" : "crash@" + std::to_string(crash_round_);
  }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    std::set<SignerId> out;
    for (SignerId id = 1; id <= cfg.f; ++id) out.insert(id);
    return out;
  }

  void begin(const RunConfig& cfg, const ProtocolFamily& family, CryptoContext& crypto) override {
    if (crash_round_ == 0) return;
    for (SignerId id : crypto.corrupted()) {
      shadows_.push_back(std::make_unique<ShadowHost>(id, family, crypto, family.predicate()));
    }
    (void)cfg;
  }

  void on_round(AdvCtx& ctx, int round) override {
    if (round >= crash_round_) return;
    for (auto& shadow : shadows_) shadow->round(ctx, round);
  }

  void on_deliver(AdvCtx& ctx, const Envelope& env) override {
    if (crashed(ctx)) return;
    for (auto& shadow : shadows_) {
      if (shadow->id() == env.to) shadow->deliver(ctx, env);
    }
  }

 private:
  bool crashed(const AdvCtx& ctx) const {
    return ctx.now() >= static_cast<Ticks>(crash_round_) * ctx.cfg().delta;
  }
  int crash_round_;
  std::vector<std::unique_ptr<ShadowHost>> shadows_;
};

// Broadcast sender that never sends its value: every correct process must
// leave the vetting with a t+1 "don't know" certificate.
class SilentSenderStrategy : public StrategyIface {
 public:
  std::string name() const override { return "silent-sender"; }
  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("silent-sender requires f >= 1");
    std::set<SignerId> out{cfg.sender};
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }
};

// Broadcast sender that signs two values and deals them to disjoint halves
// of the correct processes.
class EquivocatingSenderStrategy : public StrategyIface {
 public:
  std::string name() const override { return "equivocating-sender"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("equivocating-sender requires f >= 1");
    std::set<SignerId> out{cfg.sender};
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void on_round(AdvCtx& ctx, int round) override {
    if (round != 0) return;
    const Value va = ctx.cfg().value;
    const Value vb = alt_value(va);
    Sig sa = *ctx.crypto().try_adversary_sign(ctx.cfg().sender, digest_sender_value(va));
    Sig sb = *ctx.crypto().try_adversary_sign(ctx.cfg().sender, digest_sender_value(vb));
    int i = 0;
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (ctx.corrupted().count(to)) continue;
      SenderValueMsg m;
      if (i++ % 2 == 0) {
        m.value = va;
        m.sig = sa;
      } else {
        m.value = vb;
        m.sig = sb;
      }
      ctx.send(ctx.cfg().sender, to, m, ctx.cfg().delta);
    }
  }
};

// Two corrupted leaders drive commit certificates for two different values
// (dealt selectively), then finalize the second value to a single correct
// process and go silent. Exercises commit stickiness, the decide guard and
// the unique-finalize argument end to end.
class TwoCommitLeaderStrategy : public StrategyIface {
 public:
  std::string name() const override { return "two-commit-leader"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 2) throw ConfigError("two-commit-leader requires f >= 2");
    std::set<SignerId> out;
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void begin(const RunConfig& cfg, const ProtocolFamily&, CryptoContext&) override {
    va_ = cfg.inputs.at(1);
    vb_ = alt_value(va_);
  }

  void on_round(AdvCtx& ctx, int round) override {
    const int base = ctx.sched().wba_base;
    const int q = quorum_size(ctx.cfg().n, ctx.cfg().t);
    auto correct = correct_ids(ctx);
    if (round == base + 0) {  // phase 1 round 1: leader 1 proposes va
      ProposeMsg m;
      m.phase = 1;
      m.value = BaValue(va_);
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_propose(m.value, 1));
      send_all(ctx, 1, m);
    } else if (round == base + 2) {  // phase 1 round 3: deal commit cert to one process
      auto cert = vote_cert(ctx, BaValue(va_), 1, q);
      if (!cert) return;
      cert_a_ = cert;
      CommitMsg m;
      m.phase = 1;
      m.value = BaValue(va_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_commit_msg(m.value, m.cert, 1));
      ctx.send(1, correct.front(), m, ctx.cfg().delta);
    } else if (round == base + 5) {  // phase 2 round 1: leader 2 proposes vb
      ProposeMsg m;
      m.phase = 2;
      m.value = BaValue(vb_);
      m.sig = *ctx.crypto().try_adversary_sign(2, digest_propose(m.value, 2));
      send_all(ctx, 2, m);
    } else if (round == base + 7) {  // phase 2 round 3: commit cert for vb, to everyone
      auto cert = vote_cert(ctx, BaValue(vb_), 2, q);
      if (!cert) return;
      CommitMsg m;
      m.phase = 2;
      m.value = BaValue(vb_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(2, digest_commit_msg(m.value, m.cert, 2));
      send_all(ctx, 2, m);
    } else if (round == base + 9) {  // phase 2 round 5: finalize vb to one process
      auto cert = decide_cert(ctx, BaValue(vb_), 2, q);
      if (!cert) return;
      FinalizeMsg m;
      m.phase = 2;
      m.value = BaValue(vb_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(2, digest_finalize_msg(m.value, m.cert, 2));
      SignerId target = correct.size() > 1 ? correct[1] : correct.front();
      ctx.send(2, target, m, ctx.cfg().delta);
    }
  }

  void on_deliver(AdvCtx&, const Envelope& env) override { observed_.push_back(env); }

 private:
  std::vector<SignerId> correct_ids(const AdvCtx& ctx) const {
    std::vector<SignerId> out;
    for (SignerId id = 1; id <= ctx.cfg().n; ++id) {
      if (!ctx.corrupted().count(id)) out.push_back(id);
    }
    return out;
  }

  void send_all(AdvCtx& ctx, SignerId from, const ProtocolMessage& m) const {
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (to != from && !ctx.corrupted().count(to)) ctx.send(from, to, m, ctx.cfg().delta);
    }
  }

  // Observed correct votes plus signatures from every corrupted id.
  std::optional<ThresholdCert> vote_cert(AdvCtx& ctx, const BaValue& v, int phase, int q) {
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : observed_) {
      const auto* vote = std::get_if<VoteMsg>(&env.msg);
      if (!vote || vote->phase != phase || !ba_equal(vote->value, v)) continue;
      if (vote->sig.digest != digest_vote(v, phase)) continue;
      if (signers.insert(vote->sig.signer).second) sigs.push_back(vote->sig);
    }
    for (SignerId id : ctx.corrupted()) {
      if (signers.insert(id).second) {
        sigs.push_back(*ctx.crypto().try_adversary_sign(id, digest_vote(v, phase)));
      }
    }
    if (static_cast<int>(signers.size()) < q) return std::nullopt;
    return ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
  }

  std::optional<ThresholdCert> decide_cert(AdvCtx& ctx, const BaValue& v, int phase, int q) {
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : observed_) {
      const auto* d = std::get_if<DecideMsg>(&env.msg);
      if (!d || d->phase != phase || !ba_equal(d->value, v)) continue;
      if (d->sig.digest != digest_decide(v, phase)) continue;
      if (signers.insert(d->sig.signer).second) sigs.push_back(d->sig);
    }
    for (SignerId id : ctx.corrupted()) {
      if (signers.insert(id).second) {
        sigs.push_back(*ctx.crypto().try_adversary_sign(id, digest_decide(v, phase)));
      }
    }
    if (static_cast<int>(signers.size()) < q) return std::nullopt;
    return ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
  }

  Value va_, vb_;
  std::optional<ThresholdCert> cert_a_;
  std::vector<Envelope> observed_;
};

// A corrupted first leader runs its phase fully but hands the finalize
// certificate to exactly one correct process - the first correct phase
// leader, which then decides and stays silent; the help round must carry
// everyone else.
class DecideThenSilenceStrategy : public StrategyIface {
 public:
  std::string name() const override { return "decide-then-silence"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("decide-then-silence requires f >= 1");
    std::set<SignerId> out;
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void begin(const RunConfig& cfg, const ProtocolFamily&, CryptoContext&) override {
    vd_ = cfg.inputs.at(1);
  }

  void on_round(AdvCtx& ctx, int round) override {
    const int base = ctx.sched().wba_base;
    const int q = quorum_size(ctx.cfg().n, ctx.cfg().t);
    if (round == base + 0) {
      ProposeMsg m;
      m.phase = 1;
      m.value = BaValue(vd_);
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_propose(m.value, 1));
      broadcast_from(ctx, 1, m);
    } else if (round == base + 2) {
      auto cert = harvest_cert<VoteMsg>(ctx, BaValue(vd_), 1, q, /*decide=*/false);
      if (!cert) return;
      CommitMsg m;
      m.phase = 1;
      m.value = BaValue(vd_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_commit_msg(m.value, m.cert, 1));
      broadcast_from(ctx, 1, m);
    } else if (round == base + 4) {
      auto cert = harvest_cert<DecideMsg>(ctx, BaValue(vd_), 1, q, /*decide=*/true);
      if (!cert) return;
      FinalizeMsg m;
      m.phase = 1;
      m.value = BaValue(vd_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_finalize_msg(m.value, m.cert, 1));
      // First correct phase leader (with f = t it is the only one).
      SignerId target = ctx.cfg().f + 1;
      ctx.send(1, target, m, ctx.cfg().delta);
    }
  }

  void on_deliver(AdvCtx&, const Envelope& env) override { observed_.push_back(env); }

 private:
  void broadcast_from(AdvCtx& ctx, SignerId from, const ProtocolMessage& m) const {
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (to != from && !ctx.corrupted().count(to)) ctx.send(from, to, m, ctx.cfg().delta);
    }
  }

  template <typename M>
  std::optional<ThresholdCert> harvest_cert(AdvCtx& ctx, const BaValue& v, int phase, int q,
                                            bool decide) {
    const Digest want = decide ? digest_decide(v, phase) : digest_vote(v, phase);
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : observed_) {
      const auto* m = std::get_if<M>(&env.msg);
      if (!m || m->phase != phase || !ba_equal(m->value, v)) continue;
      if (m->sig.digest != want) continue;
      if (signers.insert(m->sig.signer).second) sigs.push_back(m->sig);
    }
    for (SignerId id : ctx.corrupted()) {
      if (signers.insert(id).second) sigs.push_back(*ctx.crypto().try_adversary_sign(id, want));
    }
    if (static_cast<int>(signers.size()) < q) return std::nullopt;
    return ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
  }

  Value vd_;
  std::vector<Envelope> observed_;
};

// Decide-then-silence against a chosen set of non-leader processes, then
// form the fallback certificate from their help requests plus corrupted
// signatures and deal it to exactly one decided process: everyone must
// still converge, echoing once and starting the fallback within delta.
class PartialFallbackDealerStrategy : public StrategyIface {
 public:
  std::string name() const override { return "partial-fallback-dealer"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("partial-fallback-dealer requires f >= 1");
    if (cfg.t + 1 - cfg.f > cfg.n - (cfg.t + 1)) {
      throw ConfigError("partial-fallback-dealer: not enough non-leader processes");
    }
    std::set<SignerId> out;
    for (SignerId id = 1; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void begin(const RunConfig& cfg, const ProtocolFamily&, CryptoContext&) override {
    vp_ = cfg.inputs.at(1);
    // Leave the last t+1-f non-leader processes undecided.
    int needed = cfg.t + 1 - cfg.f;
    for (SignerId id = cfg.n; needed > 0; --id, --needed) skip_.insert(id);
  }

  void on_round(AdvCtx& ctx, int round) override {
    const int base = ctx.sched().wba_base;
    const int q = quorum_size(ctx.cfg().n, ctx.cfg().t);
    if (round == base + 0) {
      ProposeMsg m;
      m.phase = 1;
      m.value = BaValue(vp_);
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_propose(m.value, 1));
      send_correct(ctx, 1, m, std::set<SignerId>{});
    } else if (round == base + 2) {
      auto cert = harvest(ctx, BaValue(vp_), 1, q, false);
      if (!cert) return;
      CommitMsg m;
      m.phase = 1;
      m.value = BaValue(vp_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_commit_msg(m.value, m.cert, 1));
      send_correct(ctx, 1, m, std::set<SignerId>{});
    } else if (round == base + 4) {
      auto cert = harvest(ctx, BaValue(vp_), 1, q, true);
      if (!cert) return;
      FinalizeMsg m;
      m.phase = 1;
      m.value = BaValue(vp_);
      m.cert = *cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_finalize_msg(m.value, m.cert, 1));
      send_correct(ctx, 1, m, skip_);
    } else if (round == ctx.sched().help_round2) {
      // Help requests from the skipped processes arrived during round 1;
      // add corrupted signatures to reach t+1 and deal the certificate to
      // a single decided process, mid-round.
      std::set<SignerId> signers;
      std::vector<Sig> sigs;
      for (const Envelope& env : observed_) {
        const auto* req = std::get_if<HelpReqMsg>(&env.msg);
        if (!req || req->sig.digest != digest_help_req()) continue;
        if (signers.insert(req->sig.signer).second) sigs.push_back(req->sig);
      }
      for (SignerId id : ctx.corrupted()) {
        if (signers.insert(id).second) {
          sigs.push_back(*ctx.crypto().try_adversary_sign(id, digest_help_req()));
        }
      }
      if (static_cast<int>(signers.size()) < ctx.cfg().t + 1) return;
      ThresholdCert cert = ctx.crypto().aggregate(sigs, ctx.cfg().t + 1, ctx.cfg().n);
      FallbackMsg m;
      m.cert = cert;
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_fallback_msg(m.cert, m.claim, m.proof));
      SignerId target = ctx.cfg().f + 1;  // decided (not in skip_, not corrupted)
      ctx.send(1, target, m, std::max<Ticks>(1, ctx.cfg().delta / 2));
    }
  }

  void on_deliver(AdvCtx&, const Envelope& env) override { observed_.push_back(env); }

 private:
  void send_correct(AdvCtx& ctx, SignerId from, const ProtocolMessage& m,
                    const std::set<SignerId>& skip) const {
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (to == from || ctx.corrupted().count(to) || skip.count(to)) continue;
      ctx.send(from, to, m, ctx.cfg().delta);
    }
  }

  std::optional<ThresholdCert> harvest(AdvCtx& ctx, const BaValue& v, int phase, int q,
                                       bool decide) {
    const Digest want = decide ? digest_decide(v, phase) : digest_vote(v, phase);
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : observed_) {
      const Sig* sig = nullptr;
      if (const auto* vote = std::get_if<VoteMsg>(&env.msg); vote && !decide) sig = &vote->sig;
      if (const auto* d = std::get_if<DecideMsg>(&env.msg); d && decide) sig = &d->sig;
      if (!sig || sig->digest != want) continue;
      if (signers.insert(sig->signer).second) sigs.push_back(*sig);
    }
    for (SignerId id : ctx.corrupted()) {
      if (signers.insert(id).second) sigs.push_back(*ctx.crypto().try_adversary_sign(id, want));
    }
    if (static_cast<int>(signers.size()) < q) return std::nullopt;
    return ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
  }

  Value vp_;
  std::set<SignerId> skip_;
  std::vector<Envelope> observed_;
};

// Corrupted non-leaders behave correctly through the phases (so every
// correct process decides), then flood signed help requests. Answers are
// bounded by the number of requests, and no fallback certificate can form
// from f < t+1 signatures.
class HelpReqSpamStrategy : public StrategyIface {
 public:
  std::string name() const override { return "help-req-spam"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("help-req-spam requires f >= 1");
    if (cfg.f > cfg.n - (cfg.t + 1)) {
      throw ConfigError("help-req-spam: needs f non-leader processes");
    }
    std::set<SignerId> out;
    for (SignerId id = cfg.t + 2; static_cast<int>(out.size()) < cfg.f; ++id) out.insert(id);
    return out;
  }

  void begin(const RunConfig&, const ProtocolFamily& family, CryptoContext& crypto) override {
    for (SignerId id : crypto.corrupted()) {
      shadows_.push_back(std::make_unique<ShadowHost>(id, family, crypto, family.predicate()));
    }
  }

  void on_round(AdvCtx& ctx, int round) override {
    if (round < ctx.sched().help_round1) {
      for (auto& shadow : shadows_) shadow->round(ctx, round);
      return;
    }
    if (round == ctx.sched().help_round1) {
      for (SignerId id : ctx.corrupted()) {
        HelpReqMsg req;
        req.sig = *ctx.crypto().try_adversary_sign(id, digest_help_req());
        for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
          if (!ctx.corrupted().count(to)) ctx.send(id, to, req, ctx.cfg().delta);
        }
      }
    }
  }

  void on_deliver(AdvCtx& ctx, const Envelope& env) override {
    if (ctx.now() >= static_cast<Ticks>(ctx.sched().help_round1) * ctx.cfg().delta) return;
    for (auto& shadow : shadows_) {
      if (shadow->id() == env.to) shadow->deliver(ctx, env);
    }
  }

 private:
  std::vector<std::unique_ptr<ShadowHost>> shadows_;
};

// A corrupted fast-path leader that completes rounds 1-4 honestly but
// deals the n-of-n decide certificate to only half of the correct
// processes, forcing the echo/safety-window path to reconcile.
class PartialDecideDealerStrategy : public StrategyIface {
 public:
  std::string name() const override { return "partial-decide-dealer"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    if (cfg.f < 1) throw ConfigError("partial-decide-dealer requires f >= 1");
    std::set<SignerId> out{1};
    for (SignerId id = cfg.n; static_cast<int>(out.size()) < cfg.f; --id) out.insert(id);
    return out;
  }

  void on_round(AdvCtx& ctx, int round) override {
    const int t = ctx.cfg().t;
    const int n = ctx.cfg().n;
    if (round == 1) {
      std::map<int, std::set<SignerId>> by_bit;
      std::map<int, std::vector<Sig>> sigs;
      for (const Envelope& env : observed_) {
        const auto* in = std::get_if<FfInputMsg>(&env.msg);
        if (!in || !in->value.is_binary()) continue;
        if (in->sig.digest != digest_ff_input(in->value)) continue;
        if (by_bit[in->value.bit()].insert(in->sig.signer).second) {
          sigs[in->value.bit()].push_back(in->sig);
        }
      }
      for (SignerId id : ctx.corrupted()) {
        Value v = Value::binary(1);
        if (by_bit[1].insert(id).second) {
          sigs[1].push_back(*ctx.crypto().try_adversary_sign(id, digest_ff_input(v)));
        }
      }
      auto choice = ff_propose_choice(by_bit, t);
      if (!choice) return;
      chosen_ = *choice;
      FfProposeMsg m;
      m.value = *choice;
      m.cert = ctx.crypto().aggregate(sigs[choice->bit()], t + 1, n);
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_ff_propose_msg(m.value, m.cert));
      for (SignerId to = 1; to <= n; ++to) {
        if (to != 1 && !ctx.corrupted().count(to)) ctx.send(1, to, m, ctx.cfg().delta);
      }
    } else if (round == 3 && chosen_) {
      std::set<SignerId> signers;
      std::vector<Sig> sigs;
      const Digest want = digest_ff_decide(*chosen_);
      for (const Envelope& env : observed_) {
        const auto* d = std::get_if<FfDecideSigMsg>(&env.msg);
        if (!d || d->sig.digest != want) continue;
        if (signers.insert(d->sig.signer).second) sigs.push_back(d->sig);
      }
      for (SignerId id : ctx.corrupted()) {
        if (signers.insert(id).second) {
          sigs.push_back(*ctx.crypto().try_adversary_sign(id, want));
        }
      }
      if (static_cast<int>(signers.size()) < n) return;
      FfDecideCertMsg m;
      m.value = *chosen_;
      m.cert = ctx.crypto().aggregate(sigs, n, n);
      m.sig = *ctx.crypto().try_adversary_sign(1, digest_ff_decide_cert_msg(m.value, m.cert));
      // Deal to the lower half of the correct processes only.
      std::vector<SignerId> correct;
      for (SignerId id = 1; id <= n; ++id) {
        if (!ctx.corrupted().count(id)) correct.push_back(id);
      }
      for (std::size_t i = 0; i < correct.size() / 2 + 1 && i < correct.size(); ++i) {
        ctx.send(1, correct[i], m, ctx.cfg().delta);
      }
    }
  }

  void on_deliver(AdvCtx&, const Envelope& env) override { observed_.push_back(env); }

 private:
  std::optional<Value> chosen_;
  std::vector<Envelope> observed_;
};

// Seeded chaos: random corrupted set, random replays, random semi-valid
// messages built from harvested evidence, random delays, and occasional
// forgery attempts that the ledger must refuse.
class RandomFuzzerStrategy : public StrategyIface {
 public:
  std::string name() const override { return "random-fuzzer"; }

  std::set<SignerId> corrupt_choice(const RunConfig& cfg) const override {
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
    std::set<SignerId> out;
    while (static_cast<int>(out.size()) < cfg.f) {
      out.insert(static_cast<SignerId>(rng.range(1, cfg.n)));
    }
    return out;
  }

  void on_round(AdvCtx& ctx, int round) override {
    (void)round;
    const int actions = static_cast<int>(ctx.rng().range(0, 2));
    for (int i = 0; i < actions; ++i) emit(ctx);
    if (ctx.rng().chance(10)) {
      // Forgery attempt for a random id; refused and counted unless the
      // id happens to be corrupted.
      SignerId id = static_cast<SignerId>(ctx.rng().range(1, ctx.cfg().n));
      (void)ctx.crypto().try_adversary_sign(id, digest_help_req());
    }
  }

  void on_deliver(AdvCtx& ctx, const Envelope& env) override {
    observed_.push_back(env);
    if (observed_.size() > 64) observed_.erase(observed_.begin());
    if (ctx.rng().chance(20)) emit(ctx);
  }

  Ticks inbound_delay(const Envelope&, Ticks delta, Rng& rng) override {
    return rng.range(1, delta);
  }

 private:
  SignerId pick_corrupted(AdvCtx& ctx) {
    std::vector<SignerId> ids(ctx.corrupted().begin(), ctx.corrupted().end());
    return ids.empty() ? 0 : ctx.rng().pick(ids);
  }

  void emit(AdvCtx& ctx) {
    SignerId from = pick_corrupted(ctx);
    if (!from) return;
    SignerId to = static_cast<SignerId>(ctx.rng().range(1, ctx.cfg().n));
    Ticks delay = ctx.rng().range(1, ctx.cfg().delta);
    switch (ctx.rng().range(0, 4)) {
      case 0: {  // replay an observed message
        if (observed_.empty()) return;
        ctx.send(from, to, ctx.rng().pick(observed_).msg, delay);
        return;
      }
      case 1: {  // random signed vote (agreement protocols)
        if (ctx.sched().wba_base < 0) return;
        VoteMsg m;
        m.phase = static_cast<int>(ctx.rng().range(1, ctx.cfg().t + 1));
        m.value = BaValue(random_value(ctx));
        m.sig = *ctx.crypto().try_adversary_sign(from, digest_vote(m.value, m.phase));
        ctx.send(from, to, m, delay);
        return;
      }
      case 2: {  // signed help request
        if (ctx.sched().help_round1 < 0) return;
        HelpReqMsg m;
        m.sig = *ctx.crypto().try_adversary_sign(from, digest_help_req());
        ctx.send(from, to, m, delay);
        return;
      }
      case 3: {  // fast-path input, possibly a duplicate with the other bit
        if (ctx.cfg().protocol != Protocol::kStrongFf) return;
        FfInputMsg m;
        m.value = Value::binary(static_cast<int>(ctx.rng().range(0, 1)));
        m.sig = *ctx.crypto().try_adversary_sign(from, digest_ff_input(m.value));
        ctx.send(from, kFfLeader, m, delay);
        return;
      }
      case 4: {  // propose for a random phase
        if (ctx.sched().wba_base < 0) return;
        ProposeMsg m;
        m.phase = static_cast<int>(ctx.rng().range(1, ctx.cfg().t + 1));
        m.value = BaValue(random_value(ctx));
        m.sig = *ctx.crypto().try_adversary_sign(from, digest_propose(m.value, m.phase));
        ctx.send(from, to, m, delay);
        return;
      }
    }
  }

  Value random_value(AdvCtx& ctx) {
    std::string payload(1, static_cast<char>(ctx.rng().range('a', 'e')));
    return Value(payload);
  }

  std::vector<Envelope> observed_;
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

struct StrategyInfo {
  std::string name;
  std::vector<Protocol> protocols;
  // Feasible corruption counts for an (n, t) grid point.
  std::vector<int> (*feasible_f)(int n, int t);
};

namespace detail {
inline std::vector<int> f_zero(int, int) { return {0}; }
inline std::vector<int> f_zero_to_t(int, int t) {
  std::vector<int> out;
  for (int f = 0; f <= t; ++f) out.push_back(f);
  return out;
}
inline std::vector<int> f_one_to_t(int, int t) {
  std::vector<int> out;
  for (int f = 1; f <= t; ++f) out.push_back(f);
  return out;
}
inline std::vector<int> f_two_to_t(int, int t) {
  std::vector<int> out;
  for (int f = 2; f <= t; ++f) out.push_back(f);
  return out;
}
// The dealing adversary needs enough non-leaders to starve and, run below
// the fallback threshold, it would break the below-threshold guarantee outright
// (it can pre-decide every correct leader and top up t help requests with
// one signature of its own); the catalog keeps it in the regime where the
// quadratic path is already justified.
inline std::vector<int> f_pfd(int n, int t) {
  std::vector<int> out;
  for (int f = 1; f <= t; ++f) {
    if (t + 1 - f <= n - (t + 1) && !below_fallback_threshold(n, t, f)) out.push_back(f);
  }
  return out;
}
inline std::vector<int> f_spam(int n, int t) {
  std::vector<int> out;
  for (int f = 1; f <= t && f <= n - (t + 1); ++f) out.push_back(f);
  return out;
}
}  // namespace detail

inline const std::vector<StrategyInfo>& strategy_catalog() {
  static const std::vector<StrategyInfo> catalog = {
      {"honest", {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf}, detail::f_zero},
      {"crash", {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf}, detail::f_zero_to_t},
      {"crash@2", {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf}, detail::f_zero_to_t},
      {"silent-sender", {Protocol::kBb}, detail::f_one_to_t},
      {"equivocating-sender", {Protocol::kBb}, detail::f_one_to_t},
      {"two-commit-leader", {Protocol::kWeakBa}, detail::f_two_to_t},
      {"decide-then-silence", {Protocol::kWeakBa}, detail::f_one_to_t},
      {"partial-fallback-dealer", {Protocol::kWeakBa}, detail::f_pfd},
      {"help-req-spam", {Protocol::kBb, Protocol::kWeakBa}, detail::f_spam},
      {"partial-decide-dealer", {Protocol::kStrongFf}, detail::f_one_to_t},
      {"random-fuzzer", {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf},
       detail::f_zero_to_t},
  };
  return catalog;
}

inline std::unique_ptr<StrategyIface> make_strategy(const std::string& name) {
  if (name == "honest") return std::make_unique<HonestStrategy>();
  if (name == "crash") return std::make_unique<CrashStrategy>(0);
  if (name.rfind("crash@", 0) == 0) {
    return std::make_unique<CrashStrategy>(std::stoi(name.substr(6)));
  }
  if (name == "silent-sender") return std::make_unique<SilentSenderStrategy>();
  if (name == "equivocating-sender") return std::make_unique<EquivocatingSenderStrategy>();
  if (name == "two-commit-leader") return std::make_unique<TwoCommitLeaderStrategy>();
  if (name == "decide-then-silence") return std::make_unique<DecideThenSilenceStrategy>();
  if (name == "partial-fallback-dealer") return std::make_unique<PartialFallbackDealerStrategy>();
  if (name == "help-req-spam") return std::make_unique<HelpReqSpamStrategy>();
  if (name == "partial-decide-dealer") return std::make_unique<PartialDecideDealerStrategy>();
  if (name == "random-fuzzer") return std::make_unique<RandomFuzzerStrategy>();
  throw ConfigError("unknown strategy: " + name);
}

}  // namespace byzlab

#endif  // BYZLAB_ADVERSARY_HPP_
