// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Broadcast with a designated sender, reduced to weak agreement. The
// sender disseminates its signed value in round 0; n three-round vetting
// phases then guarantee every correct process an input that is either
// sender-signed or backed by a t+1 "don't know" certificate (the exact
// shape the bb-valid predicate accepts); the embedded weak agreement
// instance decides, and sender-signed decisions extract the value.

#ifndef BYZLAB_BB_HPP_
#define BYZLAB_BB_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/net.hpp"
#include "byzlab/trace.hpp"
#include "byzlab/weak_ba.hpp"

namespace byzlab {

// Extraction: only a sender-signed agreement outcome carries the broadcast
// value; anything else (a cert-backed value or the no-value default) means
// the sender equivocated or stayed silent.
inline std::optional<Value> bb_decide(const Decision& ba_decision, SignerId sender) {
  if (!ba_decision.has_value()) return std::nullopt;
  const auto* ss = std::get_if<SenderSignedValue>(&ba_decision.value());
  if (!ss || ss->sig.signer != sender) return std::nullopt;
  return ss->value;
}

class BbProcess : public ProcessBase {
 public:
  BbProcess(SignerId self, const RunConfig& cfg)
      : self_(self), core_(1 + 3 * cfg.n, BaValue(Value())) {}

  void on_round(ProcCtx& ctx, int round) override {
    const int n = ctx.cfg().n;
    const int wba_base = 1 + 3 * n;
    if (round == 0) {
      if (self_ == ctx.cfg().sender) {
        SenderValueMsg m;
        m.value = ctx.cfg().value;
        m.sig = ctx.sign(digest_sender_value(m.value));
        ctx.broadcast(m);
      }
      return;
    }
    if (round < wba_base) {
      const int lr = round - 1;
      const int phase = lr / 3 + 1;
      switch (lr % 3) {
        case 0:
          if (phase > 1) finish_vetting_phase(ctx, phase - 1);
          maybe_initiate(ctx, phase);
          break;
        case 1:
          answer_help_req(ctx, phase);
          break;
        case 2:
          leader_broadcast_step(ctx, phase);
          break;
      }
      return;
    }
    if (round == wba_base) {
      finish_vetting_phase(ctx, n);
      if (!v_i_) {
        // Unreachable for correct processes (each leads one vetting phase
        // and a correct-led non-silent phase always returns a valid value);
        // keep the run going so the assertion layer reports it.
        ctx.note(EventKind::kNote, "entering agreement with no vetted value");
        v_i_ = BaValue(Value());
      }
      core_.set_input(*v_i_);
    }
    core_.on_round(ctx, round);
  }

  void on_deliver(ProcCtx& ctx, const Envelope& env) override {
    if (WeakBaCore::handles(env.msg)) {
      core_.on_deliver(ctx, env);
      return;
    }
    if (!verify_outer(ctx.crypto(), env.from, env.msg)) {
      TraceEvent ev;
      ev.kind = EventKind::kDrop;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.note = "bad outer signature";
      ctx.event(std::move(ev));
      return;
    }
    if (const auto* sv = std::get_if<SenderValueMsg>(&env.msg)) {
      // Dissemination-round adoption only; the first sender-signed value
      // by delivery order sticks.
      if (env.from == ctx.cfg().sender && env.deliver_at <= ctx.cfg().delta && !v_i_) {
        v_i_ = SenderSignedValue{sv->value, sv->sig};
      }
      return;
    }
    inbox_.push_back(env);
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) override {
    core_.on_timer(ctx, tag, arg);
  }

  ProcessReport report() const override {
    ProcessReport rep;
    rep.decision = core_.decision();
    rep.decision_transitions = core_.transitions();
    rep.agreement_input = core_.input();
    rep.bb_extracted = bb_decide(core_.decision(), sender_of_report_);
    return rep;
  }

  void set_report_sender(SignerId sender) { sender_of_report_ = sender; }

 private:
  // Vetting round 1: a leader with no value yet asks everyone for help.
  void maybe_initiate(ProcCtx& ctx, int phase) {
    if (phase_leader(phase, ctx.cfg().n) != self_) return;
    if (v_i_) return;  // silent phase
    initiated_phase_ = phase;
    BbHelpReqMsg m;
    m.phase = phase;
    m.sig = ctx.sign(digest_bb_help_req(phase));
    ctx.broadcast(m);
  }

  // Vetting round 2: reply with the held value, or a signed "don't know".
  void answer_help_req(ProcCtx& ctx, int phase) {
    const SignerId leader = phase_leader(phase, ctx.cfg().n);
    for (const Envelope& env : inbox_) {
      const auto* req = std::get_if<BbHelpReqMsg>(&env.msg);
      if (!req || req->phase != phase || env.from != leader) continue;
      if (v_i_) {
        BbReplyMsg reply;
        reply.phase = phase;
        reply.value = *v_i_;
        ctx.send(leader, reply);
      } else {
        BbIdkMsg idk;
        idk.phase = phase;
        idk.sig = ctx.sign(digest_bb_idk(phase));
        ctx.send(leader, idk);
      }
      return;
    }
  }

  // Vetting round 3, leader: broadcast a sender-signed reply if any came
  // in, else batch t+1 fresh "don't know" signatures into a certificate,
  // else relay any other predicate-valid reply (a certificate from an
  // earlier phase). One of these fires whenever the leader is correct.
  void leader_broadcast_step(ProcCtx& ctx, int phase) {
    if (phase_leader(phase, ctx.cfg().n) != self_) return;
    if (!initiated(phase)) return;
    const int t = ctx.cfg().t;
    const int n = ctx.cfg().n;
    const SignerId sender = ctx.cfg().sender;
    for (const Envelope& env : inbox_) {
      const auto* reply = std::get_if<BbReplyMsg>(&env.msg);
      if (!reply || reply->phase != phase) continue;
      const auto* ss = std::get_if<SenderSignedValue>(&reply->value);
      if (!ss || ss->sig.signer != sender) continue;
      if (!bb_valid(ctx.crypto(), reply->value, sender, t, n)) continue;
      BbPhaseValueMsg out;
      out.phase = phase;
      out.value = reply->value;
      ctx.broadcast(out);
      return;
    }
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : inbox_) {
      const auto* idk = std::get_if<BbIdkMsg>(&env.msg);
      if (!idk || idk->phase != phase) continue;
      if (signers.insert(idk->sig.signer).second) sigs.push_back(idk->sig);
    }
    if (static_cast<int>(signers.size()) >= t + 1) {
      ThresholdCert cert = ctx.crypto().aggregate(sigs, t + 1, n);
      TraceEvent ev;
      ev.kind = EventKind::kCertFormed;
      ev.note = "idk cert, phase " + std::to_string(phase);
      ctx.event(std::move(ev));
      BbPhaseValueMsg out;
      out.phase = phase;
      out.value = CertValue{cert};
      ctx.broadcast(out);
      return;
    }
    for (const Envelope& env : inbox_) {
      const auto* reply = std::get_if<BbReplyMsg>(&env.msg);
      if (!reply || reply->phase != phase) continue;
      if (!bb_valid(ctx.crypto(), reply->value, sender, t, n)) continue;
      BbPhaseValueMsg out;
      out.phase = phase;
      out.value = reply->value;
      ctx.broadcast(out);
      return;
    }
  }

  // Phase return: adopt the leader's broadcast value if the predicate
  // accepts it; otherwise the phase returns nothing.
  void finish_vetting_phase(ProcCtx& ctx, int phase) {
    const SignerId leader = phase_leader(phase, ctx.cfg().n);
    for (const Envelope& env : inbox_) {
      const auto* pv = std::get_if<BbPhaseValueMsg>(&env.msg);
      if (!pv || pv->phase != phase || env.from != leader) continue;
      if (!bb_valid(ctx.crypto(), pv->value, ctx.cfg().sender, ctx.cfg().t, ctx.cfg().n)) {
        continue;
      }
      v_i_ = pv->value;
      return;
    }
  }

  bool initiated(int phase) const { return initiated_phase_ == phase; }

  SignerId self_;
  SignerId sender_of_report_ = 1;
  std::optional<BaValue> v_i_;
  int initiated_phase_ = -1;
  std::vector<Envelope> inbox_;
  WeakBaCore core_;
};

class BbFamily : public ProtocolFamily {
 public:
  explicit BbFamily(RunConfig cfg) : cfg_(std::move(cfg)) {}

  Schedule schedule() const override { return Schedule::for_config(cfg_); }

  ValidityPredicate predicate() const override {
    return make_bb_valid(cfg_.sender, cfg_.t, cfg_.n);
  }

  std::unique_ptr<ProcessBase> make_process(SignerId id, CryptoContext&) const override {
    auto proc = std::make_unique<BbProcess>(id, cfg_);
    proc->set_report_sender(cfg_.sender);
    return proc;
  }

 private:
  RunConfig cfg_;
};

}  // namespace byzlab

#endif  // BYZLAB_BB_HPP_
