// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Weak agreement with unique validity: t+1 leader phases built on two
// levels of quorum certificates (commit, then finalize, both at
// ceil((n+t+1)/2) signers), a help round for processes left undecided, a
// t+1-signed fallback certificate that launches the pluggable strong
// fallback with stretched rounds, and a 2*delta safety window that carries
// existing decisions into the fallback inputs.

#ifndef BYZLAB_WEAK_BA_HPP_
#define BYZLAB_WEAK_BA_HPP_

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

inline SignerId phase_leader(int phase, int n) { return ((phase - 1) % n) + 1; }

// Post-fallback resolution: a prior decision stands; otherwise the
// fallback result if the predicate accepts it, else the no-value default.
inline Decision wba_finalize_decision(const Decision& decision, const BaValue& fallback_val,
                                      const CryptoContext& ctx, const ValidityPredicate& pred) {
  if (decision.decided()) return decision;
  if (pred(ctx, fallback_val)) return Decision::of(fallback_val);
  return Decision::bot();
}

// The weak agreement state machine, embeddable at any round offset so the
// broadcast reduction can run it after its vetting phases. The owner feeds
// it rounds, deliveries and timers; fallback certificates are handled at
// delivery time (the activation skew bound depends on immediate echo).
class WeakBaCore {
 public:
  WeakBaCore(int base_round, BaValue domain_min)
      : base_round_(base_round), machine_(std::move(domain_min), nullptr) {}

  void set_input(BaValue v) { input_ = std::move(v); }
  const std::optional<BaValue>& input() const { return input_; }
  const Decision& decision() const { return decision_; }
  int transitions() const { return transitions_; }

  static bool handles(const ProtocolMessage& m) {
    return std::holds_alternative<ProposeMsg>(m) || std::holds_alternative<VoteMsg>(m) ||
           std::holds_alternative<CommitMsg>(m) || std::holds_alternative<DecideMsg>(m) ||
           std::holds_alternative<FinalizeMsg>(m) || std::holds_alternative<HelpReqMsg>(m) ||
           std::holds_alternative<HelpMsg>(m) || std::holds_alternative<FallbackMsg>(m) ||
           std::holds_alternative<ChainMsg>(m);
  }

  void on_deliver(ProcCtx& ctx, const Envelope& env) {
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
    if (std::holds_alternative<FallbackMsg>(env.msg)) {
      handle_fallback(ctx, env);
      return;
    }
    inbox_.push_back(env);
  }

  void on_round(ProcCtx& ctx, int absolute_round) {
    const int lr = absolute_round - base_round_;
    if (lr < 0) return;
    const int phases = ctx.cfg().t + 1;
    if (lr < 5 * phases) {
      const int phase = lr / 5 + 1;
      switch (lr % 5) {
        case 0:
          if (phase > 1) finish_phase(ctx, phase - 1);
          maybe_propose(ctx, phase);
          break;
        case 1:
          answer_propose(ctx, phase);
          break;
        case 2:
          leader_commit_step(ctx, phase);
          break;
        case 3:
          handle_commit_broadcast(ctx, phase);
          break;
        case 4:
          leader_finalize_step(ctx, phase);
          break;
      }
      return;
    }
    if (lr == 5 * phases) {
      finish_phase(ctx, phases);
      if (!decision_.decided()) {
        HelpReqMsg req;
        req.sig = ctx.sign(digest_help_req());
        ctx.broadcast(req);
      }
      return;
    }
    if (lr == 5 * phases + 1) {
      answer_help_requests(ctx);
      maybe_form_fallback_cert(ctx);
      return;
    }
    if (lr == 5 * phases + 2) {
      process_help_answers(ctx);
      return;
    }
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) {
    if (tag == kTimerFallbackStart) {
      if (machine_.started()) return;
      TraceEvent ev;
      ev.kind = EventKind::kFallbackStart;
      ctx.event(std::move(ev));
      machine_.start(ctx, ctx.cfg().fallback, fallback_input(ctx));
      return;
    }
    if (tag == kTimerFallbackRound || tag == kTimerOracleResult) {
      machine_.on_timer(ctx, tag, arg);
      if (machine_.result() && !fallback_applied_) {
        fallback_applied_ = true;
        Decision next =
            wba_finalize_decision(decision_, *machine_.result(), ctx.crypto(), ctx.predicate());
        if (next != decision_) set_decision(ctx, next, "fallback result");
      }
    }
  }

 private:
  int quorum(const ProcCtx& ctx) const { return quorum_size(ctx.cfg().n, ctx.cfg().t); }

  void set_decision(ProcCtx& ctx, Decision d, const std::string& why) {
    decision_ = std::move(d);
    ++transitions_;
    TraceEvent ev;
    ev.kind = EventKind::kDecision;
    ev.note = decision_.render() + " (" + why + ")";
    ctx.event(std::move(ev));
  }

  // Phase round 1: an undecided leader proposes its own initial value.
  void maybe_propose(ProcCtx& ctx, int phase) {
    if (phase_leader(phase, ctx.cfg().n) != ctx.self()) return;
    if (decision_.decided()) return;  // silent phase
    ProposeMsg m;
    m.phase = phase;
    m.value = *input_;
    m.sig = ctx.sign(digest_propose(m.value, phase));
    ctx.broadcast(m);
  }

  // Phase round 2: vote for a valid proposal when uncommitted, otherwise
  // report the held commit with its certificate.
  void answer_propose(ProcCtx& ctx, int phase) {
    const SignerId leader = phase_leader(phase, ctx.cfg().n);
    for (const Envelope& env : inbox_) {
      const auto* p = std::get_if<ProposeMsg>(&env.msg);
      if (!p || p->phase != phase || env.from != leader) continue;
      if (!commit_) {
        if (!ctx.predicate()(ctx.crypto(), p->value)) continue;
        VoteMsg vote;
        vote.phase = phase;
        vote.value = p->value;
        vote.sig = ctx.sign(digest_vote(vote.value, phase));
        ctx.send(leader, vote);
      } else {
        CommitMsg cm;
        cm.phase = phase;
        cm.value = *commit_;
        cm.cert = *commit_proof_;
        cm.sig = ctx.sign(digest_commit_msg(cm.value, cm.cert, phase));
        ctx.send(leader, cm);
      }
      return;  // one proposal per phase
    }
  }

  // Phase round 3, leader: relay the first reported commit certificate, or
  // batch a quorum of votes into a fresh one.
  void leader_commit_step(ProcCtx& ctx, int phase) {
    if (phase_leader(phase, ctx.cfg().n) != ctx.self()) return;
    const int q = quorum(ctx);
    for (const Envelope& env : inbox_) {
      const auto* cm = std::get_if<CommitMsg>(&env.msg);
      if (!cm || cm->phase != phase) continue;
      if (!verify_commit_cert(ctx.crypto(), cm->cert, cm->value, q)) continue;
      CommitMsg relay;
      relay.phase = phase;
      relay.value = cm->value;
      relay.cert = cm->cert;
      relay.sig = ctx.sign(digest_commit_msg(relay.value, relay.cert, phase));
      ctx.broadcast(relay);
      return;
    }
    // Tally distinct vote signers per value.
    std::map<std::string, std::vector<Sig>> votes;
    std::map<std::string, BaValue> vals;
    std::map<std::string, std::set<SignerId>> signers;
    for (const Envelope& env : inbox_) {
      const auto* v = std::get_if<VoteMsg>(&env.msg);
      if (!v || v->phase != phase) continue;
      std::string key = ba_encoding(v->value);
      if (signers[key].insert(v->sig.signer).second) {
        votes[key].push_back(v->sig);
        vals.emplace(key, v->value);
      }
    }
    for (const auto& [key, sigs] : votes) {
      if (static_cast<int>(sigs.size()) < q) continue;
      ThresholdCert cert = ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
      TraceEvent ev;
      ev.kind = EventKind::kCertFormed;
      ev.note = "commit cert, phase " + std::to_string(phase);
      ctx.event(std::move(ev));
      CommitMsg relay;
      relay.phase = phase;
      relay.value = vals.at(key);
      relay.cert = cert;
      relay.sig = ctx.sign(digest_commit_msg(relay.value, relay.cert, phase));
      ctx.broadcast(relay);
      return;
    }
  }

  // Phase round 4: on the leader's commit broadcast, sign the decide vote
  // only when the held commit allows it (first commit sticks; a conflicting
  // decide signature would void the finalize-uniqueness counting).
  void handle_commit_broadcast(ProcCtx& ctx, int phase) {
    const SignerId leader = phase_leader(phase, ctx.cfg().n);
    const int q = quorum(ctx);
    for (const Envelope& env : inbox_) {
      const auto* cm = std::get_if<CommitMsg>(&env.msg);
      if (!cm || cm->phase != phase || env.from != leader) continue;
      if (!verify_commit_cert(ctx.crypto(), cm->cert, cm->value, q)) continue;
      if (commit_ && !ba_equal(*commit_, cm->value)) return;
      DecideMsg d;
      d.phase = phase;
      d.value = cm->value;
      d.sig = ctx.sign(digest_decide(d.value, phase));
      ctx.send(leader, d);
      if (!commit_) {
        commit_ = cm->value;
        commit_proof_ = cm->cert;
        TraceEvent ev;
        ev.kind = EventKind::kCommit;
        ev.note = to_hex(ba_encoding(*commit_)) + ", phase " + std::to_string(phase);
        ctx.event(std::move(ev));
      }
      return;
    }
  }

  // Phase round 5, leader: batch a quorum of decide votes into the
  // finalize certificate.
  void leader_finalize_step(ProcCtx& ctx, int phase) {
    if (phase_leader(phase, ctx.cfg().n) != ctx.self()) return;
    const int q = quorum(ctx);
    std::map<std::string, std::vector<Sig>> decides;
    std::map<std::string, BaValue> vals;
    std::map<std::string, std::set<SignerId>> signers;
    for (const Envelope& env : inbox_) {
      const auto* d = std::get_if<DecideMsg>(&env.msg);
      if (!d || d->phase != phase) continue;
      std::string key = ba_encoding(d->value);
      if (signers[key].insert(d->sig.signer).second) {
        decides[key].push_back(d->sig);
        vals.emplace(key, d->value);
      }
    }
    for (const auto& [key, sigs] : decides) {
      if (static_cast<int>(sigs.size()) < q) continue;
      ThresholdCert cert = ctx.crypto().aggregate(sigs, q, ctx.cfg().n);
      TraceEvent ev;
      ev.kind = EventKind::kCertFormed;
      ev.note = "finalize cert, phase " + std::to_string(phase);
      ctx.event(std::move(ev));
      FinalizeMsg fin;
      fin.phase = phase;
      fin.value = vals.at(key);
      fin.cert = cert;
      fin.sig = ctx.sign(digest_finalize_msg(fin.value, fin.cert, phase));
      ctx.broadcast(fin);
      return;
    }
  }

  // End of a phase: adopt the finalize certificate's value as the decision.
  void finish_phase(ProcCtx& ctx, int phase) {
    const SignerId leader = phase_leader(phase, ctx.cfg().n);
    const int q = quorum(ctx);
    for (const Envelope& env : inbox_) {
      const auto* fin = std::get_if<FinalizeMsg>(&env.msg);
      if (!fin || fin->phase != phase || env.from != leader) continue;
      if (!verify_finalize_cert(ctx.crypto(), fin->cert, fin->value, q)) continue;
      if (decision_.is_undecided()) {
        decide_proof_ = fin->cert;
        set_decision(ctx, Decision::of(fin->value), "phase " + std::to_string(phase));
      }
      return;
    }
  }

  // Help round 2a: decided processes answer every requester directly.
  void answer_help_requests(ProcCtx& ctx) {
    if (!decision_.decided() || !decision_.has_value() || !decide_proof_) return;
    std::set<SignerId> answered;
    for (const Envelope& env : inbox_) {
      if (!std::holds_alternative<HelpReqMsg>(env.msg)) continue;
      if (env.from == ctx.self()) continue;
      if (!answered.insert(env.from).second) continue;
      HelpMsg help;
      help.value = decision_.value();
      help.proof = *decide_proof_;
      help.sig = ctx.sign(digest_help_msg(help.value, help.proof));
      ctx.send(env.from, help);
    }
  }

  // Help round 2b: t+1 distinct help requests prove that at least one
  // correct process is undecided; batch them and launch the fallback.
  void maybe_form_fallback_cert(ProcCtx& ctx) {
    const int t = ctx.cfg().t;
    std::set<SignerId> signers;
    std::vector<Sig> sigs;
    for (const Envelope& env : inbox_) {
      const auto* req = std::get_if<HelpReqMsg>(&env.msg);
      if (!req) continue;
      if (signers.insert(req->sig.signer).second) sigs.push_back(req->sig);
    }
    if (static_cast<int>(signers.size()) < t + 1) return;
    ThresholdCert cert = ctx.crypto().aggregate(sigs, t + 1, ctx.cfg().n);
    TraceEvent ev;
    ev.kind = EventKind::kFallbackCertFormed;
    ctx.event(std::move(ev));
    broadcast_fallback_once(ctx, cert);
  }

  // Help round 3: adopt a decided value from any valid answer.
  void process_help_answers(ProcCtx& ctx) {
    if (decision_.decided()) return;
    const int q = quorum(ctx);
    for (const Envelope& env : inbox_) {
      const auto* help = std::get_if<HelpMsg>(&env.msg);
      if (!help) continue;
      if (!ctx.predicate()(ctx.crypto(), help->value)) continue;
      if (!verify_finalize_cert(ctx.crypto(), help->proof, help->value, q)) continue;
      decide_proof_ = help->proof;
      set_decision(ctx, Decision::of(help->value), "help answer");
      return;
    }
  }

  // Fallback certificates act at delivery time: adopt a proven decision
  // claim while undecided, echo the certificate exactly once, and arm the
  // start timer 2*delta out. Immediate echo is what bounds the activation
  // skew across correct processes by delta.
  void handle_fallback(ProcCtx& ctx, const Envelope& env) {
    const auto& msg = std::get<FallbackMsg>(env.msg);
    if (machine_.started()) return;
    if (!verify_fallback_cert(ctx.crypto(), msg.cert, ctx.cfg().t)) {
      TraceEvent ev;
      ev.kind = EventKind::kDrop;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.note = "invalid fallback certificate";
      ctx.event(std::move(ev));
      return;
    }
    if (decision_.is_undecided() && msg.claim && msg.proof &&
        ctx.predicate()(ctx.crypto(), *msg.claim) &&
        verify_finalize_cert(ctx.crypto(), *msg.proof, *msg.claim, quorum(ctx))) {
      adopted_claim_ = std::make_pair(*msg.claim, *msg.proof);
    }
    broadcast_fallback_once(ctx, msg.cert);
  }

  void broadcast_fallback_once(ProcCtx& ctx, const ThresholdCert& cert) {
    if (fallback_start_ != kNever) return;
    // Arm before broadcasting: the broadcast self-delivers immediately and
    // would otherwise re-enter this path.
    fallback_start_ = ctx.now() + 2 * ctx.cfg().delta;
    ctx.set_timer(fallback_start_, kTimerFallbackStart, 0);
    TraceEvent ev;
    ev.kind = EventKind::kFallbackEcho;
    ctx.event(std::move(ev));
    FallbackMsg out;
    out.cert = cert;
    if (decision_.has_value() && decide_proof_) {
      out.claim = decision_.value();
      out.proof = *decide_proof_;
    } else if (adopted_claim_) {
      out.claim = adopted_claim_->first;
      out.proof = adopted_claim_->second;
    }
    out.sig = ctx.sign(digest_fallback_msg(out.cert, out.claim, out.proof));
    ctx.broadcast(out);
  }

  BaValue fallback_input(ProcCtx& ctx) const {
    (void)ctx;
    if (decision_.has_value()) return decision_.value();
    if (adopted_claim_) return adopted_claim_->first;
    return *input_;
  }

  int base_round_;
  std::optional<BaValue> input_;
  Decision decision_ = Decision::undecided();
  std::optional<ThresholdCert> decide_proof_;
  std::optional<BaValue> commit_;
  std::optional<ThresholdCert> commit_proof_;
  std::optional<std::pair<BaValue, ThresholdCert>> adopted_claim_;
  Ticks fallback_start_ = kNever;
  bool fallback_applied_ = false;
  int transitions_ = 0;
  std::vector<Envelope> inbox_;
  FallbackMachine machine_;
};

// Standalone weak agreement process.
class WeakBaProcess : public ProcessBase {
 public:
  explicit WeakBaProcess(BaValue input) : core_(0, BaValue(Value())) {
    core_.set_input(std::move(input));
  }

  void on_round(ProcCtx& ctx, int round) override { core_.on_round(ctx, round); }

  void on_deliver(ProcCtx& ctx, const Envelope& env) override {
    if (WeakBaCore::handles(env.msg)) {
      core_.on_deliver(ctx, env);
    } else {
      TraceEvent ev;
      ev.kind = EventKind::kDrop;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.note = "foreign message variant";
      ctx.event(std::move(ev));
    }
  }

  void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) override {
    core_.on_timer(ctx, tag, arg);
  }

  ProcessReport report() const override {
    ProcessReport rep;
    rep.decision = core_.decision();
    rep.decision_transitions = core_.transitions();
    rep.agreement_input = core_.input();
    return rep;
  }

 private:
  WeakBaCore core_;
};

class WeakBaFamily : public ProtocolFamily {
 public:
  explicit WeakBaFamily(RunConfig cfg) : cfg_(std::move(cfg)) {}
  // Tests may hand in evidence-bearing inputs directly.
  WeakBaFamily(RunConfig cfg, std::map<SignerId, BaValue> ba_inputs)
      : cfg_(std::move(cfg)), ba_inputs_(std::move(ba_inputs)), explicit_inputs_(true) {}

  Schedule schedule() const override { return Schedule::for_config(cfg_); }

  ValidityPredicate predicate() const override {
    switch (cfg_.predicate) {
      case PredicateKind::kAlwaysTrue:
        return make_always_true();
      case PredicateKind::kBbValid:
        return make_bb_valid(cfg_.sender, cfg_.t, cfg_.n);
      case PredicateKind::kSignedByQuorum:
        return make_signed_by_quorum(cfg_.t + 1);
    }
    return make_always_true();
  }

  // Materialize inputs that satisfy the configured predicate: plain values
  // as-is, sender-signed or quorum-certified wrappers for the evidence
  // predicates (lab constructions; the signatures are recorded pre-run).
  void setup(CryptoContext& crypto) override {
    if (explicit_inputs_) return;
    for (const auto& [id, v] : cfg_.inputs) {
      switch (cfg_.predicate) {
        case PredicateKind::kAlwaysTrue:
          ba_inputs_.emplace(id, v);
          break;
        case PredicateKind::kBbValid: {
          Digest d = digest_sender_value(v);
          Sig sig = crypto.is_corrupted(cfg_.sender)
                        ? *crypto.try_adversary_sign(cfg_.sender, d)
                        : crypto.sign(cfg_.sender, d);
          ba_inputs_.emplace(id, SenderSignedValue{v, sig});
          break;
        }
        case PredicateKind::kSignedByQuorum: {
          Digest d = digest_quorum_value(v);
          std::vector<Sig> sigs;
          for (SignerId s = 1; s <= cfg_.t + 1; ++s) {
            sigs.push_back(crypto.is_corrupted(s) ? *crypto.try_adversary_sign(s, d)
                                                  : crypto.sign(s, d));
          }
          ba_inputs_.emplace(id, CertValue{crypto.aggregate(sigs, cfg_.t + 1, cfg_.n)});
          break;
        }
      }
    }
  }

  std::unique_ptr<ProcessBase> make_process(SignerId id, CryptoContext&) const override {
    return std::make_unique<WeakBaProcess>(ba_inputs_.at(id));
  }

 private:
  RunConfig cfg_;
  std::map<SignerId, BaValue> ba_inputs_;
  bool explicit_inputs_ = false;
};

}  // namespace byzlab

#endif  // BYZLAB_WEAK_BA_HPP_
