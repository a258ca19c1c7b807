// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Deterministic discrete-event synchronous network. Scripted protocol
// rounds are timers at multiples of delta; correct-to-correct envelopes
// take exactly delta, the adversary picks delays in (0, delta] for its own
// traffic. A timed mode (per-process timers) carries the stretched-round
// fallback executions. Event order is (time, deliveries-before-timers,
// recipient id, sequence), so a run is a pure function of its config.

#ifndef BYZLAB_NET_HPP_
#define BYZLAB_NET_HPP_

#include <any>
#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/crypto.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/trace.hpp"

namespace byzlab {
namespace detail {

// Values a message carries, in the evidence form the predicates expect.
struct ValueCollector {
  std::vector<BaValue> out;
  void operator()(const SenderValueMsg& x) { out.push_back(SenderSignedValue{x.value, x.sig}); }
  void operator()(const BbReplyMsg& x) { out.push_back(x.value); }
  void operator()(const BbPhaseValueMsg& x) { out.push_back(x.value); }
  void operator()(const ProposeMsg& x) { out.push_back(x.value); }
  void operator()(const VoteMsg& x) { out.push_back(x.value); }
  void operator()(const CommitMsg& x) { out.push_back(x.value); }
  void operator()(const DecideMsg& x) { out.push_back(x.value); }
  void operator()(const FinalizeMsg& x) { out.push_back(x.value); }
  void operator()(const HelpMsg& x) { out.push_back(x.value); }
  void operator()(const FallbackMsg& x) {
    if (x.claim) out.push_back(*x.claim);
  }
  void operator()(const FfInputMsg& x) { out.push_back(BaValue(x.value)); }
  void operator()(const FfProposeMsg& x) { out.push_back(BaValue(x.value)); }
  void operator()(const FfDecideSigMsg& x) { out.push_back(BaValue(x.value)); }
  void operator()(const FfDecideCertMsg& x) { out.push_back(BaValue(x.value)); }
  void operator()(const FfFallbackMsg& x) {
    if (x.claim) out.push_back(BaValue(*x.claim));
  }
  void operator()(const ChainMsg& x) { out.push_back(x.value); }
  template <typename T>
  void operator()(const T&) {}
};

}  // namespace detail

struct Envelope {
  SignerId from = 0;
  SignerId to = 0;
  ProtocolMessage msg;
  Ticks sent_at = 0;
  Ticks deliver_at = 0;
  std::uint64_t seq = 0;
};

// Stretched-round acceptance window: a round that begins locally at
// round_start accepts messages delivered in [round_start - delta,
// round_start + 2*delta].
inline bool deliver_window_check(Ticks recipient_round_start, Ticks deliver_at, Ticks delta) {
  return deliver_at >= recipient_round_start - delta &&
         deliver_at <= recipient_round_start + 2 * delta;
}

// Round indices of the protocol script, shared with adversary strategies.
struct Schedule {
  int script_rounds = 0;
  int bb_vetting_base = -1;  // broadcast runs: first vetting-phase round
  int bb_phases = 0;
  int wba_base = -1;  // first quorum-phase round
  int wba_phases = 0;
  int help_round1 = -1;
  int help_round2 = -1;
  int help_round3 = -1;

  static Schedule for_config(const RunConfig& cfg) {
    Schedule s;
    switch (cfg.protocol) {
      case Protocol::kWeakBa: {
        s.wba_base = 0;
        s.wba_phases = cfg.t + 1;
        break;
      }
      case Protocol::kBb: {
        s.bb_vetting_base = 1;
        s.bb_phases = cfg.n;
        s.wba_base = 1 + 3 * cfg.n;
        s.wba_phases = cfg.t + 1;
        break;
      }
      case Protocol::kStrongFf: {
        s.script_rounds = 5;
        return s;
      }
      case Protocol::kFallbackOnly: {
        s.script_rounds = 1;
        return s;
      }
    }
    s.help_round1 = s.wba_base + 5 * s.wba_phases;
    s.help_round2 = s.help_round1 + 1;
    s.help_round3 = s.help_round1 + 2;
    s.script_rounds = s.help_round3 + 1;
    return s;
  }
};

enum TimerTag : int {
  kTimerFallbackStart = 1,
  kTimerFallbackRound = 2,
  kTimerOracleResult = 3,
};

struct ProcessReport {
  Decision decision = Decision::undecided();
  std::optional<std::optional<Value>> bb_extracted;  // broadcast runs only
  int decision_transitions = 0;
  std::optional<BaValue> agreement_input;  // effective initial value
};

// Context handed to a protocol state machine. The engine implements it for
// correct processes; adversary strategies implement it to host "shadow"
// instances for corrupted ids that follow the protocol for a while.
class ProcCtx {
 public:
  virtual ~ProcCtx() = default;
  virtual SignerId self() const = 0;
  virtual Ticks now() const = 0;
  virtual const RunConfig& cfg() const = 0;
  virtual const Schedule& sched() const = 0;
  virtual const CryptoContext& crypto() const = 0;
  virtual const ValidityPredicate& predicate() const = 0;
  virtual Sig sign(const Digest& digest) = 0;
  virtual void send(SignerId to, ProtocolMessage m) = 0;
  virtual void broadcast(const ProtocolMessage& m) = 0;
  virtual void set_timer(Ticks at, int tag, std::int64_t arg) = 0;
  virtual void event(TraceEvent ev) = 0;
  virtual std::any& shared_state() = 0;

  void note(EventKind kind, std::string text) {
    TraceEvent ev;
    ev.kind = kind;
    ev.note = std::move(text);
    event(std::move(ev));
  }
};

class ProcessBase {
 public:
  virtual ~ProcessBase() = default;
  virtual void on_round(ProcCtx& ctx, int round) = 0;
  virtual void on_deliver(ProcCtx& ctx, const Envelope& env) = 0;
  virtual void on_timer(ProcCtx& ctx, int tag, std::int64_t arg) {
    (void)ctx, (void)tag, (void)arg;
  }
  virtual ProcessReport report() const = 0;
};

class ProtocolFamily {
 public:
  virtual ~ProtocolFamily() = default;
  virtual Schedule schedule() const = 0;
  virtual ValidityPredicate predicate() const = 0;
  // Pre-run input materialization (e.g. signing wrapped input values).
  virtual void setup(CryptoContext& crypto) { (void)crypto; }
  virtual std::unique_ptr<ProcessBase> make_process(SignerId id,
                                                    CryptoContext& crypto) const = 0;
};

// Adversary-side context: signing restricted to corrupted ids, sends carry
// an explicit delay in (0, delta].
class AdvCtx {
 public:
  virtual ~AdvCtx() = default;
  virtual Ticks now() const = 0;
  virtual const RunConfig& cfg() const = 0;
  virtual const Schedule& sched() const = 0;
  virtual CryptoContext& crypto() = 0;
  virtual Rng& rng() = 0;
  virtual const ProtocolFamily& family() const = 0;
  virtual const std::set<SignerId>& corrupted() const = 0;
  virtual void send(SignerId from, SignerId to, ProtocolMessage m, Ticks delay) = 0;
};

class StrategyIface {
 public:
  virtual ~StrategyIface() = default;
  virtual std::string name() const = 0;
  virtual std::set<SignerId> corrupt_choice(const RunConfig& cfg) const = 0;
  virtual void begin(const RunConfig& cfg, const ProtocolFamily& family,
                     CryptoContext& crypto) {
    (void)cfg, (void)family, (void)crypto;
  }
  virtual void on_round(AdvCtx& ctx, int round) { (void)ctx, (void)round; }
  virtual void on_deliver(AdvCtx& ctx, const Envelope& env) { (void)ctx, (void)env; }
  // Delay for a correct-to-corrupted envelope.
  virtual Ticks inbound_delay(const Envelope& env, Ticks delta, Rng& rng) {
    (void)env, (void)rng;
    return delta;
  }
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

class Simulation {
 public:
  Simulation(RunConfig cfg, ProtocolFamily& family, StrategyIface& strategy)
      : cfg_(std::move(cfg)),
        family_(family),
        strategy_(strategy),
        sched_(family.schedule()),
        pred_(family.predicate()),
        rng_(cfg_.seed),
        corrupted_(strategy.corrupt_choice(cfg_)),
        crypto_(cfg_.n, corrupted_) {
    if (static_cast<int>(corrupted_.size()) != cfg_.f) {
      throw ConfigError("strategy corrupted " + std::to_string(corrupted_.size()) +
                        " ids, config says f=" + std::to_string(cfg_.f));
    }
    trace_.config = cfg_;
    trace_.corrupted = corrupted_;
  }

  RunTrace run() {
    family_.setup(crypto_);
    strategy_.begin(cfg_, family_, crypto_);
    for (SignerId id = 1; id <= cfg_.n; ++id) {
      if (!corrupted_.count(id)) {
        processes_[id] = family_.make_process(id, crypto_);
      }
    }
    // Scripted round boundaries for every correct process, then the
    // adversary hook (sorted last within a boundary via who = n+1).
    for (int r = 0; r < sched_.script_rounds; ++r) {
      for (auto& [id, proc] : processes_) {
        push_round(static_cast<Ticks>(r) * cfg_.delta, id, r);
      }
      push_round(static_cast<Ticks>(r) * cfg_.delta, cfg_.n + 1, r);
    }
    const Ticks horizon = horizon_ticks();
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time > horizon) {
        trace_.horizon_exceeded = true;
        break;
      }
      now_ = ev.time;
      dispatch(ev);
    }
    finalize();
    return std::move(trace_);
  }

  // Visible to context shims.
  const RunConfig& config() const { return cfg_; }
  const Schedule& schedule() const { return sched_; }
  CryptoContext& crypto() { return crypto_; }
  Ticks now() const { return now_; }

 private:
  struct Event {
    Ticks time = 0;
    int cat = 0;  // 0 = delivery, 1 = round/timer
    SignerId who = 0;
    std::uint64_t seq = 0;
    // delivery payload
    std::optional<Envelope> env;
    // round / timer payload
    int round = -1;
    int timer_tag = 0;
    std::int64_t timer_arg = 0;

    // Min-queue order: time, deliveries before timers, recipient, FIFO.
    bool operator>(const Event& other) const {
      if (time != other.time) return time > other.time;
      if (cat != other.cat) return cat > other.cat;
      if (who != other.who) return who > other.who;
      return seq > other.seq;
    }
  };

  class EngineProcCtx : public ProcCtx {
   public:
    EngineProcCtx(Simulation& sim, SignerId self) : sim_(sim), self_(self) {}
    SignerId self() const override { return self_; }
    Ticks now() const override { return sim_.now_; }
    const RunConfig& cfg() const override { return sim_.cfg_; }
    const Schedule& sched() const override { return sim_.sched_; }
    const CryptoContext& crypto() const override { return sim_.crypto_; }
    const ValidityPredicate& predicate() const override { return sim_.pred_; }
    Sig sign(const Digest& digest) override { return sim_.crypto_.sign(self_, digest); }
    void send(SignerId to, ProtocolMessage m) override {
      sim_.send_from_correct(self_, to, std::move(m));
    }
    void broadcast(const ProtocolMessage& m) override {
      for (SignerId to = 1; to <= sim_.cfg_.n; ++to) {
        if (to != self_) sim_.send_from_correct(self_, to, m);
      }
      sim_.self_deliver(self_, m);
    }
    void set_timer(Ticks at, int tag, std::int64_t arg) override {
      sim_.push_timer(at, self_, tag, arg);
    }
    void event(TraceEvent ev) override {
      ev.time = sim_.now_;
      ev.proc = self_;
      sim_.record(std::move(ev));
    }
    std::any& shared_state() override { return sim_.shared_; }

   private:
    Simulation& sim_;
    SignerId self_;
  };

  class EngineAdvCtx : public AdvCtx {
   public:
    explicit EngineAdvCtx(Simulation& sim) : sim_(sim) {}
    Ticks now() const override { return sim_.now_; }
    const RunConfig& cfg() const override { return sim_.cfg_; }
    const Schedule& sched() const override { return sim_.sched_; }
    CryptoContext& crypto() override { return sim_.crypto_; }
    Rng& rng() override { return sim_.rng_; }
    const ProtocolFamily& family() const override { return sim_.family_; }
    const std::set<SignerId>& corrupted() const override { return sim_.corrupted_; }
    void send(SignerId from, SignerId to, ProtocolMessage m, Ticks delay) override {
      assert(sim_.corrupted_.count(from) > 0);
      if (delay < 1) delay = 1;
      if (delay > sim_.cfg_.delta) delay = sim_.cfg_.delta;
      if (to == from) return;
      if (to < 1 || to > sim_.cfg_.n) return;
      sim_.enqueue_envelope(from, to, std::move(m), delay);
    }

   private:
    Simulation& sim_;
  };

  void push_round(Ticks at, SignerId who, int round) {
    Event ev;
    ev.time = at;
    ev.cat = 1;
    ev.who = who;
    ev.seq = next_seq_++;
    ev.round = round;
    queue_.push(std::move(ev));
  }

  void push_timer(Ticks at, SignerId who, int tag, std::int64_t arg) {
    Event ev;
    ev.time = at;
    ev.cat = 1;
    ev.who = who;
    ev.seq = next_seq_++;
    ev.timer_tag = tag;
    ev.timer_arg = arg;
    queue_.push(std::move(ev));
  }

  // Send by a correct process: fixed delta delay to correct peers, the
  // strategy picks the delay (0, delta] into corrupted ones.
  void send_from_correct(SignerId from, SignerId to, ProtocolMessage m) {
    if (to == from) {
      self_deliver(from, m);
      return;
    }
    assert(to >= 1 && to <= cfg_.n);
    Ticks delay = cfg_.delta;
    if (corrupted_.count(to)) {
      Envelope probe{from, to, m, now_, 0, 0};
      delay = strategy_.inbound_delay(probe, cfg_.delta, rng_);
      if (delay < 1) delay = 1;
      if (delay > cfg_.delta) delay = cfg_.delta;
    }
    enqueue_envelope(from, to, std::move(m), delay);
  }

  void enqueue_envelope(SignerId from, SignerId to, ProtocolMessage m, Ticks delay) {
    Envelope env;
    env.from = from;
    env.to = to;
    env.msg = std::move(m);
    env.sent_at = now_;
    env.deliver_at = now_ + delay;
    env.seq = next_seq_++;

    int words = 0;
    if (!corrupted_.count(from)) {
      words = word_count(env.msg);
      trace_.words_total += words;
      trace_.words_by_phase[phase_label(env.msg)] += words;
    }
    TraceEvent ev;
    ev.time = now_;
    ev.proc = from;
    ev.kind = EventKind::kSend;
    ev.msg = env.msg;
    ev.from = from;
    ev.to = to;
    ev.words = words;
    ev.aux_time = env.deliver_at;
    record(std::move(ev));

    Event qe;
    qe.time = env.deliver_at;
    qe.cat = 0;
    qe.who = to;
    qe.seq = env.seq;
    qe.env = std::move(env);
    queue_.push(std::move(qe));
  }

  // Immediate, cost-free delivery to self.
  void self_deliver(SignerId id, const ProtocolMessage& m) {
    Envelope env;
    env.from = id;
    env.to = id;
    env.msg = m;
    env.sent_at = now_;
    env.deliver_at = now_;
    env.seq = next_seq_++;
    deliver_to_correct(env);
  }

  void deliver_to_correct(const Envelope& env) {
    auto it = processes_.find(env.to);
    if (it == processes_.end()) return;
    std::string key = dedupe_key(env.msg) + "@" + std::to_string(env.from);
    if (!seen_[env.to].insert(key).second) {
      TraceEvent ev;
      ev.time = now_;
      ev.proc = env.to;
      ev.kind = EventKind::kDrop;
      ev.msg = env.msg;
      ev.from = env.from;
      ev.to = env.to;
      ev.note = "duplicate";
      record(std::move(ev));
      return;
    }
    TraceEvent ev;
    ev.time = now_;
    ev.proc = env.to;
    ev.kind = EventKind::kDeliver;
    ev.msg = env.msg;
    ev.from = env.from;
    ev.to = env.to;
    record(std::move(ev));
    EngineProcCtx ctx(*this, env.to);
    it->second->on_deliver(ctx, env);
  }

  void dispatch(const Event& ev) {
    if (ev.cat == 0) {
      const Envelope& env = *ev.env;
      if (corrupted_.count(env.to)) {
        TraceEvent te;
        te.time = now_;
        te.proc = env.to;
        te.kind = EventKind::kDeliver;
        te.msg = env.msg;
        te.from = env.from;
        te.to = env.to;
        record(std::move(te));
        EngineAdvCtx ctx(*this);
        strategy_.on_deliver(ctx, env);
      } else {
        deliver_to_correct(env);
      }
      return;
    }
    if (ev.round >= 0) {
      if (ev.who == cfg_.n + 1) {
        EngineAdvCtx ctx(*this);
        strategy_.on_round(ctx, ev.round);
      } else if (auto it = processes_.find(ev.who); it != processes_.end()) {
        EngineProcCtx ctx(*this, ev.who);
        it->second->on_round(ctx, ev.round);
      }
      return;
    }
    if (auto it = processes_.find(ev.who); it != processes_.end()) {
      EngineProcCtx ctx(*this, ev.who);
      it->second->on_timer(ctx, ev.timer_tag, ev.timer_arg);
    }
  }

  void record(TraceEvent ev) {
    switch (ev.kind) {
      case EventKind::kFallbackStart:
        trace_.fallback_triggered = true;
        trace_.fallback_starts[ev.proc] = ev.time;
        break;
      default:
        break;
    }
    trace_.events.push_back(std::move(ev));
  }

  Ticks horizon_ticks() const {
    // Script, then fallback activation (< 3 rounds), the 2*delta window,
    // skew, t+1 stretched rounds plus resolution, and slack.
    int fallback_rounds = 2 * (cfg_.t + 2) + 5;
    return static_cast<Ticks>(sched_.script_rounds + fallback_rounds + 4) * cfg_.delta;
  }

  void finalize() {
    for (const auto& [id, proc] : processes_) {
      ProcessReport rep = proc->report();
      trace_.decisions.emplace(id, rep.decision);
      trace_.decision_transitions[id] = rep.decision_transitions;
      if (rep.bb_extracted) trace_.bb_decisions[id] = *rep.bb_extracted;
      if (rep.agreement_input) {
        trace_.agreement_inputs.emplace(id, *rep.agreement_input);
        consider_valid(*rep.agreement_input);
      }
    }
    trace_.quorum = quorum_size(cfg_.n, cfg_.t);
    std::set<std::string> finalize_values;
    for (const TraceEvent& ev : trace_.events) {
      if (!ev.msg) continue;
      for (const BaValue& v : carried_values(*ev.msg)) consider_valid(v);
      // Verified finalize certificates, wherever they travel.
      const BaValue* value = nullptr;
      const ThresholdCert* cert = nullptr;
      if (const auto* fin = std::get_if<FinalizeMsg>(&*ev.msg)) {
        value = &fin->value;
        cert = &fin->cert;
      } else if (const auto* help = std::get_if<HelpMsg>(&*ev.msg)) {
        value = &help->value;
        cert = &help->proof;
      } else if (const auto* fb = std::get_if<FallbackMsg>(&*ev.msg)) {
        if (fb->claim && fb->proof) {
          value = &*fb->claim;
          cert = &*fb->proof;
        }
      }
      if (value && cert && verify_finalize_cert(crypto_, *cert, *value, trace_.quorum)) {
        if (finalize_values.insert(ba_encoding(*value)).second) {
          trace_.finalize_cert_values.push_back(ba_encoding(*value));
        }
      }
    }
    if (cfg_.protocol == Protocol::kBb) {
      for (int phase = 1; phase <= cfg_.n; ++phase) {
        int count = crypto_.distinct_signers_on(digest_bb_idk(phase));
        if (count > 0) trace_.idk_signers_by_phase[phase] = count;
      }
    }
    trace_.forgery_attempts = crypto_.forgery_attempts();
  }

  void consider_valid(const BaValue& v) {
    if (!pred_(crypto_, v)) return;
    std::string enc = ba_encoding(v);
    if (valid_seen_.insert(enc).second) trace_.valid_values.push_back(v);
  }

  static std::vector<BaValue> carried_values(const ProtocolMessage& m) {
    detail::ValueCollector c;
    std::visit(c, m);
    return std::move(c.out);
  }

  RunConfig cfg_;
  ProtocolFamily& family_;
  StrategyIface& strategy_;
  Schedule sched_;
  ValidityPredicate pred_;
  Rng rng_;
  std::set<SignerId> corrupted_;
  CryptoContext crypto_;

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::map<SignerId, std::unique_ptr<ProcessBase>> processes_;
  std::map<SignerId, std::set<std::string>> seen_;
  std::uint64_t next_seq_ = 0;
  Ticks now_ = 0;
  std::any shared_;
  std::set<std::string> valid_seen_;
  RunTrace trace_;
};

}  // namespace byzlab

#endif  // BYZLAB_NET_HPP_
