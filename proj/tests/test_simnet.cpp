// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace byzlab;
using namespace byzlab::testing;

TEST_CASE("stretched-round delivery window") {
  // Round starting at 10*delta (delta = 10 ticks) accepts [9.5, 12]*delta.
  const Ticks delta = 10;
  CHECK(deliver_window_check(100, 95, delta));
  CHECK(deliver_window_check(100, 120, delta));        // boundary included
  CHECK_FALSE(deliver_window_check(100, 121, delta));  // past the boundary
  CHECK(deliver_window_check(100, 90, delta));
  CHECK_FALSE(deliver_window_check(100, 89, delta));
}

TEST_CASE("broadcast charges n-1 one-word envelopes to correct senders") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 5, 0, "honest");
  uniform_inputs(cfg, val("aa"));
  RunResult rr = run_once(cfg);
  // Phase 1 proposal: one broadcast from the leader = 4 envelopes, 4 words.
  int propose_sends = 0;
  std::int64_t propose_words = 0;
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind == EventKind::kSend && ev.msg && std::holds_alternative<ProposeMsg>(*ev.msg)) {
      ++propose_sends;
      propose_words += ev.words;
    }
  }
  CHECK(propose_sends == 4);
  CHECK(propose_words == 4);
}

TEST_CASE("byzantine senders create envelopes but are never charged") {
  RunConfig cfg = cfg_of(Protocol::kBb, 5, 1, "equivocating-sender", 3);
  cfg.value = val("aa");
  RunResult rr = run_once(cfg);
  int byz_sends = 0;
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind == EventKind::kSend && !rr.trace.is_correct(ev.from)) {
      ++byz_sends;
      CHECK(ev.words == 0);
    }
  }
  CHECK(byz_sends > 0);
  CHECK(rr.trace.words_in("disseminate") == 0);
}

TEST_CASE("identical configs produce byte-identical traces") {
  for (Protocol proto : {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf}) {
    RunConfig cfg = cfg_of(proto, 5, 1, "random-fuzzer", 77);
    cfg.value = val("ab");
    if (proto == Protocol::kStrongFf) {
      bit_inputs(cfg, "10110");
    } else {
      uniform_inputs(cfg, val("ab"));
    }
    RunResult a = run_once(cfg);
    RunResult b = run_once(cfg);
    INFO(protocol_name(proto));
    CHECK(a.trace.to_jsonl() == b.trace.to_jsonl());
  }
}

TEST_CASE("simple end-to-end runs") {
  // Binary fast path, all proposing 1: everyone decides 1, no fallback.
  {
    RunConfig cfg = cfg_of(Protocol::kStrongFf, 3, 0, "honest");
    bit_inputs(cfg, "111");
    RunResult rr = run_once(cfg);
    CHECK(rr.checks.all_ok());
    CHECK_FALSE(rr.trace.fallback_triggered);
    for (const auto& [id, d] : rr.trace.decisions) {
      REQUIRE(d.has_value());
      CHECK(std::get<Value>(d.value()).bit() == 1);
    }
  }
  // Broadcast with a correct sender: everyone extracts the sender's value.
  {
    RunConfig cfg = cfg_of(Protocol::kBb, 3, 0, "honest");
    cfg.value = val("cafe");
    RunResult rr = run_once(cfg);
    CHECK(rr.checks.all_ok());
    for (const auto& [id, v] : rr.trace.bb_decisions) {
      REQUIRE(v.has_value());
      CHECK(*v == val("cafe"));
    }
  }
}

TEST_CASE("duplicate messages are logged and suppressed") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 3, 1, "duplicate-sender");
  uniform_inputs(cfg, val("aa"));
  WeakBaFamily family(cfg);
  DuplicateSenderStrategy strategy;
  RunResult rr = run_custom(cfg, family, strategy);
  int drops = 0;
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind == EventKind::kDrop && ev.note == "duplicate") ++drops;
  }
  CHECK(drops == 1);
}

TEST_CASE("correct-to-correct delivery is reliable and within delta") {
  RunConfig cfg = cfg_of(Protocol::kBb, 5, 2, "crash@2", 5);
  cfg.value = val("01");
  RunResult rr = run_once(cfg);
  // Every correct send event is delivered (a matching deliver or duplicate
  // drop exists) within (0, delta].
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind != EventKind::kSend || !rr.trace.is_correct(ev.from)) continue;
    Ticks delay = ev.aux_time - ev.time;
    REQUIRE(delay >= 1);
    REQUIRE(delay <= cfg.delta);
  }
  for (const CheckResult& c : rr.checks.results) {
    INFO(c.name << " " << c.detail);
    CHECK(c.ok);
  }
}

TEST_CASE("config validation") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 5, 3, "crash");
  uniform_inputs(cfg, val("aa"));
  CHECK_THROWS_AS(run_once(cfg), ConfigError);  // f > t

  RunConfig bad_n = cfg_of(Protocol::kWeakBa, 4, 0, "honest");
  bad_n.t = 1;
  uniform_inputs(bad_n, val("aa"));
  CHECK_THROWS_AS(bad_n.validate(), ConfigError);  // n != 2t+1
  bad_n.allow_general_n = true;
  CHECK_NOTHROW(bad_n.validate());

  RunConfig nonbinary = cfg_of(Protocol::kStrongFf, 3, 0, "honest");
  uniform_inputs(nonbinary, val("aaaa"));
  CHECK_THROWS_AS(nonbinary.validate(), ConfigError);
}

TEST_CASE("general n >= 2t+1 configurations run") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 6, 0, "honest");
  cfg.t = 2;
  cfg.allow_general_n = true;
  uniform_inputs(cfg, val("aa"));
  RunResult rr = run_once(cfg);
  CHECK(rr.checks.all_ok());
}

namespace {

// A process that never decides and keeps re-arming a timer: the engine
// must cut the run at its horizon and report the liveness failure.
class StallProcess : public byzlab::ProcessBase {
 public:
  void on_round(byzlab::ProcCtx& ctx, int round) override {
    if (round == 0) ctx.set_timer(ctx.now() + ctx.cfg().delta, 99, 0);
  }
  void on_deliver(byzlab::ProcCtx&, const byzlab::Envelope&) override {}
  void on_timer(byzlab::ProcCtx& ctx, int, std::int64_t) override {
    ctx.set_timer(ctx.now() + ctx.cfg().delta, 99, 0);
  }
  byzlab::ProcessReport report() const override { return {}; }
};

class StallFamily : public byzlab::ProtocolFamily {
 public:
  explicit StallFamily(byzlab::RunConfig cfg) : cfg_(std::move(cfg)) {}
  byzlab::Schedule schedule() const override { return byzlab::Schedule::for_config(cfg_); }
  byzlab::ValidityPredicate predicate() const override { return byzlab::make_always_true(); }
  std::unique_ptr<byzlab::ProcessBase> make_process(byzlab::SignerId,
                                                    byzlab::CryptoContext&) const override {
    return std::make_unique<StallProcess>();
  }

 private:
  byzlab::RunConfig cfg_;
};

}  // namespace

TEST_CASE("a stalled implementation hits the horizon and fails liveness") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 3, 0, "honest");
  uniform_inputs(cfg, val("aa"));
  StallFamily family(cfg);
  HonestStrategy honest;
  RunResult rr = run_custom(cfg, family, honest);
  CHECK(rr.trace.horizon_exceeded);
  CHECK_FALSE(rr.checks.liveness_ok());
  CHECK(rr.checks.exit_code() == 3);
}
