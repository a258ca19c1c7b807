// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace byzlab;
using namespace byzlab::testing;

TEST_CASE("correct sender: one dissemination round, silent vetting, 6(n-1) words") {
  for (int n : {3, 5, 7, 9}) {
    RunConfig cfg = cfg_of(Protocol::kBb, n, 0, "honest");
    cfg.value = val("1234");
    RunResult rr = run_once(cfg);
    INFO("n=" << n);
    CHECK(rr.checks.all_ok());
    CHECK(rr.trace.words_total == 6 * (n - 1));
    CHECK(rr.trace.words_in("disseminate") == n - 1);
    for (int j = 1; j <= n; ++j) {
      CHECK(rr.trace.words_in("bb:" + std::to_string(j)) == 0);  // all vetting silent
    }
    for (const auto& [id, v] : rr.trace.bb_decisions) {
      REQUIRE(v.has_value());
      CHECK(*v == val("1234"));
    }
    // No "don't know" signature exists anywhere in the run.
    CHECK(rr.trace.idk_signers_by_phase.empty());
  }
}

TEST_CASE("silent sender: one vetting phase produces the t+1 idk certificate") {
  RunConfig cfg = cfg_of(Protocol::kBb, 5, 1, "silent-sender");
  cfg.value = val("77");
  RunResult rr = run_once(cfg);
  CHECK(rr.checks.all_ok());
  // Phase 1's leader is the (corrupted) sender: silent. Phase 2's correct
  // leader collects idk replies and relays the certificate; every later
  // correct-led phase is then silent.
  CHECK(rr.trace.words_in("bb:1") == 0);
  CHECK(rr.trace.words_in("bb:2") > 0);
  for (int j = 3; j <= 5; ++j) CHECK(rr.trace.words_in("bb:" + std::to_string(j)) == 0);
  bool idk_cert_broadcast = false;
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind != EventKind::kSend || !ev.msg) continue;
    if (const auto* pv = std::get_if<BbPhaseValueMsg>(&*ev.msg)) {
      const auto* cv = std::get_if<CertValue>(&pv->value);
      REQUIRE(cv != nullptr);
      CHECK(cv->cert.threshold == cfg.t + 1);
      idk_cert_broadcast = true;
    }
  }
  CHECK(idk_cert_broadcast);
  // Nobody can extract a sender value: everyone decides the no-value
  // default, together.
  for (const auto& [id, v] : rr.trace.bb_decisions) CHECK_FALSE(v.has_value());
}

TEST_CASE("equivocating sender: all correct processes still agree") {
  for (int n : {3, 5, 7}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunConfig cfg = cfg_of(Protocol::kBb, n, 1, "equivocating-sender", seed);
      cfg.value = val("10");
      RunResult rr = run_once(cfg);
      INFO("n=" << n << " seed=" << seed << " " << rr.checks.first_failure());
      CHECK(rr.checks.all_ok());
      // All extracted outcomes equal (possibly the no-value default).
      auto first = rr.trace.bb_decisions.begin()->second;
      for (const auto& [id, v] : rr.trace.bb_decisions) {
        CHECK(v.has_value() == first.has_value());
        if (v && first) CHECK(*v == *first);
      }
    }
  }
}

TEST_CASE("extraction accepts only sender-signed outcomes") {
  CryptoContext ctx(3, {});
  Value v = val("aa");
  Sig sender_sig = ctx.sign(1, digest_sender_value(v));
  CHECK(bb_decide(Decision::of(SenderSignedValue{v, sender_sig}), 1).value() == v);
  // A certificate-backed outcome or the default extracts to nothing.
  std::vector<Sig> sigs{ctx.sign(1, digest_bb_idk(2)), ctx.sign(2, digest_bb_idk(2))};
  CHECK_FALSE(bb_decide(Decision::of(CertValue{ctx.aggregate(sigs, 2, 3)}), 1).has_value());
  CHECK_FALSE(bb_decide(Decision::bot(), 1).has_value());
  CHECK_FALSE(bb_decide(Decision::undecided(), 1).has_value());
  // Signed by the wrong process: not a sender value.
  Sig other = ctx.sign(2, digest_sender_value(v));
  CHECK_FALSE(bb_decide(Decision::of(SenderSignedValue{v, other}), 1).has_value());
}

TEST_CASE("every correct process enters the agreement with a predicate-valid input") {
  // Includes the silent-sender case where inputs are idk certificates.
  for (const char* strategy : {"honest", "silent-sender", "crash", "equivocating-sender"}) {
    int f = std::string(strategy) == "honest" ? 0 : 1;
    RunConfig cfg = cfg_of(Protocol::kBb, 5, f, strategy, 2);
    cfg.value = val("42");
    RunResult rr = run_once(cfg);
    INFO(strategy);
    CHECK(rr.checks.all_ok());
    // valid_values was built by filtering through the bb predicate, so an
    // input that fails it would be missing from the set.
    std::set<std::string> valid;
    for (const BaValue& v : rr.trace.valid_values) valid.insert(ba_encoding(v));
    for (SignerId id : rr.trace.correct_ids()) {
      REQUIRE(rr.trace.agreement_inputs.count(id) == 1);
      CHECK(valid.count(ba_encoding(rr.trace.agreement_inputs.at(id))) == 1);
    }
  }
}

TEST_CASE("vetting phases under a crashed sender stay adaptive") {
  // f crashes with the sender among them: exactly one correct-led vetting
  // phase does work; the rest stay silent.
  RunConfig cfg = cfg_of(Protocol::kBb, 9, 2, "crash");
  cfg.value = val("31");
  RunResult rr = run_once(cfg);
  CHECK(rr.checks.all_ok());
  int noisy = 0;
  for (int j = 1; j <= 9; ++j) {
    if (rr.trace.words_in("bb:" + std::to_string(j)) > 0) ++noisy;
  }
  CHECK(noisy == 1);
  CHECK(rr.trace.words_total <= kAdaptiveConstant * cfg.n * (cfg.f + 1));
}

TEST_CASE("help-request spam on the embedded agreement stays linear in f") {
  RunConfig cfg = cfg_of(Protocol::kBb, 7, 2, "help-req-spam");
  cfg.value = val("05");
  RunResult rr = run_once(cfg);
  CHECK(rr.checks.all_ok());
  CHECK_FALSE(rr.trace.fallback_triggered);
  // Only corrupted processes requested help; each of the n-f correct
  // processes answers each requester once.
  CHECK(rr.trace.words_in("help") == (cfg.n - cfg.f) * cfg.f);
}

namespace {

// A corrupted first vetting leader that collects the idk replies, forms
// the t+1 certificate, but deals it to a single process. A later correct
// leader then sees one certificate-valued reply and too few fresh idk
// signatures, and must relay the certificate for everyone.
class IdkDealerStrategy : public StrategyIface {
 public:
  std::string name() const override { return "idk-dealer"; }

  std::set<SignerId> corrupt_choice(const RunConfig&) const override { return {1, 2}; }

  void on_round(AdvCtx& ctx, int round) override {
    if (round != ctx.sched().bb_vetting_base) {
      // Phase 1 round 1 is the only action round for the leader.
      if (round != ctx.sched().bb_vetting_base + 2) return;
      // Phase 1 round 3: batch the observed idk signatures and deal the
      // certificate to process 3 only.
      std::set<SignerId> signers;
      std::vector<Sig> sigs;
      for (const Envelope& env : observed_) {
        const auto* idk = std::get_if<BbIdkMsg>(&env.msg);
        if (!idk || idk->phase != 1) continue;
        if (idk->sig.digest != digest_bb_idk(1)) continue;
        if (signers.insert(idk->sig.signer).second) sigs.push_back(idk->sig);
      }
      if (static_cast<int>(signers.size()) < ctx.cfg().t + 1) return;
      BbPhaseValueMsg out;
      out.phase = 1;
      out.value = CertValue{ctx.crypto().aggregate(sigs, ctx.cfg().t + 1, ctx.cfg().n)};
      ctx.send(1, 3, out, ctx.cfg().delta);
      return;
    }
    BbHelpReqMsg req;
    req.phase = 1;
    req.sig = *ctx.crypto().try_adversary_sign(1, digest_bb_help_req(1));
    for (SignerId to = 1; to <= ctx.cfg().n; ++to) {
      if (!ctx.corrupted().count(to)) ctx.send(1, to, req, ctx.cfg().delta);
    }
  }

  void on_deliver(AdvCtx&, const Envelope& env) override { observed_.push_back(env); }

 private:
  std::vector<Envelope> observed_;
};

}  // namespace

TEST_CASE("a correct leader relays certificate-valued replies") {
  // Corrupted sender (silent) and corrupted first leader dealing its idk
  // certificate to process 3 only. Process 4's phase cannot gather t+1
  // fresh idk signatures (only 4 and 5 lack values, with the corrupted
  // pair silent), so it must relay 3's certificate; without that branch,
  // processes 4 and 5 would enter the agreement with no valid input.
  RunConfig cfg = cfg_of(Protocol::kBb, 5, 2, "idk-dealer");
  cfg.value = val("aa");
  BbFamily family(cfg);
  IdkDealerStrategy strategy;
  RunResult rr = run_custom(cfg, family, strategy);
  CHECK(rr.checks.all_ok());
  // Phase 4 is the relay phase: its leader broadcast a cert-backed value.
  bool relayed = false;
  for (const TraceEvent& ev : rr.trace.events) {
    if (ev.kind != EventKind::kSend || !ev.msg || !rr.trace.is_correct(ev.from)) continue;
    const auto* pv = std::get_if<BbPhaseValueMsg>(&*ev.msg);
    if (pv && pv->phase == 4 && std::holds_alternative<CertValue>(pv->value)) relayed = true;
  }
  CHECK(relayed);
  // All correct processes entered the agreement with the same certificate
  // value, and extraction yields the no-value default.
  for (SignerId id : rr.trace.correct_ids()) {
    CHECK(std::holds_alternative<CertValue>(rr.trace.agreement_inputs.at(id)));
    CHECK_FALSE(rr.trace.bb_decisions.at(id).has_value());
  }
}
