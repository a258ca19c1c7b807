// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Acceptance suite: ten criteria over the full grid (n in {3,5,7,9}, every
// applicable catalog strategy at every feasible failure count, 100 seeds
// per cell). Runs are evaluated as they stream; one pass/fail line prints
// per criterion.

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "test_support.hpp"

using namespace byzlab;
using namespace byzlab::testing;

namespace {

constexpr int kSeedsPerCell = 100;

struct GridStats {
  long total_runs = 0;
  long safety_violations = 0;

  long bb_runs = 0;
  long c1_violations = 0;

  long below_threshold_runs = 0;
  long c2_violations = 0;

  // (protocol, n, strategy) -> deduplicated (f, words) points.
  std::map<std::string, std::map<int, std::int64_t>> c3_points;
  long c3_bound_violations = 0;

  long wba_runs = 0;
  long c6_violations = 0;
  long c7_bot_runs = 0;
  long c7_violations = 0;

  long fallback_runs = 0;
  long c8_violations = 0;

  long ff_runs = 0;
  long c9_violations = 0;

  long c10_violations = 0;

  std::string sample_failure;
};

bool check_named(const RunChecks& checks, const std::string& name) {
  for (const CheckResult& c : checks.results) {
    if (c.name == name) return c.ok;
  }
  return true;
}

void absorb(GridStats& g, const RunConfig& cfg, const RunResult& rr) {
  const RunTrace& trace = rr.trace;
  ++g.total_runs;
  if (!rr.checks.all_ok()) {
    ++g.safety_violations;
    if (g.sample_failure.empty()) {
      g.sample_failure = std::string(protocol_name(cfg.protocol)) + " n=" +
                         std::to_string(cfg.n) + " f=" + std::to_string(cfg.f) + " " +
                         cfg.strategy + " seed=" + std::to_string(cfg.seed) + ": " +
                         rr.checks.first_failure();
    }
  }

  const bool agreementish =
      cfg.protocol == Protocol::kBb || cfg.protocol == Protocol::kWeakBa;

  if (cfg.protocol == Protocol::kBb) {
    ++g.bb_runs;
    if (!check_named(rr.checks, "agreement") || !check_named(rr.checks, "termination") ||
        !check_named(rr.checks, "validity")) {
      ++g.c1_violations;
    }
  }

  if (agreementish && below_fallback_threshold(cfg.n, cfg.t, cfg.f)) {
    ++g.below_threshold_runs;
    if (trace.fallback_triggered) ++g.c2_violations;
    const bool crashish = cfg.strategy == "crash" || cfg.strategy.rfind("crash@", 0) == 0;
    if (crashish) {
      std::string key =
          std::string(protocol_name(cfg.protocol)) + "/" + std::to_string(cfg.n);
      g.c3_points[key][cfg.f] = trace.words_total;
      if (trace.words_total >
          static_cast<std::int64_t>(kAdaptiveConstant) * cfg.n * (cfg.f + 1)) {
        ++g.c3_bound_violations;
      }
    }
  }

  if (cfg.protocol == Protocol::kWeakBa) {
    ++g.wba_runs;
    if (trace.finalize_cert_values.size() > 1) ++g.c6_violations;
    bool any_bot = false;
    for (const auto& [id, d] : trace.decisions) {
      if (d.is_bot()) any_bot = true;
    }
    if (any_bot) {
      ++g.c7_bot_runs;
      if (trace.valid_values.size() < 2) ++g.c7_violations;
    }
  }

  if (!trace.fallback_starts.empty()) {
    ++g.fallback_runs;
    if (!check_named(rr.checks, "fallback-skew") ||
        !check_named(rr.checks, "stretched-window")) {
      ++g.c8_violations;
    }
  }

  if (cfg.protocol == Protocol::kStrongFf) {
    ++g.ff_runs;
    // Uniform correct inputs by construction: the decision must be the
    // common input at every correct process.
    Value expected = cfg.inputs.at(1);
    for (SignerId id : trace.correct_ids()) {
      const Decision& d = trace.decisions.at(id);
      const auto* plain = d.has_value() ? std::get_if<Value>(&d.value()) : nullptr;
      if (!plain || !(*plain == expected)) {
        ++g.c9_violations;
        break;
      }
    }
  }

  for (const auto& [id, k] : trace.decision_transitions) {
    if (k > 1) {
      ++g.c10_violations;
      break;
    }
  }
}

const GridStats& grid() {
  static GridStats stats = [] {
    GridStats g;
    std::vector<RunConfig> jobs;
    for (Protocol proto : {Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf}) {
      for (int n : {3, 5, 7, 9}) {
        const int t = (n - 1) / 2;
        for (const StrategyInfo& info : strategy_catalog()) {
          if (std::find(info.protocols.begin(), info.protocols.end(), proto) ==
              info.protocols.end()) {
            continue;
          }
          for (int f : info.feasible_f(n, t)) {
            for (int seed = 1; seed <= kSeedsPerCell; ++seed) {
              RunConfig cfg = cfg_of(proto, n, f, info.name, seed);
              if (proto == Protocol::kStrongFf) {
                // Uniform correct inputs (strong unanimity is the claim).
                int bit = seed % 2;
                bit_inputs(cfg, std::string(static_cast<std::size_t>(n), bit ? '1' : '0'));
              } else {
                fill_sweep_inputs(cfg);
              }
              jobs.push_back(std::move(cfg));
            }
          }
        }
      }
    }
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        RunResult rr = run_once(jobs[i]);
        std::lock_guard<std::mutex> lock(mu);
        absorb(g, jobs[i], rr);
      }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < std::min(hw, 8u); ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return g;
  }();
  return stats;
}

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::cout << "ACCEPTANCE C" << criterion << " " << name << ": " << (pass ? "PASS" : "FAIL")
            << " (" << detail << ")\n";
}

}  // namespace

TEST_CASE("C1 broadcast validity, agreement and termination over the grid") {
  const GridStats& g = grid();
  bool pass = g.c1_violations == 0;
  report(1, "bb-validity-agreement-termination", pass,
         std::to_string(g.bb_runs) + " bb runs, " + std::to_string(g.c1_violations) +
             " violations");
  INFO(g.sample_failure);
  REQUIRE(g.c1_violations == 0);
  REQUIRE(g.bb_runs >= 3 * 4 * kSeedsPerCell);
}

TEST_CASE("C2 below the threshold the fallback never runs") {
  const GridStats& g = grid();
  bool pass = g.c2_violations == 0;
  report(2, "fallback-threshold", pass,
         std::to_string(g.below_threshold_runs) + " below-threshold runs, " +
             std::to_string(g.c2_violations) + " violations");
  REQUIRE(g.c2_violations == 0);
  REQUIRE(g.below_threshold_runs > 0);
}

TEST_CASE("C3 adaptive word complexity on crash sweeps") {
  const GridStats& g = grid();
  // The constant was fixed from the hand counts before running anything:
  // dissemination n-1, at most f+1 non-silent vetting phases at 3(n-1),
  // at most f+1 quorum phases at 5(n-1) plus commit replies, all under
  // 12 n (f+1).
  bool bound_ok = g.c3_bound_violations == 0;
  bool fit_ok = true;
  int fitted = 0;
  for (const auto& [key, by_f] : g.c3_points) {
    std::vector<std::pair<int, std::int64_t>> points(by_f.begin(), by_f.end());
    const int n = std::stoi(key.substr(key.find('/') + 1));
    if (points.size() < 2) {
      // n = 3 and n = 5 admit only f = 0 below the threshold; the fit is
      // degenerate there by the sweep contract.
      CHECK_THROWS_AS(adaptive_fit(points, n), DegenerateSweep);
      continue;
    }
    FitResult fit = adaptive_fit(points, n);
    ++fitted;
    if (fit.r2 < 0.99) fit_ok = false;
    if (fit.max_ratio > kAdaptiveConstant) fit_ok = false;
  }
  report(3, "adaptive-word-complexity", bound_ok && fit_ok,
         "bound c=" + std::to_string(kAdaptiveConstant) + ", " + std::to_string(fitted) +
             " fits with r2 >= 0.99");
  REQUIRE(bound_ok);
  REQUIRE(fit_ok);
  REQUIRE(fitted >= 4);  // bb and weak-ba at n = 7 and 9
}

TEST_CASE("C4 exact failure-free word counts") {
  bool pass = true;
  std::string detail;
  for (int n : {3, 5, 7, 9}) {
    {
      RunConfig cfg = cfg_of(Protocol::kStrongFf, n, 0, "honest");
      bit_inputs(cfg, std::string(static_cast<std::size_t>(n), '1'));
      RunResult rr = run_once(cfg);
      if (rr.trace.words_total != 4 * (n - 1)) pass = false;
      CHECK(rr.trace.words_total == 4 * (n - 1));
    }
    {
      RunConfig cfg = cfg_of(Protocol::kBb, n, 0, "honest");
      cfg.value = val("aa");
      RunResult rr = run_once(cfg);
      if (rr.trace.words_total != 6 * (n - 1)) pass = false;
      CHECK(rr.trace.words_total == 6 * (n - 1));
    }
    {
      RunConfig cfg = cfg_of(Protocol::kWeakBa, n, 0, "honest");
      uniform_inputs(cfg, val("aa"));
      RunResult rr = run_once(cfg);
      if (rr.trace.words_total != 5 * (n - 1)) pass = false;
      CHECK(rr.trace.words_total == 5 * (n - 1));
    }
  }
  report(4, "failure-free-exact-counts", pass, "4(n-1), 6(n-1), 5(n-1) across the grid");
}

TEST_CASE("C5 quorum intersection, exhaustively") {
  bool pass = true;
  long pairs = 0;
  for (int n : {3, 5, 7, 9}) {
    const int t = (n - 1) / 2;
    const int q = quorum_size(n, t);
    std::vector<unsigned> quorums;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) == q) quorums.push_back(mask);
    }
    for (unsigned a : quorums) {
      for (unsigned b : quorums) {
        ++pairs;
        if (__builtin_popcount(a & b) < t + 1) pass = false;
      }
    }
  }
  report(5, "quorum-intersection", pass, std::to_string(pairs) + " subset pairs");
  REQUIRE(pass);
}

TEST_CASE("C6 at most one finalize-certificate value per run") {
  const GridStats& g = grid();
  bool pass = g.c6_violations == 0;
  report(6, "unique-finalize", pass,
         std::to_string(g.wba_runs) + " weak-ba runs, " + std::to_string(g.c6_violations) +
             " violations");
  REQUIRE(g.c6_violations == 0);
}

TEST_CASE("C7 no-value decisions imply two valid values in the run") {
  const GridStats& g = grid();
  bool grid_pass = g.c7_violations == 0;
  // The grid rarely produces no-value decisions, so the canonical scenario
  // is driven explicitly: a silent corrupted sender-equivocator plus junk
  // chains for its slot under the broadcast predicate.
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 3, 1, "junk-chain");
  cfg.predicate = PredicateKind::kBbValid;
  class Family : public ProtocolFamily {
   public:
    explicit Family(RunConfig cfg) : cfg_(std::move(cfg)) {}
    Schedule schedule() const override { return Schedule::for_config(cfg_); }
    ValidityPredicate predicate() const override {
      return make_bb_valid(cfg_.sender, cfg_.t, cfg_.n);
    }
    void setup(CryptoContext& crypto) override {
      inputs_.emplace(1, BaValue(Value()));
      inputs_.emplace(2, SenderSignedValue{Value(from_hex("aa")),
                                           *crypto.try_adversary_sign(
                                               1, digest_sender_value(Value(from_hex("aa"))))});
      inputs_.emplace(3, SenderSignedValue{Value(from_hex("bb")),
                                           *crypto.try_adversary_sign(
                                               1, digest_sender_value(Value(from_hex("bb"))))});
    }
    std::unique_ptr<ProcessBase> make_process(SignerId id, CryptoContext&) const override {
      return std::make_unique<WeakBaProcess>(inputs_.at(id));
    }

   private:
    RunConfig cfg_;
    std::map<SignerId, BaValue> inputs_;
  };
  uniform_inputs(cfg, val("aa"));
  Family family(cfg);
  JunkChainStrategy strategy;
  RunResult rr = run_custom(cfg, family, strategy);
  bool scenario_pass = rr.checks.all_ok() && rr.trace.decisions.at(2).is_bot() &&
                       rr.trace.decisions.at(3).is_bot() && rr.trace.valid_values.size() >= 2;
  report(7, "unique-validity", grid_pass && scenario_pass,
         std::to_string(g.c7_bot_runs) + " grid runs decided no-value, " +
             std::to_string(g.c7_violations) + " violations; crafted scenario " +
             (scenario_pass ? "ok" : "failed"));
  REQUIRE(grid_pass);
  REQUIRE(scenario_pass);
}

TEST_CASE("C8 fallback start skew and stretched-round windows") {
  const GridStats& g = grid();
  bool pass = g.c8_violations == 0 && g.fallback_runs > 0;
  report(8, "fallback-skew-and-window", pass,
         std::to_string(g.fallback_runs) + " fallback runs, " +
             std::to_string(g.c8_violations) + " violations");
  REQUIRE(g.c8_violations == 0);
  REQUIRE(g.fallback_runs > 0);
}

TEST_CASE("C9 strong unanimity of the composed system") {
  const GridStats& g = grid();
  bool pass = g.c9_violations == 0;
  report(9, "strong-unanimity", pass,
         std::to_string(g.ff_runs) + " uniform-input runs, " + std::to_string(g.c9_violations) +
             " violations");
  REQUIRE(g.c9_violations == 0);
  REQUIRE(g.ff_runs >= 4 * kSeedsPerCell);
}

TEST_CASE("C10 every decision variable changes at most once") {
  const GridStats& g = grid();
  bool pass = g.c10_violations == 0;
  report(10, "single-decision", pass,
         std::to_string(g.total_runs) + " runs, " + std::to_string(g.c10_violations) +
             " violations");
  REQUIRE(g.c10_violations == 0);
  // The whole grid must also be clean under the full check battery.
  INFO(g.sample_failure);
  REQUIRE(g.safety_violations == 0);
}
