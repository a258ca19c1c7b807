// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace byzlab;
using namespace byzlab::testing;

TEST_CASE("word totals recomputed from events match the running counter") {
  // Hand counts: broadcast 6(n-1), fast path 4(n-1), agreement 5(n-1).
  {
    RunConfig cfg = cfg_of(Protocol::kBb, 5, 0, "honest");
    cfg.value = val("aa");
    RunResult rr = run_once(cfg);
    CHECK(words_of_trace(rr.trace) == 24);
    CHECK(rr.trace.words_total == 24);
  }
  {
    RunConfig cfg = cfg_of(Protocol::kStrongFf, 5, 0, "honest");
    bit_inputs(cfg, "11111");
    RunResult rr = run_once(cfg);
    CHECK(words_of_trace(rr.trace) == 16);
  }
  {
    // Worst case stays finite and consistent when everyone corrupted is
    // silent and the fallback runs.
    RunConfig cfg = cfg_of(Protocol::kWeakBa, 5, 2, "crash");
    uniform_inputs(cfg, val("aa"));
    RunResult rr = run_once(cfg);
    CHECK(rr.checks.all_ok());
    CHECK(words_of_trace(rr.trace) == rr.trace.words_total);
    CHECK(rr.trace.words_total > 0);
  }
}

TEST_CASE("least-squares fit on deterministic sweep data") {
  // Exactly linear synthetic points: slope and intercept recovered, no
  // residual.
  std::vector<std::pair<int, std::int64_t>> points{{0, 10}, {1, 17}, {2, 24}, {3, 31}};
  FitResult fit = adaptive_fit(points, 5);
  CHECK(fit.slope == Catch::Approx(7.0));
  CHECK(fit.intercept == Catch::Approx(10.0));
  CHECK(fit.r2 == Catch::Approx(1.0));
  // max over f of words / (n (f+1)) with n = 5: largest at f=0, 10/5.
  CHECK(fit.max_ratio == Catch::Approx(2.0));

  // Noisy data keeps r2 < 1.
  std::vector<std::pair<int, std::int64_t>> noisy{{0, 10}, {1, 30}, {2, 12}, {3, 35}};
  CHECK(adaptive_fit(noisy, 5).r2 < 1.0);

  // A single f value cannot be fit.
  std::vector<std::pair<int, std::int64_t>> degenerate{{1, 10}, {1, 10}, {1, 12}};
  CHECK_THROWS_AS(adaptive_fit(degenerate, 5), DegenerateSweep);

  // Constant data fits the constant line exactly.
  std::vector<std::pair<int, std::int64_t>> flat{{0, 10}, {1, 10}};
  CHECK(adaptive_fit(flat, 5).r2 == Catch::Approx(1.0));
}

TEST_CASE("per-phase attribution separates help and fallback traffic") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 5, 2, "partial-fallback-dealer");
  uniform_inputs(cfg, val("aa"));
  RunResult rr = run_once(cfg);
  CHECK(rr.trace.words_in("help") > 0);
  CHECK(words_fallback(rr.trace) > 0);
  std::int64_t phases = 0;
  for (int j = 1; j <= cfg.t + 1; ++j) phases += rr.trace.words_in("wba:" + std::to_string(j));
  CHECK(rr.trace.words_total ==
        phases + rr.trace.words_in("help") + words_fallback(rr.trace));
}

TEST_CASE("csv rows are stable and carry the distinct decisions") {
  RunConfig cfg = cfg_of(Protocol::kWeakBa, 3, 0, "honest");
  uniform_inputs(cfg, val("aa"));
  RunResult rr = run_once(cfg);
  std::string a = csv_row(rr.trace, true, true, true);
  std::string b = csv_row(rr.trace, true, true, true);
  CHECK(a == b);
  CHECK(a.rfind("weak-ba,3,1,0,honest,1,10,0,0,0,", 0) == 0);
  CHECK(csv_header().rfind("protocol,n,t,f,", 0) == 0);
}

TEST_CASE("sweep driver checks its criteria and orders rows deterministically") {
  SweepOptions opts;
  opts.protocols = {Protocol::kWeakBa};
  opts.ns = {3, 5};
  opts.seeds = 3;
  SweepReport a = sweep(opts);
  SweepReport b = sweep(opts);
  CHECK(a.violations == 0);
  CHECK(a.csv_rows == b.csv_rows);
  CHECK(a.csv() == b.csv());
  for (const std::string& line : a.criteria_lines) {
    INFO(line);
    CHECK(line.rfind("PASS", 0) == 0);
  }
}
