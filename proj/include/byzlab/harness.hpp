// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Experiment runner: single runs with a full safety-assertion battery,
// and strategy x seed x failure-count sweeps with word-complexity fits.
// Every assertion is evaluated on every run; a safety violation exits 2,
// a liveness violation 3, config errors 4.

#ifndef BYZLAB_HARNESS_HPP_
#define BYZLAB_HARNESS_HPP_

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "byzlab/adversary.hpp"
#include "byzlab/base.hpp"
#include "byzlab/bb.hpp"
#include "byzlab/metrics.hpp"
#include "byzlab/net.hpp"
#include "byzlab/strong_ff.hpp"
#include "byzlab/trace.hpp"
#include "byzlab/weak_ba.hpp"

namespace byzlab {

// Fixed in advance from the per-phase hand counts: a non-silent vetting
// phase costs at most 3(n-1) words, a quorum phase at most 5(n-1) plus
// commit replies, dissemination n-1; with at most f+1 non-silent phases of
// each kind below the fallback threshold this stays under 12 n (f+1).
inline constexpr int kAdaptiveConstant = 12;

struct CheckResult {
  std::string name;
  bool ok = true;
  bool is_safety = true;
  std::string detail;
};

struct RunChecks {
  std::vector<CheckResult> results;
  bool agreement_ok = true;
  bool validity_ok = true;
  bool unique_finalize_ok = true;

  bool safety_ok() const {
    for (const auto& r : results) {
      if (r.is_safety && !r.ok) return false;
    }
    return true;
  }
  bool liveness_ok() const {
    for (const auto& r : results) {
      if (!r.is_safety && !r.ok) return false;
    }
    return true;
  }
  bool all_ok() const { return safety_ok() && liveness_ok(); }
  int exit_code() const { return !safety_ok() ? 2 : (!liveness_ok() ? 3 : 0); }

  std::string first_failure() const {
    for (const auto& r : results) {
      if (!r.ok) return r.name + ": " + r.detail;
    }
    return "";
  }
};

namespace detail {

inline bool uniform_correct_inputs(const RunTrace& trace, Value* out) {
  bool first = true;
  Value v;
  for (SignerId id : trace.correct_ids()) {
    auto it = trace.config.inputs.find(id);
    if (it == trace.config.inputs.end()) return false;
    if (first) {
      v = it->second;
      first = false;
    } else if (!(v == it->second)) {
      return false;
    }
  }
  *out = v;
  return !first;
}

}  // namespace detail

inline RunChecks evaluate_trace(const RunTrace& trace) {
  RunChecks out;
  const RunConfig& cfg = trace.config;
  auto add = [&](std::string name, bool ok, bool is_safety, std::string detail = "") {
    out.results.push_back({std::move(name), ok, is_safety, std::move(detail)});
  };
  const auto correct = trace.correct_ids();
  const bool is_agreement = cfg.protocol == Protocol::kBb || cfg.protocol == Protocol::kWeakBa;

  // Termination: every correct process decided inside the horizon.
  {
    bool ok = !trace.horizon_exceeded;
    std::string detail;
    for (SignerId id : correct) {
      auto it = trace.decisions.find(id);
      if (it == trace.decisions.end() || it->second.is_undecided()) {
        ok = false;
        detail = "process " + std::to_string(id) + " undecided";
      }
    }
    if (trace.horizon_exceeded) detail = "horizon exceeded";
    add("termination", ok, /*safety=*/false, detail);
  }

  // Agreement: no two correct processes decide differently.
  {
    bool ok = true;
    for (std::size_t i = 1; i < correct.size(); ++i) {
      auto a = trace.decisions.find(correct[0]);
      auto b = trace.decisions.find(correct[i]);
      if (a == trace.decisions.end() || b == trace.decisions.end()) continue;
      if (a->second.decided() && b->second.decided() && a->second != b->second) ok = false;
    }
    if (cfg.protocol == Protocol::kBb) {
      for (std::size_t i = 1; i < trace.bb_decisions.size(); ++i) {
        auto a = trace.bb_decisions.begin();
        auto b = std::next(trace.bb_decisions.begin(), static_cast<long>(i));
        bool equal = (a->second.has_value() == b->second.has_value()) &&
                     (!a->second || *a->second == *b->second);
        if (!equal) ok = false;
      }
    }
    out.agreement_ok = ok;
    add("agreement", ok, true);
  }

  // Validity, per problem definition.
  {
    bool ok = true;
    std::string detail;
    if (cfg.protocol == Protocol::kBb) {
      if (trace.is_correct(cfg.sender)) {
        for (const auto& [id, v] : trace.bb_decisions) {
          if (!v || !(*v == cfg.value)) {
            ok = false;
            detail = "correct sender but process " + std::to_string(id) + " decided elsewhere";
          }
        }
      }
    } else if (cfg.protocol == Protocol::kWeakBa) {
      std::set<std::string> valid;
      for (const BaValue& v : trace.valid_values) valid.insert(ba_encoding(v));
      for (const auto& [id, d] : trace.decisions) {
        if (d.is_bot() && valid.size() < 2) {
          ok = false;
          detail = "no-value decision with fewer than two valid values in the run";
        }
        if (d.has_value() && valid.count(ba_encoding(d.value())) == 0) {
          ok = false;
          detail = "decision fails the validity predicate";
        }
      }
    } else if (cfg.protocol == Protocol::kStrongFf) {
      Value uniform;
      const bool is_uniform = detail::uniform_correct_inputs(trace, &uniform);
      for (const auto& [id, d] : trace.decisions) {
        if (!d.decided()) continue;
        const auto* plain = d.has_value() ? std::get_if<Value>(&d.value()) : nullptr;
        if (!plain || !plain->is_binary()) {
          ok = false;
          detail = "non-binary decision";
        } else if (is_uniform && !(*plain == uniform)) {
          ok = false;
          detail = "strong unanimity violated";
        }
      }
    }
    out.validity_ok = ok;
    add("validity", ok, true, detail);
  }

  // Decide at most once.
  {
    bool ok = true;
    for (const auto& [id, k] : trace.decision_transitions) {
      if (k > 1) ok = false;
    }
    add("single-decision", ok, true);
  }

  // At most one finalize-certificate value can be formed in a run.
  if (is_agreement) {
    bool ok = trace.finalize_cert_values.size() <= 1;
    out.unique_finalize_ok = ok;
    add("unique-finalize", ok, true,
        ok ? "" : std::to_string(trace.finalize_cert_values.size()) + " distinct values");
  }

  // Below the threshold the fallback never runs and nobody asks for help.
  if (is_agreement && below_fallback_threshold(cfg.n, cfg.t, cfg.f)) {
    add("fallback-threshold", !trace.fallback_triggered, true);
    bool early = true;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind == EventKind::kSend && trace.is_correct(ev.from) &&
          std::holds_alternative<HelpReqMsg>(*ev.msg)) {
        early = false;
      }
    }
    add("early-decision", early, true);
  }

  // Fallback activation: all correct processes start, within delta.
  {
    bool ok = true;
    std::string detail;
    if (!trace.fallback_starts.empty()) {
      if (trace.fallback_starts.size() != correct.size()) {
        ok = false;
        detail = "only " + std::to_string(trace.fallback_starts.size()) + " of " +
                 std::to_string(correct.size()) + " correct processes started";
      } else {
        Ticks lo = kNever, hi = 0;
        for (const auto& [id, at] : trace.fallback_starts) {
          lo = std::min(lo, at);
          hi = std::max(hi, at);
        }
        if (hi - lo > cfg.delta) {
          ok = false;
          detail = "skew " + std::to_string(hi - lo) + " > delta";
        }
      }
    }
    add("fallback-skew", ok, true, detail);
  }

  // Every processed stretched-round message honored its window.
  {
    bool ok = true;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind != EventKind::kWindowAccept) continue;
      if (!deliver_window_check(ev.aux_time, ev.aux_time2, cfg.delta)) ok = false;
    }
    add("stretched-window", ok, true);
  }

  // With a correct sender no t+1 "don't know" quorum can exist.
  if (cfg.protocol == Protocol::kBb && trace.is_correct(cfg.sender)) {
    bool ok = true;
    for (const auto& [phase, count] : trace.idk_signers_by_phase) {
      if (count > cfg.t) ok = false;
    }
    add("idk-absence", ok, true);
  }

  // Accounting invariants.
  {
    bool ok = true;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind == EventKind::kSend && !trace.is_correct(ev.from) && ev.words != 0) ok = false;
    }
    add("byzantine-words", ok, true);
    add("words-consistency", words_of_trace(trace) == trace.words_total, true);
  }

  // Synchrony: correct sends are delivered within (0, delta].
  {
    bool ok = true;
    for (const TraceEvent& ev : trace.events) {
      if (ev.kind != EventKind::kSend || !trace.is_correct(ev.from)) continue;
      Ticks delay = ev.aux_time - ev.time;
      if (delay < 1 || delay > cfg.delta) ok = false;
    }
    add("synchrony", ok, true);
  }

  // A phase with no initiating message carries no correct words; a phase
  // initiated by a correct leader pays for at least its broadcast.
  if (is_agreement) {
    bool ok = true;
    auto check_phase = [&](const std::string& label, bool initiated, bool correct_leader) {
      std::int64_t words = trace.words_in(label);
      if (!initiated && words != 0) ok = false;
      if (initiated && correct_leader && words < cfg.n - 1) ok = false;
    };
    const int wba_phases = cfg.t + 1;
    for (int j = 1; j <= wba_phases; ++j) {
      bool initiated = false;
      bool correct_leader = trace.is_correct(phase_leader(j, cfg.n));
      for (const TraceEvent& ev : trace.events) {
        if (ev.kind != EventKind::kSend) continue;
        const auto* p = ev.msg ? std::get_if<ProposeMsg>(&*ev.msg) : nullptr;
        if (p && p->phase == j && ev.from == phase_leader(j, cfg.n)) initiated = true;
      }
      check_phase("wba:" + std::to_string(j), initiated, correct_leader);
    }
    if (cfg.protocol == Protocol::kBb) {
      for (int j = 1; j <= cfg.n; ++j) {
        bool initiated = false;
        bool correct_leader = trace.is_correct(phase_leader(j, cfg.n));
        for (const TraceEvent& ev : trace.events) {
          if (ev.kind != EventKind::kSend) continue;
          const auto* p = ev.msg ? std::get_if<BbHelpReqMsg>(&*ev.msg) : nullptr;
          if (p && p->phase == j && ev.from == phase_leader(j, cfg.n)) initiated = true;
        }
        check_phase("bb:" + std::to_string(j), initiated, correct_leader);
      }
    }
    add("phase-silence", ok, true);
  }

  return out;
}

// ---------------------------------------------------------------------------
// Single runs
// ---------------------------------------------------------------------------

inline std::unique_ptr<ProtocolFamily> build_family(const RunConfig& cfg) {
  switch (cfg.protocol) {
    case Protocol::kBb:
      return std::make_unique<BbFamily>(cfg);
    case Protocol::kWeakBa:
      return std::make_unique<WeakBaFamily>(cfg);
    case Protocol::kStrongFf:
      return std::make_unique<StrongFfFamily>(cfg);
    case Protocol::kFallbackOnly:
      break;
  }
  throw ConfigError("protocol has no CLI family");
}

struct RunResult {
  RunTrace trace;
  RunChecks checks;
};

inline RunResult run_once(const RunConfig& cfg) {
  cfg.validate();
  auto family = build_family(cfg);
  auto strategy = make_strategy(cfg.strategy);
  Simulation sim(cfg, *family, *strategy);
  RunResult rr;
  rr.trace = sim.run();
  rr.checks = evaluate_trace(rr.trace);
  return rr;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepOptions {
  std::vector<Protocol> protocols{Protocol::kBb, Protocol::kWeakBa, Protocol::kStrongFf};
  std::vector<int> ns{3, 5, 7, 9};
  int seeds = 20;
  std::vector<std::string> strategies;  // empty: every applicable catalog entry
  Ticks delta = 10;
  FallbackKind fallback = FallbackKind::kReference;
  int jobs = 0;  // 0: pick from hardware
};

// Deterministic per-seed inputs mixing uniform, split and scattered
// assignments so sweeps exercise disagreement paths.
inline void fill_sweep_inputs(RunConfig& cfg) {
  static const char* pool = "abc";
  if (cfg.protocol == Protocol::kBb) {
    cfg.sender = 1;
    cfg.value = Value(std::string(1, static_cast<char>('a' + cfg.seed % 4)));
    return;
  }
  for (SignerId id = 1; id <= cfg.n; ++id) {
    if (cfg.protocol == Protocol::kStrongFf) {
      int bit = 0;
      switch (cfg.seed % 3) {
        case 0: bit = 1; break;
        case 1: bit = 0; break;
        default: bit = static_cast<int>((cfg.seed + id) % 2); break;
      }
      cfg.inputs[id] = Value::binary(bit);
    } else {
      char c = 'a';
      switch (cfg.seed % 3) {
        case 0: c = pool[cfg.seed % 3]; break;
        case 1: c = pool[id <= cfg.n / 2 ? 0 : 1]; break;
        default: c = pool[(cfg.seed + id) % 3]; break;
      }
      cfg.inputs[id] = Value(std::string(1, c));
    }
  }
}

struct SweepReport {
  std::vector<std::string> csv_rows;
  std::vector<std::string> fit_lines;
  std::vector<std::string> criteria_lines;
  int violations = 0;

  std::string csv() const {
    std::string out = csv_header() + "\n";
    for (const std::string& row : csv_rows) out += row + "\n";
    return out;
  }
  std::string report_text() const {
    std::string out;
    for (const std::string& line : fit_lines) out += line + "\n";
    for (const std::string& line : criteria_lines) out += line + "\n";
    return out;
  }
};

inline SweepReport sweep(const SweepOptions& opts) {
  // Enumerate jobs in CSV order: protocol, n, f, strategy name, seed.
  std::vector<const StrategyInfo*> by_name;
  for (const StrategyInfo& info : strategy_catalog()) by_name.push_back(&info);
  std::sort(by_name.begin(), by_name.end(),
            [](const StrategyInfo* a, const StrategyInfo* b) { return a->name < b->name; });
  std::vector<RunConfig> jobs;
  for (Protocol proto : opts.protocols) {
    for (int n : opts.ns) {
      const int t = (n - 1) / 2;
      for (int f = 0; f <= t; ++f) {
        for (const StrategyInfo* info_ptr : by_name) {
          const StrategyInfo& info = *info_ptr;
          if (!opts.strategies.empty() &&
              std::find(opts.strategies.begin(), opts.strategies.end(), info.name) ==
                  opts.strategies.end()) {
            continue;
          }
          if (std::find(info.protocols.begin(), info.protocols.end(), proto) ==
              info.protocols.end()) {
            continue;
          }
          auto feasible = info.feasible_f(n, t);
          if (std::find(feasible.begin(), feasible.end(), f) == feasible.end()) continue;
          for (int seed = 1; seed <= opts.seeds; ++seed) {
            RunConfig cfg;
            cfg.protocol = proto;
            cfg.n = n;
            cfg.t = t;
            cfg.f = f;
            cfg.strategy = info.name;
            cfg.seed = static_cast<std::uint64_t>(seed);
            cfg.delta = opts.delta;
            cfg.fallback = opts.fallback;
            fill_sweep_inputs(cfg);
            jobs.push_back(std::move(cfg));
          }
        }
      }
    }
  }

  std::vector<RunResult> results(jobs.size());
  {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::min(8u, std::max(1u, hw)));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        results[i] = run_once(jobs[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
  }

  SweepReport report;
  int threshold_violations = 0, safety_violations = 0, bound_violations = 0;
  // (protocol, n, strategy) -> (f, words) points for the adaptive fit.
  std::map<std::string, std::vector<std::pair<int, std::int64_t>>> fit_points;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunTrace& trace = results[i].trace;
    const RunChecks& checks = results[i].checks;
    report.csv_rows.push_back(
        csv_row(trace, checks.agreement_ok, checks.validity_ok, checks.unique_finalize_ok));
    if (!checks.all_ok()) {
      ++report.violations;
      ++safety_violations;
    }
    const RunConfig& cfg = trace.config;
    const bool crashish = cfg.strategy == "crash" || cfg.strategy.rfind("crash@", 0) == 0;
    const bool agreementish =
        cfg.protocol == Protocol::kBb || cfg.protocol == Protocol::kWeakBa;
    if (agreementish && below_fallback_threshold(cfg.n, cfg.t, cfg.f)) {
      if (trace.fallback_triggered) ++threshold_violations;
      if (crashish) {
        if (trace.words_total >
            static_cast<std::int64_t>(kAdaptiveConstant) * cfg.n * (cfg.f + 1)) {
          ++bound_violations;
        }
        std::string key = std::string(protocol_name(cfg.protocol)) + "/n=" +
                          std::to_string(cfg.n) + "/" + cfg.strategy;
        fit_points[key].push_back({cfg.f, trace.words_total});
      }
    }
  }
  bool fits_ok = true;
  for (const auto& [key, points] : fit_points) {
    std::set<int> fs;
    for (const auto& [f, w] : points) fs.insert(f);
    int n = 0;
    {
      auto pos = key.find("n=");
      n = std::stoi(key.substr(pos + 2));
    }
    if (fs.size() < 2) {
      report.fit_lines.push_back("fit " + key + ": degenerate (single f point)");
      continue;
    }
    FitResult fit = adaptive_fit(points, n);
    if (fit.r2 < 0.99) fits_ok = false;
    report.fit_lines.push_back("fit " + key + ": slope=" + std::to_string(fit.slope) +
                               " intercept=" + std::to_string(fit.intercept) +
                               " max_ratio=" + std::to_string(fit.max_ratio) +
                               " r2=" + std::to_string(fit.r2));
  }
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    report.criteria_lines.push_back((pass ? "PASS " : "FAIL ") + name +
                                    (detail.empty() ? "" : " (" + detail + ")"));
  };
  line("safety-and-termination", safety_violations == 0,
       std::to_string(results.size()) + " runs");
  line("fallback-threshold", threshold_violations == 0, "");
  line("adaptive-bound", bound_violations == 0,
       "c=" + std::to_string(kAdaptiveConstant));
  line("adaptive-fit", fits_ok, "linear fit r2 >= 0.99");
  return report;
}

}  // namespace byzlab

#endif  // BYZLAB_HARNESS_HPP_
