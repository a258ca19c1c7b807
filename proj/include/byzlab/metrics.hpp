// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Word accounting over completed traces and per-run classification: the
// complexity currency is words sent by correct processes, so adaptive
// claims reduce to sums over send events and a least-squares fit of words
// against the actual failure count.

#ifndef BYZLAB_METRICS_HPP_
#define BYZLAB_METRICS_HPP_

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/messages.hpp"
#include "byzlab/trace.hpp"

namespace byzlab {

class DegenerateSweep : public std::runtime_error {
 public:
  explicit DegenerateSweep(const std::string& what) : std::runtime_error(what) {}
};

// Recomputed from the event log (the engine keeps a running counter; the
// two must agree).
inline std::int64_t words_of_trace(const RunTrace& trace) {
  std::int64_t total = 0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.kind != EventKind::kSend) continue;
    if (!trace.is_correct(ev.from)) continue;
    total += ev.words;
  }
  return total;
}

inline std::int64_t words_fallback(const RunTrace& trace) {
  return trace.words_in("fallback-setup") + trace.words_in("fallback-run");
}

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double max_ratio = 0;  // max over points of words / (n * (f+1))
  double r2 = 1.0;
  int points = 0;
};

// Least-squares fit of words against f for one n. Requires two distinct f
// values; deterministic data makes the fit residual a direct linearity
// check.
inline FitResult adaptive_fit(const std::vector<std::pair<int, std::int64_t>>& sweep, int n) {
  std::set<int> fs;
  for (const auto& [f, words] : sweep) fs.insert(f);
  if (fs.size() < 2) throw DegenerateSweep("need at least 2 distinct f values");
  FitResult fit;
  fit.points = static_cast<int>(sweep.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(sweep.size());
  for (const auto& [f, words] : sweep) {
    const double x = f, y = static_cast<double>(words);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    fit.max_ratio = std::max(fit.max_ratio, y / (static_cast<double>(n) * (f + 1)));
  }
  const double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / m;
  for (const auto& [f, words] : sweep) {
    const double y = static_cast<double>(words);
    const double pred = fit.slope * f + fit.intercept;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean) * (y - mean);
  }
  fit.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

inline std::string csv_header() {
  return "protocol,n,t,f,strategy,seed,words_total,words_help,words_fallback,"
         "fallback_triggered,decided_values,agreement_ok,validity_ok,unique_finalize_ok";
}

inline std::string csv_row(const RunTrace& trace, bool agreement_ok, bool validity_ok,
                           bool unique_finalize_ok) {
  std::set<std::string> decided;
  for (const auto& [id, d] : trace.decisions) decided.insert(d.render());
  std::string values;
  for (const std::string& d : decided) {
    if (!values.empty()) values += ";";
    values += d;
  }
  std::string row;
  row += protocol_name(trace.config.protocol);
  row += "," + std::to_string(trace.config.n);
  row += "," + std::to_string(trace.config.t);
  row += "," + std::to_string(trace.config.f);
  row += "," + trace.config.strategy;
  row += "," + std::to_string(trace.config.seed);
  row += "," + std::to_string(trace.words_total);
  row += "," + std::to_string(trace.words_in("help"));
  row += "," + std::to_string(words_fallback(trace));
  row += std::string(",") + (trace.fallback_triggered ? "1" : "0");
  row += "," + values;
  row += std::string(",") + (agreement_ok ? "1" : "0");
  row += std::string(",") + (validity_ok ? "1" : "0");
  row += std::string(",") + (unique_finalize_ok ? "1" : "0");
  return row;
}

}  // namespace byzlab

#endif  // BYZLAB_METRICS_HPP_
