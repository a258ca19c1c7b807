// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Command-line runner: single simulated runs with JSONL traces and CSV
// summaries, and grid sweeps with word-complexity fit reports.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "byzlab/byzlab.hpp"

namespace {

using namespace byzlab;

// Flat key=value config mirror of the run flags; explicit flags win.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

Protocol parse_protocol(const std::string& name) {
  if (name == "bb") return Protocol::kBb;
  if (name == "weak-ba") return Protocol::kWeakBa;
  if (name == "strong-ff") return Protocol::kStrongFf;
  throw ConfigError("unknown protocol: " + name);
}

FallbackKind parse_fallback(const std::string& name) {
  if (name == "reference") return FallbackKind::kReference;
  if (name == "oracle") return FallbackKind::kOracle;
  throw ConfigError("unknown fallback: " + name);
}

PredicateKind parse_predicate(const std::string& name) {
  if (name == "always-true") return PredicateKind::kAlwaysTrue;
  if (name == "bb-valid") return PredicateKind::kBbValid;
  if (name == "signed-by-quorum") return PredicateKind::kSignedByQuorum;
  throw ConfigError("unknown predicate: " + name);
}

void fill_inputs(RunConfig& cfg, const std::string& inputs_arg) {
  if (cfg.protocol == Protocol::kBb) return;
  if (cfg.protocol == Protocol::kStrongFf) {
    std::string bits = inputs_arg.empty() ? std::string(cfg.n, '1') : inputs_arg;
    if (static_cast<int>(bits.size()) != cfg.n) {
      throw ConfigError("--inputs bitstring must have n characters");
    }
    for (SignerId id = 1; id <= cfg.n; ++id) {
      char c = bits[static_cast<std::size_t>(id - 1)];
      if (c != '0' && c != '1') throw ConfigError("--inputs must be a 0/1 bitstring");
      cfg.inputs[id] = Value::binary(c == '1');
    }
    return;
  }
  // Agreement inputs: a single hex value for everyone, or one per process
  // comma-separated.
  std::vector<std::string> parts;
  std::string cur;
  for (char c : inputs_arg) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() || !parts.empty()) parts.push_back(cur);
  if (parts.empty()) parts.push_back("aa");
  if (parts.size() == 1) {
    for (SignerId id = 1; id <= cfg.n; ++id) cfg.inputs[id] = Value(from_hex(parts[0]));
  } else {
    if (static_cast<int>(parts.size()) != cfg.n) {
      throw ConfigError("--inputs needs 1 or n comma-separated hex values");
    }
    for (SignerId id = 1; id <= cfg.n; ++id) {
      cfg.inputs[id] = Value(from_hex(parts[static_cast<std::size_t>(id - 1)]));
    }
  }
}

int cmd_run(const RunConfig& cfg, const std::string& out_dir, const std::string& format) {
  RunResult rr = run_once(cfg);
  if (!out_dir.empty()) {
    std::string base = out_dir + "/" + protocol_name(cfg.protocol) + "_n" +
                       std::to_string(cfg.n) + "_f" + std::to_string(cfg.f) + "_" +
                       cfg.strategy + "_s" + std::to_string(cfg.seed);
    if (format == "jsonl") {
      write_file(base + ".jsonl", rr.trace.to_jsonl());
    } else {
      write_file(base + ".csv", csv_header() + "\n" +
                                    csv_row(rr.trace, rr.checks.agreement_ok,
                                            rr.checks.validity_ok,
                                            rr.checks.unique_finalize_ok) +
                                    "\n");
    }
  }
  std::cout << csv_header() << "\n"
            << csv_row(rr.trace, rr.checks.agreement_ok, rr.checks.validity_ok,
                       rr.checks.unique_finalize_ok)
            << "\n";
  for (const CheckResult& c : rr.checks.results) {
    std::cout << (c.ok ? "ok   " : "FAIL ") << c.name
              << (c.detail.empty() ? "" : " - " + c.detail) << "\n";
  }
  return rr.checks.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic lab for adaptive synchronous Byzantine agreement"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute one simulated run");
  std::string protocol = "weak-ba", strategy = "honest", fallback = "reference";
  std::string predicate = "always-true", value_hex = "aa", inputs_arg, out_dir, format = "jsonl";
  int n = 3, t = -1, f = 0, sender = 1;
  std::uint64_t seed = 1;
  byzlab::Ticks delta = 10;
  bool allow_general_n = false;
  run->add_option("--protocol", protocol, "bb | weak-ba | strong-ff");
  run->add_option("--n", n, "process count");
  run->add_option("--t", t, "corruption bound (default (n-1)/2)");
  run->add_option("--f", f, "actual corruptions");
  run->add_option("--strategy", strategy, "adversary strategy name");
  run->add_option("--seed", seed, "adversary seed");
  run->add_option("--delta", delta, "delay bound in ticks");
  run->add_option("--fallback", fallback, "reference | oracle");
  run->add_option("--predicate", predicate, "always-true | bb-valid | signed-by-quorum");
  run->add_option("--sender", sender, "designated sender (bb)");
  run->add_option("--value", value_hex, "sender value, hex (bb)");
  run->add_option("--inputs", inputs_arg, "inputs: hex[,hex...] or 0/1 bitstring");
  run->add_option("--out-dir", out_dir, "directory for trace output");
  run->add_option("--format", format, "jsonl | csv");
  run->add_flag("--allow-general-n", allow_general_n, "allow any n >= 2t+1");
  std::string config_path;
  run->add_option("--config", config_path, "flat key=value config file (flags win)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "strategy x seed x f grid with fit report");
  std::vector<int> ns{3, 5, 7, 9};
  int seeds = 20, jobs = 0;
  std::vector<std::string> sweep_protocols{"bb", "weak-ba", "strong-ff"};
  std::vector<std::string> sweep_strategies;
  std::string sweep_out, sweep_fallback = "reference";
  byzlab::Ticks sweep_delta = 10;
  sw->add_option("--n", ns, "grid of n values");
  sw->add_option("--seeds", seeds, "seeds per cell");
  sw->add_option("--protocol", sweep_protocols, "protocols");
  sw->add_option("--strategy", sweep_strategies, "strategy filter (default: all applicable)");
  sw->add_option("--delta", sweep_delta, "delay bound in ticks");
  sw->add_option("--fallback", sweep_fallback, "reference | oracle");
  sw->add_option("--out-dir", sweep_out, "directory for sweep.csv and report.txt");
  sw->add_option("--jobs", jobs, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!config_path.empty()) {
        auto file = load_config(config_path);
        auto apply_str = [&](const char* flag, const char* key, std::string& target) {
          if (run->count(flag) == 0 && file.count(key)) target = file.at(key);
        };
        auto apply_int = [&](const char* flag, const char* key, auto& target) {
          if (run->count(flag) == 0 && file.count(key)) {
            target = static_cast<std::decay_t<decltype(target)>>(std::stoll(file.at(key)));
          }
        };
        apply_str("--protocol", "protocol", protocol);
        apply_int("--n", "n", n);
        apply_int("--t", "t", t);
        apply_int("--f", "f", f);
        apply_str("--strategy", "strategy", strategy);
        apply_int("--seed", "seed", seed);
        apply_int("--delta", "delta", delta);
        apply_str("--fallback", "fallback", fallback);
        apply_str("--predicate", "predicate", predicate);
        apply_int("--sender", "sender", sender);
        apply_str("--value", "value", value_hex);
        apply_str("--inputs", "inputs", inputs_arg);
        apply_str("--out-dir", "out-dir", out_dir);
        apply_str("--format", "format", format);
        if (run->count("--allow-general-n") == 0 && file.count("allow-general-n")) {
          allow_general_n = file.at("allow-general-n") == "1" ||
                            file.at("allow-general-n") == "true";
        }
      }
      byzlab::RunConfig cfg;
      cfg.protocol = parse_protocol(protocol);
      cfg.n = n;
      cfg.t = t < 0 ? (n - 1) / 2 : t;
      cfg.f = f;
      cfg.strategy = strategy;
      cfg.seed = seed;
      cfg.delta = delta;
      cfg.fallback = parse_fallback(fallback);
      cfg.predicate = parse_predicate(predicate);
      cfg.sender = sender;
      cfg.allow_general_n = allow_general_n;
      cfg.value = byzlab::Value(byzlab::from_hex(value_hex));
      fill_inputs(cfg, inputs_arg);
      return cmd_run(cfg, out_dir, format);
    }
    byzlab::SweepOptions opts;
    opts.protocols.clear();
    for (const std::string& p : sweep_protocols) opts.protocols.push_back(parse_protocol(p));
    opts.ns = ns;
    opts.seeds = seeds;
    opts.strategies = sweep_strategies;
    opts.delta = sweep_delta;
    opts.fallback = parse_fallback(sweep_fallback);
    opts.jobs = jobs;
    byzlab::SweepReport report = byzlab::sweep(opts);
    if (!sweep_out.empty()) {
      byzlab::write_file(sweep_out + "/sweep.csv", report.csv());
      byzlab::write_file(sweep_out + "/report.txt", report.report_text());
    }
    std::cout << report.report_text();
    std::cout << report.csv_rows.size() << " runs, " << report.violations << " violations\n";
    return report.violations == 0 ? 0 : 2;
  } catch (const byzlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
