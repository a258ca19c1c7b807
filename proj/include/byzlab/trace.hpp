// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#ifndef BYZLAB_TRACE_HPP_
#define BYZLAB_TRACE_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/messages.hpp"

#include "json.hpp"

namespace byzlab {

enum class Protocol { kBb, kWeakBa, kStrongFf, kFallbackOnly };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kBb: return "bb";
    case Protocol::kWeakBa: return "weak-ba";
    case Protocol::kStrongFf: return "strong-ff";
    case Protocol::kFallbackOnly: return "fallback-only";
  }
  return "?";
}

enum class FallbackKind { kReference, kOracle };
enum class PredicateKind { kAlwaysTrue, kBbValid, kSignedByQuorum };

// One simulated run. n = 2t+1 unless allow_general_n; f ids are corrupted
// by the strategy; delta is the delay bound in ticks.
struct RunConfig {
  Protocol protocol = Protocol::kWeakBa;
  int n = 3;
  int t = 1;
  int f = 0;
  std::string strategy = "honest";
  std::uint64_t seed = 1;
  Ticks delta = 10;
  FallbackKind fallback = FallbackKind::kReference;
  PredicateKind predicate = PredicateKind::kAlwaysTrue;
  bool allow_general_n = false;

  // Inputs. Broadcast uses (sender, value); agreement protocols use the
  // per-process map (binary one-byte values for the fast path).
  SignerId sender = 1;
  Value value;
  std::map<SignerId, Value> inputs;

  void validate() const {
    if (n < 1 || t < 0 || f < 0) throw ConfigError("n, t, f must be non-negative (n >= 1)");
    if (!allow_general_n && n != 2 * t + 1) {
      throw ConfigError("n != 2t+1 (pass allow_general_n for n >= 2t+1)");
    }
    if (allow_general_n && n < 2 * t + 1) throw ConfigError("need n >= 2t+1");
    if (f > t) throw ConfigError("f exceeds the corruption bound t");
    if (protocol == Protocol::kBb && (sender < 1 || sender > n)) {
      throw ConfigError("sender out of range");
    }
    if (protocol == Protocol::kWeakBa || protocol == Protocol::kStrongFf ||
        protocol == Protocol::kFallbackOnly) {
      if (static_cast<int>(inputs.size()) != n) throw ConfigError("need one input per process");
      for (const auto& [id, v] : inputs) {
        if (id < 1 || id > n) throw ConfigError("input id out of range");
        if (protocol == Protocol::kStrongFf && !v.is_binary()) {
          throw ConfigError("binary protocol requires inputs in {0,1}");
        }
      }
    }
    if (delta < 2) throw ConfigError("delta must be at least 2 ticks");
  }
};

enum class EventKind {
  kSend,
  kDeliver,
  kDrop,
  kDecision,
  kCommit,
  kCertFormed,
  kFallbackCertFormed,
  kFallbackEcho,
  kFallbackStart,
  kFallbackInput,
  kFallbackResult,
  kWindowAccept,
  kForgeryAttempt,
  kNote,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kSend: return "send";
    case EventKind::kDeliver: return "deliver";
    case EventKind::kDrop: return "drop";
    case EventKind::kDecision: return "decision";
    case EventKind::kCommit: return "commit";
    case EventKind::kCertFormed: return "cert";
    case EventKind::kFallbackCertFormed: return "fallback_cert";
    case EventKind::kFallbackEcho: return "fallback_echo";
    case EventKind::kFallbackStart: return "fallback_start";
    case EventKind::kFallbackInput: return "fallback_input";
    case EventKind::kFallbackResult: return "fallback_result";
    case EventKind::kWindowAccept: return "window_accept";
    case EventKind::kForgeryAttempt: return "forgery_attempt";
    case EventKind::kNote: return "note";
  }
  return "?";
}

struct TraceEvent {
  Ticks time = 0;
  SignerId proc = 0;  // acting / receiving process (0 = adversary/engine)
  EventKind kind = EventKind::kNote;
  std::optional<ProtocolMessage> msg;
  SignerId from = 0;
  SignerId to = 0;
  int words = 0;
  std::string note;          // free-form detail (drop reason, decision, ...)
  Ticks aux_time = 0;        // window audits: local round start
  Ticks aux_time2 = 0;       // window audits: delivery time

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["time"] = time;
    j["proc"] = proc;
    j["kind"] = event_kind_name(kind);
    if (msg) j["msg"] = message_json(*msg);
    if (from) j["from"] = from;
    if (to) j["to"] = to;
    j["words"] = words;
    if (!note.empty()) j["note"] = note;
    if (kind == EventKind::kWindowAccept) {
      j["round_start"] = aux_time;
      j["deliver_at"] = aux_time2;
    }
    return j;
  }
};

// Complete record of one run: the event log plus the summary facts the
// assertion and metrics layers consume.
struct RunTrace {
  RunConfig config;
  std::set<SignerId> corrupted;
  std::vector<TraceEvent> events;

  std::int64_t words_total = 0;
  std::map<std::string, std::int64_t> words_by_phase;

  bool fallback_triggered = false;
  std::map<SignerId, Ticks> fallback_starts;  // correct processes only

  // Final per-process outcomes (correct processes only). For broadcast runs
  // bb_decisions holds the extracted value (nullopt = no-value default).
  std::map<SignerId, Decision> decisions;
  std::map<SignerId, std::optional<Value>> bb_decisions;
  std::map<SignerId, int> decision_transitions;
  std::map<SignerId, BaValue> agreement_inputs;  // effective initial values

  // Distinct predicate-valid values observed in the run: correct inputs
  // plus every value carried by any traced message.
  std::vector<BaValue> valid_values;

  // Ledger-verified evidence, extracted while the run's crypto context is
  // alive: distinct finalize-certificate values seen in any message, and
  // distinct "don't know" signer counts per vetting phase.
  std::vector<std::string> finalize_cert_values;
  std::map<int, int> idk_signers_by_phase;
  int quorum = 0;

  int forgery_attempts = 0;
  bool horizon_exceeded = false;

  bool is_correct(SignerId id) const { return corrupted.count(id) == 0; }

  std::vector<SignerId> correct_ids() const {
    std::vector<SignerId> out;
    for (SignerId id = 1; id <= config.n; ++id) {
      if (is_correct(id)) out.push_back(id);
    }
    return out;
  }

  std::int64_t words_in(const std::string& label) const {
    auto it = words_by_phase.find(label);
    return it == words_by_phase.end() ? 0 : it->second;
  }

  nlohmann::json summary_json() const {
    nlohmann::json j;
    j["protocol"] = protocol_name(config.protocol);
    j["n"] = config.n;
    j["t"] = config.t;
    j["f"] = config.f;
    j["strategy"] = config.strategy;
    j["seed"] = config.seed;
    j["delta"] = config.delta;
    j["corrupted"] = std::vector<SignerId>(corrupted.begin(), corrupted.end());
    j["words_total"] = words_total;
    j["words_by_phase"] = words_by_phase;
    j["fallback_triggered"] = fallback_triggered;
    nlohmann::json dec = nlohmann::json::object();
    for (const auto& [id, d] : decisions) dec[std::to_string(id)] = d.render();
    j["decisions"] = dec;
    if (config.protocol == Protocol::kBb) {
      nlohmann::json ext = nlohmann::json::object();
      for (const auto& [id, v] : bb_decisions) {
        ext[std::to_string(id)] = v ? nlohmann::json(to_hex(v->payload())) : nlohmann::json(nullptr);
      }
      j["bb_decisions"] = ext;
    }
    nlohmann::json vv = nlohmann::json::array();
    for (const BaValue& v : valid_values) vv.push_back(to_hex(ba_encoding(v)));
    j["valid_values"] = vv;
    j["forgery_attempts"] = forgery_attempts;
    j["horizon_exceeded"] = horizon_exceeded;
    return j;
  }

  // One JSON object per line: every event, then the summary.
  std::string to_jsonl() const {
    std::string out;
    for (const TraceEvent& ev : events) {
      out += ev.to_json().dump();
      out += "\n";
    }
    nlohmann::json tail;
    tail["summary"] = summary_json();
    out += tail.dump();
    out += "\n";
    return out;
  }
};

}  // namespace byzlab

#endif  // BYZLAB_TRACE_HPP_
