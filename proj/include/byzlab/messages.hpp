// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Typed model of every wire message: broadcast dissemination and vetting
// phases, the quorum-certificate phases of weak agreement, the binary
// fast path, the help/fallback machinery, and the evidence chains of the
// reference fallback. Canonical encoding is length-prefixed field
// concatenation in declaration order; digests are these encodings.

#ifndef BYZLAB_MESSAGES_HPP_
#define BYZLAB_MESSAGES_HPP_

#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "byzlab/base.hpp"
#include "byzlab/crypto.hpp"

#include "json.hpp"

namespace byzlab {

// ---------------------------------------------------------------------------
// Canonical encoding primitives
// ---------------------------------------------------------------------------

class Encoder {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i64(std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

class Decoder {
 public:
  explicit Decoder(const std::string& bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    std::string b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }
  std::int64_t i64() {
    std::string b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return static_cast<std::int64_t>(v);
  }
  std::string str() { return take(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string take(std::size_t k) {
    if (pos_ + k > bytes_.size()) throw DecodeError("truncated encoding");
    std::string s = bytes_.substr(pos_, k);
    pos_ += k;
    return s;
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Agreement values
// ---------------------------------------------------------------------------

// A sender-signed value: the dissemination evidence form.
struct SenderSignedValue {
  Value value;
  Sig sig;  // over the sender-value payload of `value`

  friend bool operator==(const SenderSignedValue& a, const SenderSignedValue& b) {
    return a.value == b.value && a.sig == b.sig;
  }
};

// A certificate-backed value: the value *is* the aggregate (e.g. a t+1
// "don't know" certificate from a vetting phase).
struct CertValue {
  ThresholdCert cert;

  friend bool operator==(const CertValue& a, const CertValue& b) { return a.cert == b.cert; }
};

// The value type agreement instances run over. Binary agreement uses plain
// one-byte values; the broadcast reduction runs over signed/cert values.
using BaValue = std::variant<Value, SenderSignedValue, CertValue>;

inline void encode_value(Encoder& e, const Value& v) { e.str(v.payload()); }
inline Value decode_value(Decoder& d) { return Value(d.str()); }

inline void encode_sig(Encoder& e, const Sig& s) {
  e.str(s.digest.bytes);
  e.u32(static_cast<std::uint32_t>(s.signer));
}
inline Sig decode_sig(Decoder& d) {
  Sig s;
  s.digest.bytes = d.str();
  s.signer = static_cast<SignerId>(d.u32());
  return s;
}

inline void encode_cert(Encoder& e, const ThresholdCert& c) {
  e.str(c.digest.bytes);
  e.u32(static_cast<std::uint32_t>(c.signers.size()));
  for (SignerId id : c.signers) e.u32(static_cast<std::uint32_t>(id));
  e.u32(static_cast<std::uint32_t>(c.threshold));
  e.u32(static_cast<std::uint32_t>(c.scheme_n));
}
inline ThresholdCert decode_cert(Decoder& d) {
  ThresholdCert c;
  c.digest.bytes = d.str();
  std::uint32_t k = d.u32();
  for (std::uint32_t i = 0; i < k; ++i) c.signers.push_back(static_cast<SignerId>(d.u32()));
  c.threshold = static_cast<int>(d.u32());
  c.scheme_n = static_cast<int>(d.u32());
  return c;
}

inline void encode_ba(Encoder& e, const BaValue& v) {
  e.u8(static_cast<std::uint8_t>(v.index()));
  std::visit(
      [&](const auto& alt) {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Value>) {
          encode_value(e, alt);
        } else if constexpr (std::is_same_v<T, SenderSignedValue>) {
          encode_value(e, alt.value);
          encode_sig(e, alt.sig);
        } else {
          encode_cert(e, alt.cert);
        }
      },
      v);
}
inline BaValue decode_ba(Decoder& d) {
  switch (d.u8()) {
    case 0:
      return decode_value(d);
    case 1: {
      SenderSignedValue s;
      s.value = decode_value(d);
      s.sig = decode_sig(d);
      return s;
    }
    case 2: {
      CertValue c;
      c.cert = decode_cert(d);
      return c;
    }
    default:
      throw DecodeError("bad value tag");
  }
}

inline std::string ba_encoding(const BaValue& v) {
  Encoder e;
  encode_ba(e, v);
  return e.take();
}

inline bool ba_equal(const BaValue& a, const BaValue& b) {
  return ba_encoding(a) == ba_encoding(b);
}
// Shortlex over canonical encodings: the empty plain value is the minimum.
inline bool ba_less(const BaValue& a, const BaValue& b) {
  std::string ea = ba_encoding(a), eb = ba_encoding(b);
  if (ea.size() != eb.size()) return ea.size() < eb.size();
  return ea < eb;
}

// ---------------------------------------------------------------------------
// Signing payloads (what signatures and certificates are over)
// ---------------------------------------------------------------------------

enum class Payload : std::uint8_t {
  kSenderValue = 1,
  kBbHelpReq = 2,
  kBbIdk = 3,
  kPropose = 4,
  kVote = 5,
  kCommitRelay = 6,
  kDecide = 7,
  kFinalizeRelay = 8,
  kHelpReq = 9,
  kHelp = 10,
  kFallbackEcho = 11,
  kFfInput = 12,
  kFfProposeRelay = 13,
  kFfDecide = 14,
  kFfDecideCertRelay = 15,
  kFfFallback = 16,
  kChain = 17,
  kQuorumValue = 18,
};

inline Digest digest_sender_value(const Value& v) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kSenderValue));
  encode_value(e, v);
  return Digest{e.take()};
}
inline Digest digest_bb_help_req(int phase) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kBbHelpReq));
  e.u32(static_cast<std::uint32_t>(phase));
  return Digest{e.take()};
}
inline Digest digest_bb_idk(int phase) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kBbIdk));
  e.u32(static_cast<std::uint32_t>(phase));
  return Digest{e.take()};
}
inline Digest digest_propose(const BaValue& v, int phase) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kPropose));
  encode_ba(e, v);
  e.u32(static_cast<std::uint32_t>(phase));
  return Digest{e.take()};
}
inline Digest digest_vote(const BaValue& v, int phase) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kVote));
  encode_ba(e, v);
  e.u32(static_cast<std::uint32_t>(phase));
  return Digest{e.take()};
}
inline Digest digest_decide(const BaValue& v, int phase) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kDecide));
  encode_ba(e, v);
  e.u32(static_cast<std::uint32_t>(phase));
  return Digest{e.take()};
}
inline Digest digest_help_req() {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kHelpReq));
  return Digest{e.take()};
}
inline Digest digest_ff_input(const Value& v) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kFfInput));
  encode_value(e, v);
  return Digest{e.take()};
}
inline Digest digest_ff_decide(const Value& v) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kFfDecide));
  encode_value(e, v);
  return Digest{e.take()};
}
inline Digest digest_chain(SignerId slot, const BaValue& v) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(Payload::kChain));
  e.u32(static_cast<std::uint32_t>(slot));
  encode_ba(e, v);
  return Digest{e.take()};
}
// Outer signature of a relayed or compound message: the digest covers the
// full field list so a signature can never be replayed onto other fields.
inline Digest digest_compound(Payload tag, const std::string& field_encoding) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(tag));
  e.str(field_encoding);
  return Digest{e.take()};
}

inline Digest digest_commit_msg(const BaValue& v, const ThresholdCert& cert, int phase) {
  Encoder e;
  encode_ba(e, v);
  encode_cert(e, cert);
  e.u32(static_cast<std::uint32_t>(phase));
  return digest_compound(Payload::kCommitRelay, e.take());
}
inline Digest digest_finalize_msg(const BaValue& v, const ThresholdCert& cert, int phase) {
  Encoder e;
  encode_ba(e, v);
  encode_cert(e, cert);
  e.u32(static_cast<std::uint32_t>(phase));
  return digest_compound(Payload::kFinalizeRelay, e.take());
}
inline Digest digest_help_msg(const BaValue& v, const ThresholdCert& proof) {
  Encoder e;
  encode_ba(e, v);
  encode_cert(e, proof);
  return digest_compound(Payload::kHelp, e.take());
}
inline Digest digest_fallback_msg(const ThresholdCert& cert, const std::optional<BaValue>& claim,
                                  const std::optional<ThresholdCert>& proof) {
  Encoder e;
  encode_cert(e, cert);
  e.u8(claim.has_value() ? 1 : 0);
  if (claim) encode_ba(e, *claim);
  e.u8(proof.has_value() ? 1 : 0);
  if (proof) encode_cert(e, *proof);
  return digest_compound(Payload::kFallbackEcho, e.take());
}
inline Digest digest_ff_propose_msg(const Value& v, const ThresholdCert& cert) {
  Encoder e;
  encode_value(e, v);
  encode_cert(e, cert);
  return digest_compound(Payload::kFfProposeRelay, e.take());
}
inline Digest digest_ff_decide_cert_msg(const Value& v, const ThresholdCert& cert) {
  Encoder e;
  encode_value(e, v);
  encode_cert(e, cert);
  return digest_compound(Payload::kFfDecideCertRelay, e.take());
}
inline Digest digest_ff_fallback_msg(const std::optional<Value>& claim,
                                     const std::optional<ThresholdCert>& proof) {
  Encoder e;
  e.u8(claim.has_value() ? 1 : 0);
  if (claim) encode_value(e, *claim);
  e.u8(proof.has_value() ? 1 : 0);
  if (proof) encode_cert(e, *proof);
  return digest_compound(Payload::kFfFallback, e.take());
}
inline Digest digest_quorum_value(const Value& v) {
  Encoder e;
  encode_value(e, v);
  return digest_compound(Payload::kQuorumValue, e.take());
}

// Parsers for certificate digests. A certificate is only meaningful if its
// digest decodes as the expected payload shape.
inline std::optional<std::pair<BaValue, int>> parse_value_phase_digest(const Digest& d,
                                                                       Payload want) {
  try {
    Decoder dec(d.bytes);
    if (dec.u8() != static_cast<std::uint8_t>(want)) return std::nullopt;
    BaValue v = decode_ba(dec);
    int phase = static_cast<int>(dec.u32());
    if (!dec.done()) return std::nullopt;
    return std::make_pair(std::move(v), phase);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}
inline std::optional<int> parse_idk_digest(const Digest& d) {
  try {
    Decoder dec(d.bytes);
    if (dec.u8() != static_cast<std::uint8_t>(Payload::kBbIdk)) return std::nullopt;
    int phase = static_cast<int>(dec.u32());
    if (!dec.done()) return std::nullopt;
    return phase;
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Wire messages
// ---------------------------------------------------------------------------

// Dissemination round: the designated sender's signed value.
struct SenderValueMsg {
  static constexpr const char* kName = "sender_value";
  Value value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("sig", sig);
  }
};

// Vetting phase: leader asks everyone for help choosing an initial value.
struct BbHelpReqMsg {
  static constexpr const char* kName = "bb_help_req";
  int phase = 0;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("sig", sig);
  }
};

// Vetting phase: reply carrying the responder's current evidence-bearing
// value. The wrapper is unauthenticated; validity rests on the inner
// signature or certificate.
struct BbReplyMsg {
  static constexpr const char* kName = "bb_reply";
  int phase = 0;
  BaValue value;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
  }
};

// Vetting phase: signed "i don't know" reply.
struct BbIdkMsg {
  static constexpr const char* kName = "bb_idk";
  int phase = 0;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("sig", sig);
  }
};

// Vetting phase: the leader's broadcast of a predicate-valid value
// (sender-signed or t+1-cert-backed). Unauthenticated relay.
struct BbPhaseValueMsg {
  static constexpr const char* kName = "bb_phase_value";
  int phase = 0;
  BaValue value;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
  }
};

// Quorum phase round 1: leader proposal.
struct ProposeMsg {
  static constexpr const char* kName = "propose";
  int phase = 0;
  BaValue value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
    v("sig", sig);
  }
};

// Quorum phase round 2: vote for the leader's proposal.
struct VoteMsg {
  static constexpr const char* kName = "vote";
  int phase = 0;
  BaValue value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
    v("sig", sig);
  }
};

// A committed value with its quorum certificate: sent to the leader by a
// committed process in round 2, and broadcast by the leader in round 3.
struct CommitMsg {
  static constexpr const char* kName = "commit";
  int phase = 0;
  BaValue value;
  ThresholdCert cert;  // quorum of votes, possibly from an earlier phase
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
    v("cert", cert);
    v("sig", sig);
  }
};

// Quorum phase round 4: decide vote sent to the leader.
struct DecideMsg {
  static constexpr const char* kName = "decide";
  int phase = 0;
  BaValue value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
    v("sig", sig);
  }
};

// Quorum phase round 5: the finalize certificate broadcast.
struct FinalizeMsg {
  static constexpr const char* kName = "finalize";
  int phase = 0;
  BaValue value;
  ThresholdCert cert;  // quorum of decide votes for this phase
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("phase", phase);
    v("value", value);
    v("cert", cert);
    v("sig", sig);
  }
};

// Help round: broadcast by processes still undecided after the phases.
struct HelpReqMsg {
  static constexpr const char* kName = "help_req";
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("sig", sig);
  }
};

// Help round: a decided process's answer, with the finalize certificate.
struct HelpMsg {
  static constexpr const char* kName = "help";
  BaValue value;
  ThresholdCert proof;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("proof", proof);
    v("sig", sig);
  }
};

// Fallback activation: carries the t+1 help-request certificate plus the
// sender's decision claim and proof when it has one.
struct FallbackMsg {
  static constexpr const char* kName = "fallback";
  ThresholdCert cert;                  // t+1 help-request signatures
  std::optional<BaValue> claim;        // decision or adopted value, if any
  std::optional<ThresholdCert> proof;  // finalize certificate for the claim
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("cert", cert);
    v("claim", claim);
    v("proof", proof);
    v("sig", sig);
  }
};

// Binary fast path round 1: signed input sent to the leader.
struct FfInputMsg {
  static constexpr const char* kName = "ff_input";
  Value value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("sig", sig);
  }
};

// Binary fast path round 2: the t+1 propose certificate broadcast.
struct FfProposeMsg {
  static constexpr const char* kName = "ff_propose";
  Value value;
  ThresholdCert cert;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("cert", cert);
    v("sig", sig);
  }
};

// Binary fast path round 3: decide vote sent to the leader.
struct FfDecideSigMsg {
  static constexpr const char* kName = "ff_decide_sig";
  Value value;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("sig", sig);
  }
};

// Binary fast path round 4: the n-of-n decide certificate broadcast.
struct FfDecideCertMsg {
  static constexpr const char* kName = "ff_decide_cert";
  Value value;
  ThresholdCert cert;
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("value", value);
    v("cert", cert);
    v("sig", sig);
  }
};

// Binary fast path fallback trigger/echo.
struct FfFallbackMsg {
  static constexpr const char* kName = "ff_fallback";
  std::optional<Value> claim;
  std::optional<ThresholdCert> proof;  // n-of-n decide certificate
  Sig sig;
  template <class V>
  void visit(V&& v) {
    v("claim", claim);
    v("proof", proof);
    v("sig", sig);
  }
};

// Reference fallback: a grow-by-one evidence chain for `slot`'s value. The
// signatures all cover the (slot, value) statement; a chain is acceptable
// in relay round r only with >= r distinct signers, the first being the
// slot owner.
struct ChainMsg {
  static constexpr const char* kName = "chain";
  SignerId slot = 0;
  int round = 0;  // relay round this chain belongs to
  BaValue value;
  std::vector<Sig> sigs;
  template <class V>
  void visit(V&& v) {
    v("slot", slot);
    v("round", round);
    v("value", value);
    v("sigs", sigs);
  }
};

using ProtocolMessage =
    std::variant<SenderValueMsg, BbHelpReqMsg, BbReplyMsg, BbIdkMsg, BbPhaseValueMsg, ProposeMsg,
                 VoteMsg, CommitMsg, DecideMsg, FinalizeMsg, HelpReqMsg, HelpMsg, FallbackMsg,
                 FfInputMsg, FfProposeMsg, FfDecideSigMsg, FfDecideCertMsg, FfFallbackMsg,
                 ChainMsg>;

// ---------------------------------------------------------------------------
// Field visitors: encode, decode, JSON
// ---------------------------------------------------------------------------

namespace detail {

struct EncodeVisitor {
  Encoder& e;
  void operator()(const char*, int v) { e.u32(static_cast<std::uint32_t>(v)); }
  void operator()(const char*, const Value& v) { encode_value(e, v); }
  void operator()(const char*, const BaValue& v) { encode_ba(e, v); }
  void operator()(const char*, const Sig& v) { encode_sig(e, v); }
  void operator()(const char*, const ThresholdCert& v) { encode_cert(e, v); }
  void operator()(const char*, const std::vector<Sig>& v) {
    e.u32(static_cast<std::uint32_t>(v.size()));
    for (const Sig& s : v) encode_sig(e, s);
  }
  template <typename T>
  void operator()(const char*, const std::optional<T>& v) {
    e.u8(v.has_value() ? 1 : 0);
    if (v) (*this)("", *v);
  }
};

struct DecodeVisitor {
  Decoder& d;
  void operator()(const char*, int& v) { v = static_cast<int>(d.u32()); }
  void operator()(const char*, Value& v) { v = decode_value(d); }
  void operator()(const char*, BaValue& v) { v = decode_ba(d); }
  void operator()(const char*, Sig& v) { v = decode_sig(d); }
  void operator()(const char*, ThresholdCert& v) { v = decode_cert(d); }
  void operator()(const char*, std::vector<Sig>& v) {
    std::uint32_t k = d.u32();
    for (std::uint32_t i = 0; i < k; ++i) v.push_back(decode_sig(d));
  }
  template <typename T>
  void operator()(const char* name, std::optional<T>& v) {
    if (d.u8()) {
      T inner{};
      (*this)(name, inner);
      v = std::move(inner);
    } else {
      v = std::nullopt;
    }
  }
};

inline nlohmann::json json_of(int v) { return v; }
inline nlohmann::json json_of(const Value& v) { return to_hex(v.payload()); }
inline nlohmann::json json_of(const Sig& s) {
  return {{"signer", s.signer}, {"digest_hex", to_hex(s.digest.bytes)}};
}
inline nlohmann::json json_of(const ThresholdCert& c) {
  return {{"signers", c.signers},
          {"threshold", c.threshold},
          {"scheme_n", c.scheme_n},
          {"digest_hex", to_hex(c.digest.bytes)}};
}
inline nlohmann::json json_of(const BaValue& v) {
  return std::visit(
      [](const auto& alt) -> nlohmann::json {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Value>) {
          return {{"kind", "plain"}, {"value", json_of(alt)}};
        } else if constexpr (std::is_same_v<T, SenderSignedValue>) {
          return {{"kind", "sender_signed"}, {"value", json_of(alt.value)}, {"sig", json_of(alt.sig)}};
        } else {
          return {{"kind", "cert"}, {"cert", json_of(alt.cert)}};
        }
      },
      v);
}
inline nlohmann::json json_of(const std::vector<Sig>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Sig& s : v) arr.push_back(json_of(s));
  return arr;
}
template <typename T>
nlohmann::json json_of(const std::optional<T>& v) {
  if (!v) return nullptr;
  return json_of(*v);
}

struct JsonVisitor {
  nlohmann::json& out;
  template <typename T>
  void operator()(const char* name, const T& v) {
    out[name] = json_of(v);
  }
};

}  // namespace detail

// Canonical wire encoding: variant tag byte + fields in declaration order.
inline std::string encode_message(const ProtocolMessage& m) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(m.index()));
  ProtocolMessage copy = m;
  std::visit([&](auto& alt) { alt.visit(detail::EncodeVisitor{e}); }, copy);
  return e.take();
}

namespace detail {
template <std::size_t I = 0>
ProtocolMessage decode_alternative(std::size_t index, Decoder& d) {
  if constexpr (I >= std::variant_size_v<ProtocolMessage>) {
    throw DecodeError("bad message tag");
  } else {
    if (index == I) {
      std::variant_alternative_t<I, ProtocolMessage> alt{};
      alt.visit(DecodeVisitor{d});
      return alt;
    }
    return decode_alternative<I + 1>(index, d);
  }
}
}  // namespace detail

inline ProtocolMessage decode_message(const std::string& bytes) {
  Decoder d(bytes);
  std::size_t index = d.u8();
  ProtocolMessage m = detail::decode_alternative(index, d);
  if (!d.done()) throw DecodeError("trailing bytes");
  return m;
}

inline bool message_equal(const ProtocolMessage& a, const ProtocolMessage& b) {
  return encode_message(a) == encode_message(b);
}

inline const char* message_name(const ProtocolMessage& m) {
  return std::visit([](const auto& alt) { return std::decay_t<decltype(alt)>::kName; }, m);
}

template <typename T>
concept HasPhase = requires(T t) { t.phase; };

inline int message_phase(const ProtocolMessage& m) {
  return std::visit(
      [](const auto& alt) -> int {
        if constexpr (HasPhase<std::decay_t<decltype(alt)>>) return alt.phase;
        return -1;
      },
      m);
}

// Every scripted protocol message carries a bounded number of signatures,
// certificates and domain values, i.e. one word. The only unbounded
// message is the reference-fallback evidence chain, charged per signature.
inline int word_count(const ProtocolMessage& m) {
  if (const auto* chain = std::get_if<ChainMsg>(&m)) {
    return std::max<int>(1, static_cast<int>(chain->sigs.size()));
  }
  return 1;
}

// Cost-accounting bucket for a message: real phases by index, everything
// else to pseudo-phases.
inline std::string phase_label(const ProtocolMessage& m) {
  struct Labeler {
    std::string operator()(const SenderValueMsg&) { return "disseminate"; }
    std::string operator()(const BbHelpReqMsg& x) { return "bb:" + std::to_string(x.phase); }
    std::string operator()(const BbReplyMsg& x) { return "bb:" + std::to_string(x.phase); }
    std::string operator()(const BbIdkMsg& x) { return "bb:" + std::to_string(x.phase); }
    std::string operator()(const BbPhaseValueMsg& x) { return "bb:" + std::to_string(x.phase); }
    std::string operator()(const ProposeMsg& x) { return "wba:" + std::to_string(x.phase); }
    std::string operator()(const VoteMsg& x) { return "wba:" + std::to_string(x.phase); }
    std::string operator()(const CommitMsg& x) { return "wba:" + std::to_string(x.phase); }
    std::string operator()(const DecideMsg& x) { return "wba:" + std::to_string(x.phase); }
    std::string operator()(const FinalizeMsg& x) { return "wba:" + std::to_string(x.phase); }
    std::string operator()(const HelpReqMsg&) { return "help"; }
    std::string operator()(const HelpMsg&) { return "help"; }
    std::string operator()(const FallbackMsg&) { return "fallback-setup"; }
    std::string operator()(const FfInputMsg&) { return "ff"; }
    std::string operator()(const FfProposeMsg&) { return "ff"; }
    std::string operator()(const FfDecideSigMsg&) { return "ff"; }
    std::string operator()(const FfDecideCertMsg&) { return "ff"; }
    std::string operator()(const FfFallbackMsg&) { return "fallback-setup"; }
    std::string operator()(const ChainMsg&) { return "fallback-run"; }
  };
  return std::visit(Labeler{}, m);
}

namespace detail {
struct DedupeExtra {
  std::string operator()(const VoteMsg& x) const { return to_hex(ba_encoding(x.value)); }
  std::string operator()(const DecideMsg& x) const { return to_hex(ba_encoding(x.value)); }
  std::string operator()(const BbReplyMsg& x) const { return to_hex(ba_encoding(x.value)); }
  std::string operator()(const FfInputMsg& x) const { return to_hex(x.value.payload()); }
  std::string operator()(const FfDecideSigMsg& x) const { return to_hex(x.value.payload()); }
  std::string operator()(const ChainMsg& x) const {
    return std::to_string(x.slot) + ":" + std::to_string(x.round) + ":" +
           to_hex(ba_encoding(x.value));
  }
  template <typename T>
  std::string operator()(const T&) const {
    return "";
  }
};
}  // namespace detail

// Duplicate-suppression slot. A correct process handles at most one message
// per slot per sender; evidence messages that may legitimately differ per
// value (votes, inputs, chains) fold the value into the slot.
inline std::string dedupe_key(const ProtocolMessage& m) {
  std::string key = message_name(m);
  int phase = message_phase(m);
  if (phase >= 0) key += ":" + std::to_string(phase);
  std::string extra = std::visit(detail::DedupeExtra{}, m);
  if (!extra.empty()) key += ":" + extra;
  return key;
}

inline nlohmann::json message_json(const ProtocolMessage& m) {
  nlohmann::json out;
  out["variant"] = message_name(m);
  ProtocolMessage copy = m;
  std::visit([&](auto& alt) { alt.visit(detail::JsonVisitor{out}); }, copy);
  out["payload_hex"] = to_hex(encode_message(m));
  return out;
}

// ---------------------------------------------------------------------------
// Certificate verification against the run ledger
// ---------------------------------------------------------------------------

inline bool verify_idk_cert(const CryptoContext& ctx, const ThresholdCert& cert, int t,
                            int max_phase) {
  if (cert.threshold < t + 1) return false;
  auto phase = parse_idk_digest(cert.digest);
  if (!phase || *phase < 1 || *phase > max_phase) return false;
  return ctx.verify_cert(cert);
}

inline bool verify_commit_cert(const CryptoContext& ctx, const ThresholdCert& cert,
                               const BaValue& value, int quorum) {
  if (cert.threshold < quorum) return false;
  auto parsed = parse_value_phase_digest(cert.digest, Payload::kVote);
  if (!parsed || !ba_equal(parsed->first, value)) return false;
  return ctx.verify_cert(cert);
}

inline bool verify_finalize_cert(const CryptoContext& ctx, const ThresholdCert& cert,
                                 const BaValue& value, int quorum) {
  if (cert.threshold < quorum) return false;
  auto parsed = parse_value_phase_digest(cert.digest, Payload::kDecide);
  if (!parsed || !ba_equal(parsed->first, value)) return false;
  return ctx.verify_cert(cert);
}

inline bool verify_fallback_cert(const CryptoContext& ctx, const ThresholdCert& cert, int t) {
  if (cert.threshold < t + 1) return false;
  if (cert.digest != digest_help_req()) return false;
  return ctx.verify_cert(cert);
}

inline bool verify_ff_propose_cert(const CryptoContext& ctx, const ThresholdCert& cert,
                                   const Value& value, int t) {
  if (cert.threshold < t + 1) return false;
  if (cert.digest != digest_ff_input(value)) return false;
  return ctx.verify_cert(cert);
}

inline bool verify_ff_decide_cert(const CryptoContext& ctx, const ThresholdCert& cert,
                                  const Value& value, int n) {
  if (cert.threshold < n || static_cast<int>(cert.signers.size()) != n) return false;
  if (cert.digest != digest_ff_decide(value)) return false;
  return ctx.verify_cert(cert);
}

namespace detail {
struct OuterSignature {
  using Out = std::optional<std::pair<Sig, Digest>>;
  Out operator()(const SenderValueMsg& x) const {
    return std::make_pair(x.sig, digest_sender_value(x.value));
  }
  Out operator()(const BbHelpReqMsg& x) const {
    return std::make_pair(x.sig, digest_bb_help_req(x.phase));
  }
  Out operator()(const BbIdkMsg& x) const {
    return std::make_pair(x.sig, digest_bb_idk(x.phase));
  }
  Out operator()(const ProposeMsg& x) const {
    return std::make_pair(x.sig, digest_propose(x.value, x.phase));
  }
  Out operator()(const VoteMsg& x) const {
    return std::make_pair(x.sig, digest_vote(x.value, x.phase));
  }
  Out operator()(const CommitMsg& x) const {
    return std::make_pair(x.sig, digest_commit_msg(x.value, x.cert, x.phase));
  }
  Out operator()(const DecideMsg& x) const {
    return std::make_pair(x.sig, digest_decide(x.value, x.phase));
  }
  Out operator()(const FinalizeMsg& x) const {
    return std::make_pair(x.sig, digest_finalize_msg(x.value, x.cert, x.phase));
  }
  Out operator()(const HelpReqMsg& x) const { return std::make_pair(x.sig, digest_help_req()); }
  Out operator()(const HelpMsg& x) const {
    return std::make_pair(x.sig, digest_help_msg(x.value, x.proof));
  }
  Out operator()(const FallbackMsg& x) const {
    return std::make_pair(x.sig, digest_fallback_msg(x.cert, x.claim, x.proof));
  }
  Out operator()(const FfInputMsg& x) const {
    return std::make_pair(x.sig, digest_ff_input(x.value));
  }
  Out operator()(const FfProposeMsg& x) const {
    return std::make_pair(x.sig, digest_ff_propose_msg(x.value, x.cert));
  }
  Out operator()(const FfDecideSigMsg& x) const {
    return std::make_pair(x.sig, digest_ff_decide(x.value));
  }
  Out operator()(const FfDecideCertMsg& x) const {
    return std::make_pair(x.sig, digest_ff_decide_cert_msg(x.value, x.cert));
  }
  Out operator()(const FfFallbackMsg& x) const {
    return std::make_pair(x.sig, digest_ff_fallback_msg(x.claim, x.proof));
  }
  template <typename T>
  Out operator()(const T&) const {
    return std::nullopt;
  }
};
}  // namespace detail

// The authenticating signature a message carries, with the digest it must
// cover. Relay wrappers without one (vetting replies and relays, chains,
// which authenticate through their content) return nullopt.
inline std::optional<std::pair<Sig, Digest>> outer_signature(const ProtocolMessage& m) {
  return std::visit(detail::OuterSignature{}, m);
}

// Link-level sender is trustworthy (reliable authenticated links); the
// carried signature must belong to that sender and cover the fields.
inline bool verify_outer(const CryptoContext& ctx, SignerId link_from,
                         const ProtocolMessage& m) {
  auto outer = outer_signature(m);
  if (!outer) return true;
  const auto& [sig, want] = *outer;
  return sig.signer == link_from && sig.digest == want && ctx.verify_sig(sig);
}

// ---------------------------------------------------------------------------
// Validity predicates
// ---------------------------------------------------------------------------

// True iff the value is signed by the designated sender or carries a t+1
// "don't know" certificate. Identical at all processes; evidence checks
// stand in for public signature verification.
inline bool bb_valid(const CryptoContext& ctx, const BaValue& v, SignerId sender, int t,
                     int max_phase) {
  if (const auto* ss = std::get_if<SenderSignedValue>(&v)) {
    if (ss->sig.signer != sender) return false;
    if (ss->sig.digest != digest_sender_value(ss->value)) return false;
    return ctx.verify_sig(ss->sig);
  }
  if (const auto* cv = std::get_if<CertValue>(&v)) {
    return verify_idk_cert(ctx, cv->cert, t, max_phase);
  }
  return false;
}

struct ValidityPredicate {
  std::string name;
  std::function<bool(const CryptoContext&, const BaValue&)> check;

  bool operator()(const CryptoContext& ctx, const BaValue& v) const { return check(ctx, v); }
};

inline ValidityPredicate make_always_true() {
  return {"always-true", [](const CryptoContext&, const BaValue&) { return true; }};
}

inline ValidityPredicate make_bb_valid(SignerId sender, int t, int max_phase) {
  return {"bb-valid", [sender, t, max_phase](const CryptoContext& ctx, const BaValue& v) {
            return bb_valid(ctx, v, sender, t, max_phase);
          }};
}

// Cert-backed values with at least k distinct verified signers.
inline ValidityPredicate make_signed_by_quorum(int k) {
  return {"signed-by-quorum", [k](const CryptoContext& ctx, const BaValue& v) {
            const auto* cv = std::get_if<CertValue>(&v);
            if (!cv) return false;
            if (static_cast<int>(cv->cert.signers.size()) < k) return false;
            return ctx.verify_cert(cv->cert);
          }};
}

// ---------------------------------------------------------------------------
// Decision state: undecided / the default no-value outcome / a value
// ---------------------------------------------------------------------------

class Decision {
 public:
  static Decision undecided() { return Decision(State::kUndecided, std::nullopt); }
  static Decision bot() { return Decision(State::kBot, std::nullopt); }
  static Decision of(BaValue v) { return Decision(State::kValue, std::move(v)); }

  bool is_undecided() const { return state_ == State::kUndecided; }
  bool is_bot() const { return state_ == State::kBot; }
  bool has_value() const { return state_ == State::kValue; }
  bool decided() const { return state_ != State::kUndecided; }
  const BaValue& value() const { return *value_; }

  std::string render() const {
    if (is_undecided()) return "undecided";
    if (is_bot()) return "bot";
    return to_hex(ba_encoding(*value_));
  }

  friend bool operator==(const Decision& a, const Decision& b) {
    if (a.state_ != b.state_) return false;
    if (a.state_ != State::kValue) return true;
    return ba_equal(*a.value_, *b.value_);
  }
  friend bool operator!=(const Decision& a, const Decision& b) { return !(a == b); }

 private:
  enum class State { kUndecided, kBot, kValue };
  Decision(State s, std::optional<BaValue> v) : state_(s), value_(std::move(v)) {}
  State state_;
  std::optional<BaValue> value_;
};

}  // namespace byzlab

#endif  // BYZLAB_MESSAGES_HPP_
