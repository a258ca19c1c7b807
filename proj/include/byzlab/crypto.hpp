// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

// Idealized signatures and threshold certificates. There is no real
// cryptography here: a digest is the canonical encoding of the signed
// payload itself (collision-free by construction), a signature is a
// (digest, signer) pair, and unforgeability is enforced by a per-run
// ledger of every sign invocation. Verification is a ledger lookup.

#ifndef BYZLAB_CRYPTO_HPP_
#define BYZLAB_CRYPTO_HPP_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "byzlab/base.hpp"

namespace byzlab {

// Canonical encoding of a message payload. Equal payloads produce equal
// digests and distinct payloads distinct digests, exactly.
struct Digest {
  std::string bytes;

  friend bool operator==(const Digest& a, const Digest& b) { return a.bytes == b.bytes; }
  friend bool operator!=(const Digest& a, const Digest& b) { return !(a == b); }
  friend bool operator<(const Digest& a, const Digest& b) { return a.bytes < b.bytes; }
};

struct Sig {
  Digest digest;
  SignerId signer = 0;

  friend bool operator==(const Sig& a, const Sig& b) {
    return a.signer == b.signer && a.digest == b.digest;
  }
  friend bool operator<(const Sig& a, const Sig& b) {
    if (a.digest != b.digest) return a.digest < b.digest;
    return a.signer < b.signer;
  }
};

// A (threshold, scheme_n) aggregate over one digest. Signer identities are
// retained for trace auditing; the aggregate still costs one word.
struct ThresholdCert {
  Digest digest;
  std::vector<SignerId> signers;  // sorted, distinct
  int threshold = 0;
  int scheme_n = 0;

  friend bool operator==(const ThresholdCert& a, const ThresholdCert& b) {
    return a.digest == b.digest && a.signers == b.signers && a.threshold == b.threshold &&
           a.scheme_n == b.scheme_n;
  }
};

class AggregateError : public std::runtime_error {
 public:
  enum class Kind { kInsufficientSigners, kMixedDigests };
  AggregateError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// One word per signature, per aggregate, and per domain value. Phase
// indices and message tags ride inside a word for free.
inline int word_cost(const Sig&) { return 1; }
inline int word_cost(const ThresholdCert&) { return 1; }
inline int word_cost(const Value&) { return 1; }

// Per-run signing authority and ledger. Owned by one simulation; distinct
// simulations never share a context.
class CryptoContext {
 public:
  CryptoContext(int n, std::set<SignerId> corrupted)
      : n_(n), corrupted_(std::move(corrupted)) {}

  bool is_corrupted(SignerId id) const { return corrupted_.count(id) > 0; }
  const std::set<SignerId>& corrupted() const { return corrupted_; }
  int n() const { return n_; }

  // Signing path for a correct process acting for itself. The simulator
  // binds the id; corrupted ids must go through try_adversary_sign.
  Sig sign(SignerId id, const Digest& digest) {
    if (is_corrupted(id)) {
      throw std::logic_error("correct-path sign invoked for a corrupted id");
    }
    return record(id, digest);
  }

  // Adversary signing: succeeds only for corrupted ids. A refusal is a
  // counted forgery attempt and produces no signature.
  std::optional<Sig> try_adversary_sign(SignerId id, const Digest& digest) {
    if (!is_corrupted(id)) {
      ++forgery_attempts_;
      return std::nullopt;
    }
    return record(id, digest);
  }

  // Batches >= k distinct-signer signatures over one digest into a cert
  // carrying the full distinct-signer subset.
  ThresholdCert aggregate(const std::vector<Sig>& sigs, int k, int scheme_n) const {
    if (sigs.empty()) {
      throw AggregateError(AggregateError::Kind::kInsufficientSigners, "no signatures");
    }
    const Digest& digest = sigs.front().digest;
    std::set<SignerId> signers;
    for (const Sig& s : sigs) {
      if (s.digest != digest) {
        throw AggregateError(AggregateError::Kind::kMixedDigests,
                             "signatures cover more than one digest");
      }
      signers.insert(s.signer);
    }
    if (static_cast<int>(signers.size()) < k) {
      throw AggregateError(AggregateError::Kind::kInsufficientSigners,
                           "fewer than k distinct signers");
    }
    ThresholdCert cert;
    cert.digest = digest;
    cert.signers.assign(signers.begin(), signers.end());
    cert.threshold = k;
    cert.scheme_n = scheme_n;
    return cert;
  }

  bool verify_sig(const Sig& sig) const {
    return ledger_.count({sig.digest.bytes, sig.signer}) > 0;
  }

  // True iff the cert's structural invariants hold and every member
  // signature was actually produced in this run.
  bool verify_cert(const ThresholdCert& cert) const {
    if (cert.threshold < 1 || cert.scheme_n < 1) return false;
    if (static_cast<int>(cert.signers.size()) < cert.threshold) return false;
    std::set<SignerId> distinct(cert.signers.begin(), cert.signers.end());
    if (distinct.size() != cert.signers.size()) return false;
    for (SignerId id : cert.signers) {
      if (id < 1 || id > cert.scheme_n) return false;
      if (ledger_.count({cert.digest.bytes, id}) == 0) return false;
    }
    return true;
  }

  int forgery_attempts() const { return forgery_attempts_; }

  // Distinct signers recorded for one digest; used by trace-level
  // invariants (e.g. "no t+1 idk signers exist with a correct sender").
  int distinct_signers_on(const Digest& digest) const {
    auto it = by_digest_.find(digest.bytes);
    return it == by_digest_.end() ? 0 : static_cast<int>(it->second.size());
  }

  std::size_t ledger_size() const { return ledger_.size(); }

 private:
  Sig record(SignerId id, const Digest& digest) {
    ledger_.insert({digest.bytes, id});
    by_digest_[digest.bytes].insert(id);
    return Sig{digest, id};
  }

  int n_;
  std::set<SignerId> corrupted_;
  std::set<std::pair<std::string, SignerId>> ledger_;
  std::map<std::string, std::set<SignerId>> by_digest_;
  int forgery_attempts_ = 0;
};

}  // namespace byzlab

#endif  // BYZLAB_CRYPTO_HPP_
