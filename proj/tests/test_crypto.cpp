// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include "byzlab/crypto.hpp"
#include "byzlab/messages.hpp"

using namespace byzlab;

namespace {
Digest d_of(const std::string& s) { return Digest{s}; }
}  // namespace

TEST_CASE("sign records to the ledger and verifies") {
  CryptoContext ctx(5, {4, 5});
  Digest d = digest_vote(BaValue(Value(from_hex("aa"))), 2);
  Sig sig = ctx.sign(3, d);
  CHECK(sig.signer == 3);
  CHECK(ctx.verify_sig(sig));
  // Same content signed twice is the same signature.
  Sig again = ctx.sign(3, d);
  CHECK(sig == again);
}

TEST_CASE("adversary signing is refused for non-corrupted ids") {
  CryptoContext ctx(5, {4, 5});
  CHECK_FALSE(ctx.try_adversary_sign(1, d_of("x")).has_value());
  CHECK(ctx.forgery_attempts() == 1);
  // A fabricated signature object never verifies.
  CHECK_FALSE(ctx.verify_sig(Sig{d_of("x"), 1}));
  // Corrupted ids sign freely.
  CHECK(ctx.try_adversary_sign(4, d_of("x")).has_value());
  CHECK(ctx.forgery_attempts() == 1);
}

TEST_CASE("aggregate requires k distinct signers on one digest") {
  CryptoContext ctx(5, {});
  Digest d = d_of("payload");
  std::vector<Sig> sigs{ctx.sign(1, d), ctx.sign(2, d), ctx.sign(3, d)};
  ThresholdCert cert = ctx.aggregate(sigs, 3, 5);
  CHECK(cert.signers == std::vector<SignerId>{1, 2, 3});
  CHECK(cert.threshold == 3);
  CHECK(ctx.verify_cert(cert));

  // Duplicates collapse below the threshold.
  std::vector<Sig> dup{ctx.sign(1, d), ctx.sign(2, d), ctx.sign(2, d)};
  CHECK_THROWS_AS(ctx.aggregate(dup, 3, 5), AggregateError);

  // Two digests cannot be batched.
  std::vector<Sig> mixed{ctx.sign(1, d), ctx.sign(2, d_of("other"))};
  CHECK_THROWS_AS(ctx.aggregate(mixed, 2, 5), AggregateError);
}

TEST_CASE("verify_cert checks threshold, distinctness and the ledger") {
  CryptoContext ctx(7, {});
  Digest d = d_of("m");
  std::vector<Sig> sigs;
  for (SignerId id = 1; id <= 3; ++id) sigs.push_back(ctx.sign(id, d));
  ThresholdCert cert = ctx.aggregate(sigs, 3, 7);
  CHECK(ctx.verify_cert(cert));

  ThresholdCert short_cert = cert;
  short_cert.signers = {1, 2};
  CHECK_FALSE(ctx.verify_cert(short_cert));  // |signers| = k-1

  ThresholdCert unsigned_cert = cert;
  unsigned_cert.signers = {1, 2, 7};  // 7 never signed
  CHECK_FALSE(ctx.verify_cert(unsigned_cert));

  ThresholdCert dup_cert = cert;
  dup_cert.signers = {1, 1, 2};
  CHECK_FALSE(ctx.verify_cert(dup_cert));
}

TEST_CASE("aggregation soundness, exhaustive for small n") {
  // Any subset with >= k distinct signers over one digest aggregates into
  // a verifying certificate.
  for (int n = 1; n <= 7; ++n) {
    CryptoContext ctx(n, {});
    Digest d = d_of("exhaustive");
    std::vector<Sig> all;
    for (SignerId id = 1; id <= n; ++id) all.push_back(ctx.sign(id, d));
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      std::vector<Sig> subset;
      for (int bit = 0; bit < n; ++bit) {
        if (mask & (1u << bit)) subset.push_back(all[static_cast<std::size_t>(bit)]);
      }
      for (int k = 1; k <= static_cast<int>(subset.size()); ++k) {
        ThresholdCert cert = ctx.aggregate(subset, k, n);
        REQUIRE(ctx.verify_cert(cert));
      }
    }
  }
}

TEST_CASE("word costs: one word per signature, aggregate and value") {
  CryptoContext ctx(7, {});
  Digest d = d_of("m");
  std::vector<Sig> sigs;
  for (SignerId id = 1; id <= 6; ++id) sigs.push_back(ctx.sign(id, d));
  ThresholdCert cert = ctx.aggregate(sigs, 6, 7);
  CHECK(word_cost(cert) == 1);  // six signers, still one word
  CHECK(word_cost(Value(from_hex("aa"))) == 1);
  CHECK(word_cost(sigs[0]) == 1);
  // Item-level sum over the help-answer fields: value + cert + signature.
  int help_items = word_cost(Value(from_hex("bb"))) + word_cost(cert) + word_cost(sigs[0]);
  CHECK(help_items == 3);
}
