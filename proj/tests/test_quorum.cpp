// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "byzlab/base.hpp"

using namespace byzlab;

TEST_CASE("quorum size formula") {
  CHECK(quorum_size(3, 1) == 3);   // ceil(5/2)
  CHECK(quorum_size(5, 2) == 4);   // ceil(8/2)
  CHECK(quorum_size(7, 3) == 6);   // ceil(11/2)
  CHECK(quorum_size(9, 4) == 7);   // ceil(14/2)
  // General-n configurations keep the intersection slack.
  CHECK(quorum_size(10, 4) == 8);  // ceil(15/2)
}

TEST_CASE("any two quorums overlap in at least t+1 processes, exhaustively") {
  // Brute-force enumeration over every pair of quorum-sized subsets for
  // each n = 2t+1 up to 9.
  for (int n : {3, 5, 7, 9}) {
    const int t = (n - 1) / 2;
    const int q = quorum_size(n, t);
    REQUIRE(2 * q - n >= t + 1);  // the arithmetic core of the guarantee
    std::vector<unsigned> quorums;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) == q) quorums.push_back(mask);
    }
    REQUIRE_FALSE(quorums.empty());
    for (unsigned a : quorums) {
      for (unsigned b : quorums) {
        REQUIRE(__builtin_popcount(a & b) >= t + 1);
      }
    }
  }
}

TEST_CASE("the fallback threshold matches its definition") {
  // f < (n-t-1)/2, kept in integer arithmetic.
  CHECK(below_fallback_threshold(3, 1, 0));
  CHECK_FALSE(below_fallback_threshold(3, 1, 1));
  CHECK(below_fallback_threshold(5, 2, 0));
  CHECK_FALSE(below_fallback_threshold(5, 2, 1));
  CHECK(below_fallback_threshold(7, 3, 1));
  CHECK_FALSE(below_fallback_threshold(7, 3, 2));
  CHECK(below_fallback_threshold(9, 4, 1));
  CHECK_FALSE(below_fallback_threshold(9, 4, 2));
}
