// Copyright 2026 the byzlab authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#ifndef BYZLAB_BASE_HPP_
#define BYZLAB_BASE_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace byzlab {

// Process identifier, 1-based: ids are 1..n.
using SignerId = int;

// Simulated time in integer ticks. The message-delay bound delta is a tick
// count carried by the run config, so fractional multiples of delta (e.g.
// 9.5*delta with delta=10) stay exact.
using Ticks = std::int64_t;

inline constexpr Ticks kNever = INT64_MAX;  // "infinity" for unset deadlines

inline constexpr std::size_t kMaxValueBytes = 32;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A value from the finite agreement domain: a byte string of at most 32
// bytes. Binary agreement uses the one-byte values 0x00 and 0x01.
class Value {
 public:
  Value() = default;
  explicit Value(std::string payload) : payload_(std::move(payload)) {
    if (payload_.size() > kMaxValueBytes) {
      throw ConfigError("value exceeds the 32-byte domain bound");
    }
  }
  static Value binary(int bit) { return Value(std::string(1, bit ? '\x01' : '\x00')); }

  const std::string& payload() const { return payload_; }
  bool is_binary() const {
    return payload_.size() == 1 && (payload_[0] == '\x00' || payload_[0] == '\x01');
  }
  int bit() const { return payload_ == std::string(1, '\x01') ? 1 : 0; }

  friend bool operator==(const Value& a, const Value& b) { return a.payload_ == b.payload_; }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  // Domain order: shortlex, so the empty value is the global minimum.
  friend bool operator<(const Value& a, const Value& b) {
    if (a.payload_.size() != b.payload_.size()) return a.payload_.size() < b.payload_.size();
    return a.payload_ < b.payload_;
  }

 private:
  std::string payload_;
};

inline std::string to_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

inline std::string from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ConfigError("bad hex digit");
  };
  if (hex.size() % 2 != 0) throw ConfigError("odd-length hex string");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

// Seeded RNG used by adversary strategies and the sweep driver. One instance
// per run; never shared across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  // Uniform in [lo, hi], inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(int percent) { return range(1, 100) <= percent; }

  template <typename T>
  const T& pick(const std::vector<T>& pool) {
    return pool[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(pool.size()) - 1))];
  }

 private:
  std::mt19937_64 gen_;
};

// Quorum size used by the two-level certificates: ceil((n+t+1)/2). Any two
// quorums of this size intersect in at least t+1 processes.
inline int quorum_size(int n, int t) { return (n + t + 1 + 1) / 2; }

// Below this failure count a correct leader's phase decides everyone, so
// the quadratic fallback is never justified: f < (n-t-1)/2.
inline bool below_fallback_threshold(int n, int t, int f) { return 2 * f < n - t - 1; }

}  // namespace byzlab

#endif  // BYZLAB_BASE_HPP_
