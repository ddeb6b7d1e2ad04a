#pragma once

// Small integer helpers shared across modules. Everything here is exact
// integer arithmetic; the floating-point formulas elsewhere in the project
// route through these when a rounding mistake would change behavior.

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace oq {

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

// Smallest t >= 0 with 2^t >= x. Requires x >= 1.
inline unsigned ceil_log2(std::uint64_t x) {
  unsigned t = 0;
  std::uint64_t v = 1;
  while (v < x) {
    v <<= 1;
    ++t;
  }
  return t;
}

inline std::uint64_t next_pow2(std::uint64_t x) {
  return std::uint64_t{1} << ceil_log2(x);
}

// Smallest s with s*s >= x.
inline std::uint64_t ceil_sqrt(std::uint64_t x) {
  if (x <= 1) return x;
  std::uint64_t lo = 1, hi = std::uint64_t{1} << 32;
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (mid * mid >= x)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

// Largest s with s*s <= x.
inline std::uint64_t floor_sqrt(std::uint64_t x) {
  std::uint64_t s = ceil_sqrt(x);
  return (s * s == x || x == 0) ? s : s - 1;
}

inline bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  if (x % 2 == 0) return x == 2;
  for (std::uint64_t f = 3; f * f <= x; f += 2)
    if (x % f == 0) return false;
  return true;
}

// base^exp mod m. Requires m < 2^32 so intermediate products fit in 64 bits.
inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("pow_mod: zero modulus");
  if (m >= (std::uint64_t{1} << 32))
    throw std::invalid_argument("pow_mod: modulus must fit in 32 bits");
  std::uint64_t acc = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) acc = acc * base % m;
    base = base * base % m;
    exp >>= 1;
  }
  return acc;
}

// Smallest m >= 1 with p^m >= target. Requires p >= 2, target >= 1.
inline unsigned ceil_log_base(std::uint64_t p, std::uint64_t target) {
  if (p < 2) throw std::invalid_argument("ceil_log_base: base must be >= 2");
  unsigned m = 1;
  std::uint64_t v = p;
  while (v < target) {
    if (v > std::numeric_limits<std::uint64_t>::max() / p)
      return m + 1;  // next power already exceeds any u64 target
    v *= p;
    ++m;
  }
  return m;
}

// d^m >= n, evaluated without overflow.
inline bool pow_at_least(std::uint64_t d, unsigned m, std::uint64_t n) {
  if (n <= 1) return true;
  if (d <= 1) return d == 1 && n <= 1;
  std::uint64_t v = 1;
  for (unsigned i = 0; i < m; ++i) {
    if (v >= n) return true;
    if (v > std::numeric_limits<std::uint64_t>::max() / d) return true;
    v *= d;
  }
  return v >= n;
}

}  // namespace oq
