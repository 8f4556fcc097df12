#pragma once

// Exact integer kernel shared by every other module: 128-bit helpers,
// primality, factorization, Legendre symbols and integer roots.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ecdb {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

std::string to_string(i128 v);
std::string to_string(u128 v);

/// Parses an optionally signed decimal integer. Throws std::invalid_argument
/// on malformed input and std::out_of_range when it does not fit in 127 bits.
i128 parse_i128(std::string_view s);

inline u128 abs_u128(i128 v) { return v < 0 ? u128(0) - u128(v) : u128(v); }

/// gcd of absolute values; gcd(0, 0) = 0.
i128 gcd(i128 a, i128 b);

/// Nonnegative residue of a modulo m (m > 0).
u64 mod_u64(i128 a, u64 m);

/// Largest e with p^e | n. n must be nonzero.
int valuation(i128 n, u128 p);

/// b^e with a thrown std::overflow_error if the result leaves the i128 range.
i128 checked_pow(i128 b, unsigned e);
i128 checked_mul(i128 a, i128 b);
i128 checked_add(i128 a, i128 b);

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 b, u64 e, u64 m);
/// Inverse of a modulo m; a must be a unit.
u64 invmod(u64 a, u64 m);

/// floor(sqrt(n)).
u128 isqrt(u128 n);
/// True iff n >= 0 is a perfect square; the root is written to *root.
bool is_square(i128 n, i128* root = nullptr);

/// floor(n^(1/k)); r^k <= n < (r+1)^k.
u128 integer_nth_root(u128 n, int k);

/// Deterministic for n < 3.3e24 (Miller-Rabin with the first thirteen prime
/// bases), which covers all of u64.
bool is_prime(u128 n);

/// All primes p <= limit in ascending order.
std::vector<u64> primes_up_to(u64 limit);

/// Streams primes in [lo, hi) through a segmented sieve, in ascending order.
void for_each_prime(u64 lo, u64 hi, const std::function<void(u64)>& fn);

struct PrimePower {
  u128 p;
  int e;
  bool operator==(const PrimePower&) const = default;
};

/// Prime factorization of |n|, ascending by p. Units factor as the empty list.
using Factorization = std::vector<PrimePower>;

/// Throws std::invalid_argument for n = 0.
Factorization factorize(i128 n);

/// Legendre symbol (a/p) for an odd prime p. Throws std::invalid_argument if p
/// is even or composite.
int legendre(i128 a, u64 p);

/// Jacobi symbol (a/n) for odd n > 0; no primality check.
int jacobi(u64 a, u64 n);

inline constexpr u64 kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a; pass a previous result as state to continue a stream.
inline u64 fnv1a64(std::string_view bytes, u64 state = kFnvOffset) {
  for (unsigned char ch : bytes) {
    state ^= ch;
    state *= 0x100000001b3ULL;
  }
  return state;
}

}  // namespace ecdb
