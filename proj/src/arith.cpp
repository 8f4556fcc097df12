#include "ecdb/arith.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecdb {

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(i128 v) {
  if (v < 0) return "-" + to_string(abs_u128(v));
  return to_string(u128(v));
}

i128 parse_i128(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw std::invalid_argument("malformed integer: " + std::string(s));
  const u128 limit = (u128(1) << 127) - 1;
  u128 v = 0;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (ch < '0' || ch > '9') throw std::invalid_argument("malformed integer: " + std::string(s));
    if (v > (limit - u128(ch - '0')) / 10) throw std::out_of_range("integer too large: " + std::string(s));
    v = v * 10 + u128(ch - '0');
  }
  return neg ? -i128(v) : i128(v);
}

i128 gcd(i128 a, i128 b) {
  u128 x = abs_u128(a), y = abs_u128(b);
  while (y != 0) {
    u128 t = x % y;
    x = y;
    y = t;
  }
  return i128(x);
}

u64 mod_u64(i128 a, u64 m) {
  i128 r = a % i128(m);
  if (r < 0) r += m;
  return u64(r);
}

int valuation(i128 n, u128 p) {
  if (n == 0) throw std::invalid_argument("valuation of zero");
  u128 m = abs_u128(n);
  int e = 0;
  while (m % p == 0) {
    m /= p;
    ++e;
  }
  return e;
}

i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("i128 multiplication overflow");
  return r;
}

i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("i128 addition overflow");
  return r;
}

i128 checked_pow(i128 b, unsigned e) {
  i128 r = 1;
  for (unsigned i = 0; i < e; ++i) r = checked_mul(r, b);
  return r;
}

u64 mulmod(u64 a, u64 b, u64 m) { return u64(u128(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 m) {
  if (m < (u64(1) << 62)) {
    i64 t = 0, nt = 1, r = i64(m), nr = i64(a % m);
    while (nr != 0) {
      const i64 q = r / nr;
      i64 tmp = t - q * nt;
      t = nt;
      nt = tmp;
      tmp = r - q * nr;
      r = nr;
      nr = tmp;
    }
    if (r != 1) throw std::invalid_argument("invmod: not a unit");
    if (t < 0) t += i64(m);
    return u64(t);
  }
  i128 t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    i128 q = r / nr;
    i128 tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw std::invalid_argument("invmod: not a unit");
  if (t < 0) t += m;
  return u64(t);
}

u128 isqrt(u128 n) {
  if (n == 0) return 0;
  u128 r = u128(std::sqrt(static_cast<long double>(n)));
  // correct the floating estimate in both directions
  while (r > 0 && (r > n / r)) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

bool is_square(i128 n, i128* root) {
  if (n < 0) return false;
  // quadratic residues mod 64 reject ~80% of inputs cheaply
  static constexpr u64 kSquareMod64 = 0x0202021202030213ULL;
  if (!((kSquareMod64 >> (u64(n) & 63)) & 1)) return false;
  u128 r = isqrt(u128(n));
  if (r * r != u128(n)) return false;
  if (root) *root = i128(r);
  return true;
}

namespace {

// r^k <= n without overflow
bool pow_leq(u128 r, int k, u128 n) {
  u128 acc = 1;
  for (int i = 0; i < k; ++i) {
    if (r != 0 && acc > n / r) return false;
    acc *= r;
  }
  return acc <= n;
}

}  // namespace

u128 integer_nth_root(u128 n, int k) {
  if (k <= 0) throw std::invalid_argument("integer_nth_root: k must be positive");
  if (k == 1 || n < 2) return n;
  u128 r = u128(std::pow(static_cast<long double>(n), 1.0L / k));
  while (r > 0 && !pow_leq(r, k, n)) --r;
  while (pow_leq(r + 1, k, n)) ++r;
  return r;
}

namespace {

u128 mulmod128(u128 a, u128 b, u128 m) {
  if (m <= u128(UINT64_MAX)) return u128(u64(a % m)) * u64(b % m) % m;
  a %= m;
  b %= m;
  u128 r = 0;
  while (b > 0) {
    if (b & 1) {
      r = r >= m - a ? r - (m - a) : r + a;
    }
    a = a >= m - a ? a - (m - a) : a + a;
    b >>= 1;
  }
  return r;
}

u128 powmod128(u128 b, u128 e, u128 m) {
  u128 r = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) r = mulmod128(r, b, m);
    b = mulmod128(b, b, m);
    e >>= 1;
  }
  return r;
}

constexpr u64 kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

bool miller_rabin(u128 n, u64 a) {
  u128 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  u128 x = powmod128(a % n, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod128(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

const std::vector<u64>& small_primes() {
  static const std::vector<u64> primes = primes_up_to(1000);
  return primes;
}

u128 gcd_u128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Brent's variant of Pollard rho; n odd composite, not a perfect power of a
// small prime.
u128 pollard_brent(u128 n) {
  for (u128 c = 1;; ++c) {
    u128 y = 2, x = 2, g = 1, q = 1, ys = 2;
    u128 r = 1;
    const u128 m = 128;
    auto f = [&](u128 v) {
      u128 s = mulmod128(v, v, n) + c;
      return s >= n ? s - n : s;
    };
    do {
      x = y;
      for (u128 i = 0; i < r; ++i) y = f(y);
      u128 k = 0;
      do {
        ys = y;
        for (u128 i = 0; i < m && i < r - k; ++i) {
          y = f(y);
          q = mulmod128(q, x > y ? x - y : y - x, n);
        }
        g = gcd_u128(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = gcd_u128(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split_into(u128 n, std::vector<u128>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  u128 r = isqrt(n);
  if (r * r == n) {
    split_into(r, out);
    split_into(r, out);
    return;
  }
  u128 d = pollard_brent(n);
  split_into(d, out);
  split_into(n / d, out);
}

}  // namespace

bool is_prime(u128 n) {
  if (n < 2) return false;
  for (u64 p : kWitnesses) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  for (u64 a : kWitnesses) {
    if (!miller_rabin(n, a)) return false;
  }
  return true;
}

std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (u64 i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

void for_each_prime(u64 lo, u64 hi, const std::function<void(u64)>& fn) {
  if (hi <= 2 || lo >= hi) return;
  if (lo < 2) lo = 2;
  const u64 root = u64(isqrt(hi)) + 1;
  const std::vector<u64> base = primes_up_to(root);
  const u64 seg = u64(1) << 18;
  std::vector<char> mark;
  for (u64 start = lo; start < hi; start += seg) {
    const u64 end = std::min(hi, start + seg);
    mark.assign(end - start, 1);
    for (u64 p : base) {
      if (p * p >= end) break;
      u64 first = std::max(p * p, (start + p - 1) / p * p);
      for (u64 j = first; j < end; j += p) mark[j - start] = 0;
    }
    for (u64 i = start; i < end; ++i) {
      if (mark[i - start]) fn(i);
    }
  }
}

Factorization factorize(i128 n) {
  if (n == 0) throw std::invalid_argument("factorize: zero has no factorization");
  u128 m = abs_u128(n);
  std::vector<u128> primes;
  for (u64 p : small_primes()) {
    if (u128(p) * p > m) break;
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  }
  split_into(m, primes);
  std::sort(primes.begin(), primes.end());
  Factorization out;
  for (u128 p : primes) {
    if (!out.empty() && out.back().p == p) {
      ++out.back().e;
    } else {
      out.push_back({p, 1});
    }
  }
  return out;
}

int jacobi(u64 a, u64 n) {
  a %= n;
  int result = 1;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      u64 r = n & 7;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if ((a & 3) == 3 && (n & 3) == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

int legendre(i128 a, u64 p) {
  if (p < 3 || (p & 1) == 0 || !is_prime(p)) {
    throw std::invalid_argument("legendre: modulus must be an odd prime");
  }
  return jacobi(mod_u64(a, p), p);
}

}  // namespace ecdb
