#include "ecdb/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecdb {

Rational Rational::make(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

std::string Rational::str() const {
  if (den == 1) return to_string(num);
  return to_string(num) + "/" + to_string(den);
}

std::string Curve::str() const { return "[" + to_string(a4) + "," + to_string(a6) + "]"; }

std::string to_string(HeightKind k) {
  switch (k) {
    case HeightKind::naive: return "naive";
    case HeightKind::uncalibrated: return "uncalibrated";
    case HeightKind::f1: return "f1";
  }
  return "?";
}

HeightKind parse_height_kind(std::string_view s) {
  if (s == "naive") return HeightKind::naive;
  if (s == "uncalibrated") return HeightKind::uncalibrated;
  if (s == "f1") return HeightKind::f1;
  throw std::invalid_argument("unknown height kind: " + std::string(s));
}

i128 Weierstrass::b2() const { return a1 * a1 + 4 * a2; }
i128 Weierstrass::b4() const { return 2 * a4 + a1 * a3; }
i128 Weierstrass::b6() const { return a3 * a3 + 4 * a6; }
i128 Weierstrass::b8() const {
  return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
}
i128 Weierstrass::c4() const {
  const i128 B2 = b2();
  return B2 * B2 - 24 * b4();
}
i128 Weierstrass::c6() const {
  const i128 B2 = b2();
  return -B2 * B2 * B2 + 36 * B2 * b4() - 216 * b6();
}
i128 Weierstrass::discriminant() const {
  const i128 B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
  i128 t = checked_mul(checked_mul(B2, B2), B8);
  i128 d = -t;
  d = checked_add(d, -checked_mul(8, checked_pow(B4, 3)));
  d = checked_add(d, -checked_mul(27, checked_mul(B6, B6)));
  d = checked_add(d, checked_mul(checked_mul(9 * B2, B4), B6));
  return d;
}

Weierstrass Weierstrass::shifted(i128 r, i128 s, i128 t) const {
  auto mul = [](i128 a, i128 b) { return checked_mul(a, b); };
  auto add = [](i128 a, i128 b) { return checked_add(a, b); };
  Weierstrass w;
  w.a1 = a1 + 2 * s;
  w.a2 = a2 - mul(s, a1) + 3 * r - mul(s, s);
  w.a3 = add(a3 + mul(r, a1), 2 * t);
  w.a4 = a4 - mul(s, a3) + mul(2 * r, a2) - mul(add(t, mul(r, s)), a1) + mul(3 * r, r) - mul(2 * s, t);
  i128 r2 = mul(r, r);
  w.a6 = add(add(add(a6, mul(r, a4)), mul(r2, a2)), mul(r2, r));
  w.a6 = add(w.a6, -add(add(mul(t, a3), mul(t, t)), mul(mul(r, t), a1)));
  return w;
}

Weierstrass Weierstrass::scaled_down(i128 u) const {
  const i128 u2 = u * u, u3 = u2 * u, u4 = u2 * u2, u6 = u3 * u3;
  return {a1 / u, a2 / u2, a3 / u3, a4 / u4, a6 / u6};
}

i128 height_naive(const Curve& c) {
  i128 a = c.a4 < 0 ? -c.a4 : c.a4;
  return std::max(checked_mul(4, checked_pow(a, 3)), checked_mul(27, checked_mul(c.a6, c.a6)));
}

i128 height_uncalibrated(const Curve& c) {
  i128 a = c.a4 < 0 ? -c.a4 : c.a4;
  return std::max(checked_pow(a, 3), checked_mul(c.a6, c.a6));
}

i128 height_f1(const F1Curve& c) {
  i128 a = c.a4 < 0 ? -c.a4 : c.a4;
  return std::max({checked_pow(c.a2, 6), checked_pow(c.a3, 4), checked_pow(a, 3)});
}

i128 height(const Curve& c, HeightKind kind) {
  switch (kind) {
    case HeightKind::naive: return height_naive(c);
    case HeightKind::uncalibrated: return height_uncalibrated(c);
    case HeightKind::f1: break;
  }
  throw std::invalid_argument("height: f1 height is defined on F1 curves only");
}

i128 discriminant(const Curve& c) {
  i128 s = checked_add(checked_mul(4, checked_pow(c.a4, 3)), checked_mul(27, checked_mul(c.a6, c.a6)));
  return checked_mul(-16, s);
}

i128 discriminant_f1(const F1Curve& c) { return Weierstrass::from(c).discriminant(); }

namespace {

// Largest u with u^4 | a4 and u^6 | a6, taken over primes.
i128 minimal_scale(const Curve& c) {
  if (c.a4 == 0 && c.a6 == 0) return 1;
  // p^6 | a6 (or p^4 | a4 when a6 = 0) bounds the candidate primes.
  u128 bound;
  if (c.a6 != 0 && c.a4 != 0) {
    bound = std::min(integer_nth_root(abs_u128(c.a6), 6), integer_nth_root(abs_u128(c.a4), 4));
  } else if (c.a6 != 0) {
    bound = integer_nth_root(abs_u128(c.a6), 6);
  } else {
    bound = integer_nth_root(abs_u128(c.a4), 4);
  }
  if (bound < 2) return 1;
  // Use the gcd-style factorization of the smaller coefficient's root part.
  i128 u = 1;
  i128 a4 = c.a4, a6 = c.a6;
  auto try_prime = [&](u128 p) {
    const i128 p4 = i128(p * p * p * p);
    const i128 p6 = p4 * i128(p * p);
    while ((a4 % p4 == 0) && (a6 % p6 == 0)) {
      a4 /= p4;
      a6 /= p6;
      u *= i128(p);
    }
  };
  if (bound <= 4096) {
    for (u64 p : primes_up_to(u64(bound))) try_prime(p);
  } else {
    i128 g = c.a4 == 0 ? c.a6 : (c.a6 == 0 ? c.a4 : gcd(c.a4, c.a6));
    for (const auto& pe : factorize(g)) {
      if (pe.p <= bound) try_prime(pe.p);
    }
  }
  return u;
}

}  // namespace

bool is_minimal(const Curve& c) {
  if (c.a4 == 0 && c.a6 == 0) return true;
  const u128 a4 = abs_u128(c.a4), a6 = abs_u128(c.a6);
  // fast path: small primes cover everything in enumeration ranges
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL}) {
    const u128 p4 = u128(p) * p * p * p, p6 = p4 * p * p;
    if (a4 % p4 == 0 && a6 % p6 == 0) return false;
  }
  const bool a4_small = c.a4 != 0 && a4 < u128(11) * 11 * 11 * 11;
  const bool a6_small = c.a6 != 0 && a6 < u128(11) * 11 * 11 * 11 * 11 * 11;
  if (a4_small || a6_small) return true;
  return minimal_scale(c) == 1;
}

MinimalReduction reduce_to_minimal(const Curve& c) {
  const i128 u = minimal_scale(c);
  if (u == 1) return {c, 1};
  const i128 u2 = u * u, u4 = u2 * u2;
  return {{c.a4 / u4, c.a6 / (u4 * u2)}, u};
}

ShortModel f1_to_short(const F1Curve& c) {
  const Weierstrass w = Weierstrass::from(c);
  if (w.discriminant() == 0) throw std::domain_error("f1_to_short: singular curve");
  const Curve raw{checked_mul(-27, w.c4()), checked_mul(-54, w.c6())};
  const MinimalReduction m = reduce_to_minimal(raw);
  return {m.curve, Rational::make(6, m.scale)};
}

Rational j_invariant(const Curve& c) {
  const i128 a43 = checked_mul(4, checked_pow(c.a4, 3));
  const i128 den = checked_add(a43, checked_mul(27, checked_mul(c.a6, c.a6)));
  if (den == 0) throw std::domain_error("j_invariant: singular curve");
  return Rational::make(checked_mul(1728, a43), den);
}

const std::array<CmJInvariant, 13>& cm_j_invariants() {
  static const std::array<CmJInvariant, 13> table = {{
      {-3, 0},
      {-4, 1728},
      {-7, -3375},
      {-8, 8000},
      {-11, -32768},
      {-12, 54000},
      {-16, 287496},
      {-19, -884736},
      {-27, -12288000},
      {-28, 16581375},
      {-43, -884736000},
      {-67, -147197952000},
      {-163, -i128(262537412640768000LL)},
  }};
  return table;
}

bool is_cm(const Curve& c) {
  const Rational j = j_invariant(c);
  if (j.den != 1) return false;
  for (const auto& e : cm_j_invariants()) {
    if (e.j == j.num) return true;
  }
  return false;
}

}  // namespace ecdb
