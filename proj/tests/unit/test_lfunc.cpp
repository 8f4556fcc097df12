#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ecdb/arith.hpp"
#include "ecdb/lfunc.hpp"

using namespace ecdb;

namespace {

u64 next_prime(u64 n) {
  for (++n; !is_prime(n); ++n) {
  }
  return n;
}

// q * prod_n prod_{(m, e)} (1 - q^{m n})^e, coefficients of q^1..q^nmax.
std::vector<i64> eta_product(const std::vector<std::pair<int, int>>& factors, int nmax) {
  std::vector<i64> f(nmax + 1, 0);
  f[0] = 1;  // series in q, shifted by one at the end
  for (const auto& [m, e] : factors) {
    for (int k = 0; k < e; ++k) {
      for (int n = 1; m * n <= nmax; ++n) {
        const int s = m * n;
        for (int i = nmax; i >= s; --i) f[i] -= f[i - s];
      }
    }
  }
  std::vector<i64> a(nmax + 1, 0);
  for (int n = 1; n <= nmax; ++n) a[n] = f[n - 1];
  return a;
}

// F_{p^2} = F_p[i], p = 3 mod 4.
struct Fp2 {
  i64 re, im;
};

Fp2 mul(Fp2 x, Fp2 y, i64 p) {
  return {((x.re * y.re - x.im * y.im) % p + p) % p, ((x.re * y.im + x.im * y.re) % p + p) % p};
}

Fp2 power(Fp2 x, u64 e, i64 p) {
  Fp2 r{1, 0};
  for (; e; e >>= 1, x = mul(x, x, p))
    if (e & 1) r = mul(r, x, p);
  return r;
}

i64 count_fp2(i64 a4, i64 a6, i64 p) {
  const u64 half = (u64(p) * u64(p) - 1) / 2;
  i64 count = 1;
  for (i64 u = 0; u < p; ++u) {
    for (i64 v = 0; v < p; ++v) {
      const Fp2 x{u, v};
      Fp2 f = mul(mul(x, x, p), x, p);
      const Fp2 ax = mul({((a4 % p) + p) % p, 0}, x, p);
      f = {(f.re + ax.re + ((a6 % p) + p) % p) % p, (f.im + ax.im) % p};
      if (f.re == 0 && f.im == 0) {
        count += 1;
      } else {
        const Fp2 chi = power(f, half, p);
        count += (chi.re == 1 && chi.im == 0) ? 2 : 0;
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("point counts on small examples") {
  CHECK(count_points_charsum(1, 1, 5) == 9);
  CHECK(count_points_mod_p({1, 1}, 5) == 9);
  CHECK(count_points_naive(Weierstrass::from(Curve{1, 1}), 5) == 9);
  for (u64 p : {5, 7, 11, 13, 101, 997}) {
    CAPTURE(p);
    CHECK(count_points_charsum(-1, 1, p) == count_points_naive(Weierstrass::from(Curve{-1, 1}), p));
  }
}

TEST_CASE("Hasse bound and naive agreement") {
  for (const Curve c : {Curve{1, 1}, Curve{-1, -1}, Curve{-13, 4}, Curve{7, -3}}) {
    for (u64 p = 5; p < 200; p = next_prime(p)) {
      if (discriminant(c) % i128(p) == 0) continue;
      const i64 n = count_points_charsum(c.a4, c.a6, p);
      CHECK(n == count_points_naive(Weierstrass::from(Curve{c.a4, c.a6}), p));
      const double ap = double(i64(p) + 1 - n);
      CHECK(std::abs(ap) <= 2 * std::sqrt(double(p)));
    }
  }
}

TEST_CASE("BSGS agrees with the character sum") {
  for (const Curve c : {Curve{1, 1}, Curve{-1, -1}, Curve{-13, 4}, Curve{123, -4567}, Curve{0, 1}, Curve{-1, 0}}) {
    for (u64 p = next_prime(10000); p < 10200; p = next_prime(p)) {
      if (discriminant(c) % i128(p) == 0) continue;
      CAPTURE(c.str());
      CAPTURE(p);
      CHECK(count_points_bsgs(c.a4, c.a6, p) == count_points_charsum(c.a4, c.a6, p));
    }
  }
  for (u64 p : {229ULL, 1009ULL, 65537ULL}) CHECK(count_points_bsgs(1, 1, p) == count_points_charsum(1, 1, p));
}

TEST_CASE("power sums match direct counts over F_{p^2}") {
  for (const Curve c : {Curve{1, 1}, Curve{-1, -1}, Curve{2, 3}}) {
    for (i64 p : {7, 11, 19, 23, 31, 43}) {
      if (discriminant(c) % i128(p) == 0) continue;
      CAPTURE(c.str());
      CAPTURE(p);
      const auto s = ap_powers(c, u64(p), 2);
      REQUIRE(s.size() >= 2);
      CHECK(p * p + 1 - s[1] == count_fp2(i64(c.a4), i64(c.a6), p));
    }
  }
}

TEST_CASE("Dirichlet coefficients match eta products") {
  const int nmax = 400;
  const std::vector<std::pair<Curve, std::vector<std::pair<int, int>>>> cases{
      {{-432, 8208}, {{1, 2}, {11, 2}}},  // level 11
      {{0, 1}, {{6, 4}}},                 // level 36
      {{-1, 0}, {{4, 2}, {8, 2}}},        // level 32
      {{0, 16}, {{3, 2}, {9, 2}}},        // level 27, non-minimal at 2 as a short model
  };
  for (const auto& [c, eta] : cases) {
    CAPTURE(c.str());
    const auto expect = eta_product(eta, nmax);
    const auto got = dirichlet_coefficients(ReductionProfile(c), nmax);
    REQUIRE(got.size() == std::size_t(nmax + 1));
    for (int n = 1; n <= nmax; ++n) {
      CAPTURE(n);
      CHECK(got[n] == expect[n]);
    }
  }
}

TEST_CASE("traces at bad primes") {
  const ReductionProfile e11({-432, 8208});
  CHECK(e11.trace(11) == 1);
  CHECK(e11.trace(2) == -2);
  CHECK(e11.trace(3) == -1);
  CHECK(e11.at(11) != nullptr);
  CHECK(e11.at(5) == nullptr);
  const ReductionProfile e37({-16, 16});
  CHECK(e37.trace(37) == -1);
  CHECK(e37.trace(2) == -2);
  const auto s = ap_powers(e11, 11, 4);
  CHECK(s == std::vector<i64>{1, 1, 1, 1});
  CHECK(ap_powers(ReductionProfile({0, 1}), 3, 3) == std::vector<i64>{0, 0, 0});
}

TEST_CASE("coefficient table") {
  const ReductionProfile prof({1, 1});
  const CoeffTable t(prof, 1000);
  CHECK(t.limit() == 1000);
  CHECK(t.c(5) == doctest::Approx(3 * std::log(5.0) / 5).epsilon(1e-14));
  CHECK(t.c(6) == 0.0);
  CHECK(t.c(1) == 0.0);
  // c_25 from s_2 = a_5^2 - 2*5 = -1.
  CHECK(t.c(25) == doctest::Approx(std::log(5.0) / 25).epsilon(1e-14));
  for (std::size_t i = 1; i < t.entries().size(); ++i) CHECK(t.entries()[i - 1].n < t.entries()[i].n);
  CHECK(t.traces().size() == 168);

  CoeffTable grown(prof, 100);
  grown.extend(prof, 1000);
  grown.extend(prof, 500);
  REQUIRE(grown.entries().size() == t.entries().size());
  for (std::size_t i = 0; i < t.entries().size(); ++i) {
    CHECK(grown.entries()[i].n == t.entries()[i].n);
    CHECK(grown.entries()[i].c == t.entries()[i].c);
  }

  CoeffTable cached;
  cached.preload_traces(t.traces());
  cached.extend(prof, 1000);
  CHECK(cached.traces() == t.traces());
  REQUIRE(cached.entries().size() == t.entries().size());
  for (std::size_t i = 0; i < t.entries().size(); ++i) CHECK(cached.entries()[i].c == t.entries()[i].c);
}
