#include "ecdb/local.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecdb/lfunc.hpp"

namespace ecdb {

std::string KodairaSymbol::str() const {
  switch (type) {
    case KodairaType::I0: return "I0";
    case KodairaType::In: return "I" + std::to_string(n);
    case KodairaType::II: return "II";
    case KodairaType::III: return "III";
    case KodairaType::IV: return "IV";
    case KodairaType::I0s: return "I0*";
    case KodairaType::Ins: return "I" + std::to_string(n) + "*";
    case KodairaType::IVs: return "IV*";
    case KodairaType::IIIs: return "III*";
    case KodairaType::IIs: return "II*";
  }
  return "?";
}

std::string to_string(Reduction r) {
  switch (r) {
    case Reduction::good: return "good";
    case Reduction::split_multiplicative: return "split";
    case Reduction::nonsplit_multiplicative: return "nonsplit";
    case Reduction::additive: return "additive";
  }
  return "?";
}

namespace {

i128 exact_div(i128 a, i128 b) {
  if (a % b != 0) throw std::logic_error("tate: expected divisibility failed");
  return a / b;
}

bool divides(i128 d, i128 a) { return a % d == 0; }

// Roots of a polynomial over F_p by exhaustive search. Only reached in
// additive cases where p^6 divides the discriminant, so p is small.
template <typename Poly>
std::vector<u64> roots_mod_p(Poly&& f, u64 p) {
  std::vector<u64> out;
  for (u64 x = 0; x < p; ++x) {
    if (f(x) == 0) out.push_back(x);
  }
  return out;
}

// value of a x^2 + b x + c mod p, coefficients already reduced
u64 quad_mod(u64 a, u64 b, u64 c, u64 x, u64 p) {
  return (mulmod(mulmod(a, x, p), x, p) + mulmod(b, x, p) + c) % p;
}

int quadratic_root_count(i128 a, i128 b, i128 c, u64 p) {
  const u64 A = mod_u64(a, p), B = mod_u64(b, p), C = mod_u64(c, p);
  if (p == 2) {
    int n = 0;
    for (u64 x = 0; x < 2; ++x) n += quad_mod(A, B, C, x, p) == 0;
    return n;
  }
  if (A == 0) return B != 0 ? 1 : (C == 0 ? int(p) : 0);
  const u64 disc = (mulmod(B, B, p) + p - mulmod(4 % p, mulmod(A, C, p), p)) % p;
  if (disc == 0) return 1;
  return jacobi(disc, p) == 1 ? 2 : 0;
}

// A double root of a x^2 + b x + c mod p (discriminant known to vanish).
u64 double_root(i128 a, i128 b, i128 c, u64 p) {
  const u64 A = mod_u64(a, p), B = mod_u64(b, p), C = mod_u64(c, p);
  if (p == 2) {
    for (u64 x = 0; x < 2; ++x)
      if (quad_mod(A, B, C, x, p) == 0) return x;
    throw std::logic_error("tate: no root mod 2");
  }
  // x = -b / (2a)
  return mulmod((p - B) % p, invmod(mulmod(2, A, p), p), p);
}

// Finds the singular point of the reduction mod p and moves it to (0, 0).
Weierstrass move_singular_point(const Weierstrass& E, u64 p) {
  if (p <= 3) {
    for (u64 x = 0; x < p; ++x) {
      for (u64 y = 0; y < p; ++y) {
        const i128 X = x, Y = y;
        const i128 F = Y * Y + E.a1 * X * Y + E.a3 * Y - X * X * X - E.a2 * X * X - E.a4 * X - E.a6;
        const i128 Fx = E.a1 * Y - 3 * X * X - 2 * E.a2 * X - E.a4;
        const i128 Fy = 2 * Y + E.a1 * X + E.a3;
        if (mod_u64(F, p) == 0 && mod_u64(Fx, p) == 0 && mod_u64(Fy, p) == 0) {
          return E.shifted(X, 0, Y);
        }
      }
    }
    throw std::logic_error("tate: singular point not found");
  }
  const u64 inv12 = invmod(12 % p, p);
  const u64 b2 = mod_u64(E.b2(), p);
  const u64 c4 = mod_u64(E.c4(), p);
  u64 r;
  if (c4 == 0) {
    r = mulmod((p - b2) % p, inv12, p);
  } else {
    const u64 c6 = mod_u64(E.c6(), p);
    const u64 num = (c6 + mulmod(b2, c4, p)) % p;
    r = mulmod((p - num) % p, invmod(mulmod(12 % p, c4, p), p), p);
  }
  const u64 a1r = (mulmod(mod_u64(E.a1, p), r, p) + mod_u64(E.a3, p)) % p;
  const u64 t = mulmod((p - a1r) % p, invmod(2, p), p);
  Weierstrass out = E.shifted(i128(r), 0, i128(t));
  if (mod_u64(out.a3, p) || mod_u64(out.a4, p) || mod_u64(out.a6, p)) {
    throw std::logic_error("tate: singular point shift failed");
  }
  return out;
}

// -v/2 modulo m for odd m, as an exact integer in [0, m).
i128 neg_half_mod(i128 v, i128 m) {
  i128 r = v % m;
  if (r < 0) r += m;
  if (r % 2 != 0) r += m;
  r = -(r / 2);
  r %= m;
  if (r < 0) r += m;
  return r;
}

}  // namespace

LocalData tate_local(const Weierstrass& model, u64 p) {
  if (!is_prime(p)) throw std::invalid_argument("tate_local: p must be prime");
  Weierstrass E = model;
  const i128 P = i128(p);
  for (;;) {
    const i128 disc = E.discriminant();
    if (disc == 0) throw std::domain_error("tate_local: singular model");
    LocalData out;
    out.p = p;
    const int n = valuation(disc, p);
    out.ord_disc = n;
    if (n == 0) {
      out.minimal_model = E;
      return out;
    }

    if (mod_u64(E.c4(), p) != 0) {
      // multiplicative, type I_n
      bool split;
      if (p >= 5) {
        split = jacobi(mod_u64(-E.c6(), p), p) == 1;
      } else {
        E = move_singular_point(E, p);
        split = quadratic_root_count(1, E.a1, -E.a2, p) > 0;
      }
      out.kodaira = {KodairaType::In, n};
      out.f_p = 1;
      out.reduction = split ? Reduction::split_multiplicative : Reduction::nonsplit_multiplicative;
      out.c_p = split ? n : (n % 2 == 0 ? 2 : 1);
      out.minimal_model = E;
      return out;
    }

    out.reduction = Reduction::additive;
    E = move_singular_point(E, p);
    const i128 P2 = P * P, P3 = P2 * P;

    if (!divides(P2, E.a6)) {
      out.kodaira = {KodairaType::II, 0};
      out.f_p = n;
      out.c_p = 1;
      out.minimal_model = E;
      return out;
    }
    if (!divides(P3, E.b8())) {
      out.kodaira = {KodairaType::III, 0};
      out.f_p = n - 1;
      out.c_p = 2;
      out.minimal_model = E;
      return out;
    }
    if (!divides(P3, E.b6())) {
      out.kodaira = {KodairaType::IV, 0};
      out.f_p = n - 2;
      out.c_p = quadratic_root_count(1, exact_div(E.a3, P), -exact_div(E.a6, P2), p) > 0 ? 3 : 1;
      out.minimal_model = E;
      return out;
    }

    // make p | a1, a2; p^2 | a3, a4; p^3 | a6
    {
      i128 s, t;
      if (p == 2) {
        s = mod_u64(E.a2, 2);
        t = 2 * i128(mod_u64(exact_div(E.a6, 4), 2));
      } else {
        s = neg_half_mod(E.a1, P);
        t = neg_half_mod(E.a3, P2);
      }
      E = E.shifted(0, s, t);
    }
    if (!divides(P, E.a1) || !divides(P, E.a2) || !divides(P2, E.a3) || !divides(P2, E.a4) ||
        !divides(P3, E.a6)) {
      throw std::logic_error("tate: normalisation before cubic step failed");
    }

    // P(T) = T^3 + b T^2 + c T + d
    const i128 b = E.a2 / P, c = E.a4 / P2, d = E.a6 / P3;
    const u64 bm = mod_u64(b, p), cm = mod_u64(c, p), dm = mod_u64(d, p);
    auto cubic = [&](u64 x) {
      return (mulmod(mulmod(x, x, p), x, p) + mulmod(bm, mulmod(x, x, p), p) + mulmod(cm, x, p) + dm) % p;
    };
    auto cubic_d1 = [&](u64 x) {
      return (mulmod(3 % p, mulmod(x, x, p), p) + mulmod(mulmod(2 % p, bm, p), x, p) + cm) % p;
    };
    const i128 w = 27 * d * d - b * b * c * c + 4 * b * b * b * d - 18 * b * c * d + 4 * c * c * c;
    const i128 x = 3 * c - b * b;

    if (mod_u64(w, p) != 0) {
      out.kodaira = {KodairaType::I0s, 0};
      out.f_p = n - 4;
      out.c_p = 1 + int(roots_mod_p(cubic, p).size());
      out.minimal_model = E;
      return out;
    }

    if (mod_u64(x, p) != 0) {
      // double root: move it to T = 0, then the I_m* subprocedure
      u64 root = p;
      for (u64 t0 = 0; t0 < p; ++t0) {
        if (cubic(t0) == 0 && cubic_d1(t0) == 0) {
          root = t0;
          break;
        }
      }
      if (root == p) throw std::logic_error("tate: double root not found");
      E = E.shifted(P * i128(root), 0, 0);
      int ix = 3, iy = 3;
      i128 mx = P2, my = P2;
      int cp = 0;
      for (;;) {
        i128 xa2 = exact_div(E.a2, P), xa3 = exact_div(E.a3, my);
        i128 xa4 = exact_div(E.a4, P * mx), xa6 = exact_div(E.a6, mx * my);
        const u64 dy = (mulmod(mod_u64(xa3, p), mod_u64(xa3, p), p) + mulmod(4 % p, mod_u64(xa6, p), p)) % p;
        if (dy != 0) {
          cp = quadratic_root_count(1, xa3, -xa6, p) > 0 ? 4 : 2;
          break;
        }
        const i128 ty = my * i128(double_root(1, xa3, -xa6, p));
        E = E.shifted(0, 0, ty);
        my *= P;
        ++iy;
        xa2 = exact_div(E.a2, P);
        xa3 = exact_div(E.a3, my);
        xa4 = exact_div(E.a4, P * mx);
        xa6 = exact_div(E.a6, mx * my);
        const u64 dx =
            (mulmod(mod_u64(xa4, p), mod_u64(xa4, p), p) + p -
             mulmod(4 % p, mulmod(mod_u64(xa2, p), mod_u64(xa6, p), p), p)) % p;
        if (dx != 0) {
          cp = quadratic_root_count(xa2, xa4, xa6, p) > 0 ? 4 : 2;
          break;
        }
        const i128 rx = mx * i128(double_root(xa2, xa4, xa6, p));
        E = E.shifted(rx, 0, 0);
        mx *= P;
        ++ix;
      }
      const int m = ix + iy - 5;
      out.kodaira = {KodairaType::Ins, m};
      out.f_p = n - m - 4;
      out.c_p = cp;
      out.minimal_model = E;
      return out;
    }

    // triple root: move it to T = 0
    {
      u64 root = p;
      auto cubic_d2 = [&](u64 t0) { return (mulmod(6 % p, t0, p) + mulmod(2 % p, bm, p)) % p; };
      for (u64 t0 = 0; t0 < p; ++t0) {
        if (cubic(t0) == 0 && cubic_d1(t0) == 0 && (p == 3 || cubic_d2(t0) == 0)) {
          root = t0;
          break;
        }
      }
      if (root == p) throw std::logic_error("tate: triple root not found");
      E = E.shifted(P * i128(root), 0, 0);
    }
    const i128 P4 = P2 * P2, P6 = P3 * P3;
    const i128 x3 = exact_div(E.a3, P2), x6 = exact_div(E.a6, P4);
    const u64 dq = (mulmod(mod_u64(x3, p), mod_u64(x3, p), p) + mulmod(4 % p, mod_u64(x6, p), p)) % p;
    if (dq != 0) {
      out.kodaira = {KodairaType::IVs, 0};
      out.f_p = n - 6;
      out.c_p = quadratic_root_count(1, x3, -x6, p) > 0 ? 3 : 1;
      out.minimal_model = E;
      return out;
    }
    E = E.shifted(0, 0, P2 * i128(double_root(1, x3, -x6, p)));
    if (!divides(P4, E.a4)) {
      out.kodaira = {KodairaType::IIIs, 0};
      out.f_p = n - 7;
      out.c_p = 2;
      out.minimal_model = E;
      return out;
    }
    if (!divides(P6, E.a6)) {
      out.kodaira = {KodairaType::IIs, 0};
      out.f_p = n - 8;
      out.c_p = 1;
      out.minimal_model = E;
      return out;
    }
    // not minimal at p: scale down and start again
    E = E.scaled_down(P);
  }
}

LocalData tate_local(const Curve& c, u64 p) { return tate_local(Weierstrass::from(c), p); }

std::vector<LocalData> bad_primes(const Curve& c) {
  const i128 disc = discriminant(c);
  if (disc == 0) throw std::domain_error("bad_primes: singular curve");
  std::vector<LocalData> out;
  for (const auto& pe : factorize(disc)) {
    if (pe.p > u128(UINT64_MAX)) throw std::overflow_error("bad_primes: prime factor exceeds 64 bits");
    LocalData ld = tate_local(c, u64(pe.p));
    if (ld.reduction != Reduction::good || ld.f_p != 0) out.push_back(std::move(ld));
  }
  return out;
}

i128 conductor(const std::vector<LocalData>& local) {
  i128 n = 1;
  for (const auto& ld : local) n = checked_mul(n, checked_pow(i128(ld.p), unsigned(ld.f_p)));
  return n;
}

i128 conductor(const Curve& c) { return conductor(bad_primes(c)); }

i128 tamagawa_product(const std::vector<LocalData>& local) {
  i128 t = 1;
  for (const auto& ld : local) t *= ld.c_p;
  return t;
}

i128 tamagawa_product(const Curve& c) { return tamagawa_product(bad_primes(c)); }

namespace {

// Local root number at an additive prime p >= 5 on a p-minimal model.
int additive_local_root_number(const LocalData& ld) {
  const u64 p = ld.p;
  const Weierstrass& E = ld.minimal_model;
  const i128 c4 = E.c4();
  const int vd = ld.ord_disc;
  const bool potentially_multiplicative = c4 != 0 && 3 * valuation(c4, p) < vd;
  if (potentially_multiplicative) return jacobi(p - 1, p);
  const int e = 12 / std::gcd(12, vd);
  switch (e) {
    case 2:
    case 6: return jacobi(p - 1, p);
    case 3: return jacobi(p - 3, p);
    case 4: return jacobi(p - 2, p);
    default: break;
  }
  throw std::logic_error("additive_local_root_number: unexpected semistability defect");
}

}  // namespace

RootNumber root_number(const Curve& c, const std::vector<LocalData>& local, bool allow_numeric,
                       const NumericRootOptions& options) {
  int w = -1;
  for (const auto& ld : local) {
    switch (ld.reduction) {
      case Reduction::good: break;
      case Reduction::split_multiplicative: w = -w; break;
      case Reduction::nonsplit_multiplicative: break;
      case Reduction::additive:
        if (ld.p <= 3) {
          if (!allow_numeric) return {};
          return root_number_numeric(c, local, options);
        }
        w *= additive_local_root_number(ld);
        break;
    }
  }
  return {w, RootNumberMethod::local_formulas};
}

RootNumber root_number(const Curve& c, bool allow_numeric, const NumericRootOptions& options) {
  return root_number(c, bad_primes(c), allow_numeric, options);
}

RootNumber root_number_numeric(const Curve& c, const std::vector<LocalData>& local,
                               const NumericRootOptions& options) {
  const double N = double(conductor(local));
  const double sqrtN = std::sqrt(N);
  const double wanted = std::ceil(options.coefficient_factor * sqrtN);
  if (wanted > double(options.max_coefficients)) return {};
  const u64 nmax = u64(wanted);

  const ReductionProfile profile(c, local);
  const std::vector<i64> a = dirichlet_coefficients(profile, nmax);

  // F(y) = sum a_n exp(-2 pi n y / sqrt(N)); the reflection F(1/y) = w y^2 F(y)
  auto theta = [&](double y) {
    const double step = 2.0 * M_PI * y / sqrtN;
    long double s = 0;
    for (u64 n = 1; n <= nmax; ++n) {
      if (a[n] == 0) continue;
      s += static_cast<long double>(a[n]) * std::exp(-step * double(n));
    }
    return s;
  };

  int votes_plus = 0, votes_minus = 0;
  for (double y : {1.1, 1.2, 1.3}) {
    const long double lhs = theta(1.0 / y);
    const long double rhs = static_cast<long double>(y * y) * theta(y);
    const long double scale = std::fabs(lhs) + std::fabs(rhs);
    if (scale < 1e-30L) continue;
    const double res_plus = double(std::fabs(lhs - rhs) / scale);
    const double res_minus = double(std::fabs(lhs + rhs) / scale);
    if (res_plus < options.accept_tolerance && res_minus > options.reject_tolerance) ++votes_plus;
    if (res_minus < options.accept_tolerance && res_plus > options.reject_tolerance) ++votes_minus;
  }
  if (votes_plus > 0 && votes_minus == 0) return {1, RootNumberMethod::numeric_functional_equation};
  if (votes_minus > 0 && votes_plus == 0) return {-1, RootNumberMethod::numeric_functional_equation};
  return {};
}

RootNumber root_number_numeric(const Curve& c, const NumericRootOptions& options) {
  return root_number_numeric(c, bad_primes(c), options);
}

}  // namespace ecdb
