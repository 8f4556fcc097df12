#include "ecdb/lfunc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace ecdb {

i64 count_points_naive(const Weierstrass& E, u64 p) {
  const u64 a1 = mod_u64(E.a1, p), a2 = mod_u64(E.a2, p), a3 = mod_u64(E.a3, p);
  const u64 a4 = mod_u64(E.a4, p), a6 = mod_u64(E.a6, p);
  i64 count = 1;
  for (u64 x = 0; x < p; ++x) {
    const u64 rhs = (mulmod(mulmod(x, x, p), x, p) + mulmod(a2, mulmod(x, x, p), p) + mulmod(a4, x, p) + a6) % p;
    for (u64 y = 0; y < p; ++y) {
      const u64 lhs = (mulmod(y, y, p) + mulmod(a1, mulmod(x, y, p), p) + mulmod(a3, y, p)) % p;
      if (lhs == rhs) ++count;
    }
  }
  return count;
}

i64 count_points_charsum(i128 a4, i128 a6, u64 p) {
  if (p < 3 || p % 2 == 0) throw std::invalid_argument("count_points_charsum: p must be an odd prime");
  const u64 A = mod_u64(a4, p), B = mod_u64(a6, p);
  i64 sum = 0;
  if (p < (u64(1) << 24)) {
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    for (u64 y = 1; y <= p / 2; ++y) chi[(y * y) % p] = 1;
    for (u64 x = 0; x < p; ++x) {
      const u64 f = ((x * x % p) * x % p + A * x % p + B) % p;
      sum += chi[f];
    }
  } else {
    for (u64 x = 0; x < p; ++x) {
      const u64 f = (mulmod(mulmod(x, x, p), x, p) + mulmod(A, x, p) + B) % p;
      sum += f == 0 ? 0 : jacobi(f, p);
    }
  }
  return i64(p) + 1 + sum;
}

namespace {

// Reduction modulo p < 2^32 by a precomputed reciprocal.
struct Barrett {
  u64 p;
  u64 m;  // floor(2^64 / p)

  explicit Barrett(u64 modulus) : p(modulus), m(u64((u128(1) << 64) / modulus)) {}

  u64 reduce(u64 x) const {
    const u64 q = u64((u128(x) * m) >> 64);
    u64 r = x - q * p;
    return r >= p ? r - p : r;
  }
  u64 mul(u64 a, u64 b) const { return reduce(a * b); }
};

u64 inverse32(u64 a, u64 p) {
  std::int32_t t = 0, nt = 1;
  std::uint32_t r = std::uint32_t(p), nr = std::uint32_t(a);
  while (nr != 0) {
    const std::uint32_t q = r / nr;
    const std::int32_t tt = t - std::int32_t(q) * nt;
    t = nt;
    nt = tt;
    const std::uint32_t rr = r - q * nr;
    r = nr;
    nr = rr;
  }
  return t < 0 ? u64(std::int64_t(t) + std::int64_t(p)) : u64(t);
}

// y^2 = x^3 + a x + b over F_p, p < 2^31. Walks run in Jacobian
// coordinates and are normalised in batches with one inversion each.
struct FpCurve {
  Barrett f;
  u64 a, b;

  struct Pt {
    u64 x = 0, y = 0;
    bool inf = true;
  };
  struct Jac {
    u64 X = 1, Y = 1, Z = 0;  // Z = 0 is the point at infinity
  };

  u64 add_(u64 u, u64 v) const { return u + v >= f.p ? u + v - f.p : u + v; }
  u64 sub_(u64 u, u64 v) const { return u >= v ? u - v : u + f.p - v; }

  Jac dbl(const Jac& P) const {
    if (P.Z == 0 || P.Y == 0) return {};
    const u64 XX = f.mul(P.X, P.X), YY = f.mul(P.Y, P.Y), YYYY = f.mul(YY, YY), ZZ = f.mul(P.Z, P.Z);
    const u64 S = f.mul(4, f.mul(P.X, YY));
    const u64 M = add_(f.mul(3, XX), f.mul(a, f.mul(ZZ, ZZ)));
    Jac R;
    R.X = sub_(f.mul(M, M), add_(S, S));
    R.Y = sub_(f.mul(M, sub_(S, R.X)), f.mul(8, YYYY));
    R.Z = f.mul(2, f.mul(P.Y, P.Z));
    return R;
  }

  // P + Q with Q affine
  Jac add_mixed(const Jac& P, const Pt& Q) const {
    if (Q.inf) return P;
    if (P.Z == 0) return {Q.x, Q.y, 1};
    const u64 Z1Z1 = f.mul(P.Z, P.Z);
    const u64 U2 = f.mul(Q.x, Z1Z1), S2 = f.mul(Q.y, f.mul(P.Z, Z1Z1));
    const u64 H = sub_(U2, P.X), r = sub_(S2, P.Y);
    if (H == 0) return r == 0 ? dbl(P) : Jac{};
    const u64 HH = f.mul(H, H), HHH = f.mul(H, HH), V = f.mul(P.X, HH);
    Jac R;
    R.X = sub_(sub_(f.mul(r, r), HHH), add_(V, V));
    R.Y = sub_(f.mul(r, sub_(V, R.X)), f.mul(P.Y, HHH));
    R.Z = f.mul(P.Z, H);
    return R;
  }

  Jac mul(const Pt& P, u64 k) const {
    Jac R;
    if (k == 0) return R;
    for (int bit = 63 - __builtin_clzll(k); bit >= 0; --bit) {
      R = dbl(R);
      if ((k >> bit) & 1) R = add_mixed(R, P);
    }
    return R;
  }

  std::vector<Pt> normalise(const std::vector<Jac>& v) const {
    std::vector<u64> prefix(v.size());
    u64 acc = 1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      prefix[i] = acc;
      if (v[i].Z != 0) acc = f.mul(acc, v[i].Z);
    }
    u64 inv = inverse32(acc, f.p);
    std::vector<Pt> out(v.size());
    for (std::size_t i = v.size(); i-- > 0;) {
      if (v[i].Z == 0) continue;
      const u64 zi = f.mul(inv, prefix[i]);
      inv = f.mul(inv, v[i].Z);
      const u64 zi2 = f.mul(zi, zi);
      out[i] = {f.mul(v[i].X, zi2), f.mul(v[i].Y, f.mul(zi2, zi)), false};
    }
    return out;
  }

  Pt affine(const Jac& P) const { return normalise({P})[0]; }
};

// Every N in [lo, hi] with [N]P = O, ascending.
std::vector<u64> annihilators(const FpCurve& E, const FpCurve::Pt& P, u64 lo, u64 hi) {
  const u64 width = hi - lo;
  const u64 m = u64(isqrt(width)) / 2 + 1;
  std::vector<FpCurve::Jac> walk;
  walk.reserve(m);
  FpCurve::Jac R{P.x, P.y, 1};
  for (u64 j = 1; j <= m; ++j) {
    walk.push_back(R);
    R = E.add_mixed(R, P);
  }
  const std::vector<FpCurve::Pt> multiples = E.normalise(walk);  // multiples[j - 1] = jP
  std::vector<std::pair<u64, u64>> baby;                          // (x(jP), j)
  baby.reserve(m);
  for (u64 j = 1; j <= m; ++j) {
    if (!multiples[j - 1].inf) baby.emplace_back(multiples[j - 1].x, j);
  }
  std::sort(baby.begin(), baby.end());

  const u64 stride = 2 * m + 1;
  const FpCurve::Pt giant = E.affine(E.mul(P, stride));
  const u64 first = lo + m;
  const u64 steps = (hi + m - first) / stride + 1;
  walk.clear();
  walk.reserve(steps);
  R = E.mul(P, first);
  for (u64 k = 0; k < steps; ++k) {
    walk.push_back(R);
    R = E.add_mixed(R, giant);
  }
  const std::vector<FpCurve::Pt> centres = E.normalise(walk);

  std::vector<u64> out;
  auto record = [&](u64 n) {
    if (n >= lo && n <= hi) out.push_back(n);
  };
  for (u64 k = 0; k < steps; ++k) {
    const u64 centre = first + k * stride;
    const FpCurve::Pt& Q = centres[k];
    if (Q.inf) {
      record(centre);
      continue;
    }
    auto it = std::lower_bound(baby.begin(), baby.end(), std::make_pair(Q.x, u64(0)));
    for (; it != baby.end() && it->first == Q.x; ++it) {
      const FpCurve::Pt& J = multiples[it->second - 1];
      if (J.y == Q.y) record(centre - it->second);
      if ((J.y + Q.y) % E.f.p == 0) record(centre + it->second);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

i64 count_points_bsgs(i128 a4, i128 a6, u64 p) {
  if (p < 229 || p >= (u64(1) << 31)) throw std::invalid_argument("count_points_bsgs: p out of range");
  const Barrett f(p);
  const u64 A = mod_u64(a4, p), B = mod_u64(a6, p);
  const u64 s = u64(isqrt(u128(4) * p));
  const u64 lo = p + 1 - s, hi = p + 1 + s;
  const u64 total = 2 * p + 2;  // #E + #E'

  // lcm of point orders found on E and on its twist
  u64 lcm_e = 1, lcm_t = 1;
  u64 x0 = 0;
  for (int iter = 0; iter < 200; ++iter) {
    u64 d;
    do {
      ++x0;
      const u64 x = x0 % p;
      d = (f.mul(f.mul(x, x), x) + f.mul(A, x) + B) % p;
    } while (d == 0);
    const bool on_e = jacobi(d, p) == 1;
    // (x0 d, d^2) lies on y^2 = x^3 + a d^2 x + b d^3, isomorphic to E when d
    // is a square and to the twist otherwise.
    const u64 d2 = f.mul(d, d);
    const FpCurve C{f, f.mul(A, d2), f.mul(B, f.mul(d2, d))};
    const FpCurve::Pt P{f.mul(x0 % p, d), d2, false};

    const u64 clo = on_e ? lo : total - hi;
    const u64 chi = on_e ? hi : total - lo;
    const std::vector<u64> cands = annihilators(C, P, clo, chi);
    if (cands.empty()) throw std::logic_error("count_points_bsgs: no annihilator in Hasse interval");
    if (cands.size() == 1) return i64(on_e ? cands.front() : total - cands.front());
    // consecutive annihilators differ by exactly the order of P
    const u64 ord = cands[1] - cands[0];
    if (on_e) {
      lcm_e = std::lcm(lcm_e, ord);
    } else {
      lcm_t = std::lcm(lcm_t, ord);
    }
    u64 found = 0, n_found = 0;
    for (u64 n = lo + (lcm_e - lo % lcm_e) % lcm_e; n <= hi; n += lcm_e) {
      if ((total - n) % lcm_t == 0) {
        found = n;
        if (++n_found > 1) break;
      }
    }
    if (n_found == 1) return i64(found);
  }
  throw std::runtime_error("count_points_bsgs: failed to isolate the group order");
}

ReductionProfile::ReductionProfile(const Curve& c) : ReductionProfile(c, bad_primes(c)) {}

ReductionProfile::ReductionProfile(const Curve& c, std::vector<LocalData> local)
    : curve_(c), local_(std::move(local)) {
  small_.push_back(tate_local(c, 2));
  small_.push_back(tate_local(c, 3));
}

const LocalData* ReductionProfile::at(u64 p) const {
  for (const auto& ld : local_) {
    if (ld.p == p) return &ld;
  }
  return nullptr;
}

i64 ReductionProfile::trace(u64 p) const {
  if (const LocalData* ld = at(p)) {
    switch (ld->reduction) {
      case Reduction::split_multiplicative: return 1;
      case Reduction::nonsplit_multiplicative: return -1;
      case Reduction::additive: return 0;
      case Reduction::good: break;
    }
  }
  return i64(p) + 1 - count_points(p);
}

i64 ReductionProfile::count_points(u64 p) const {
  if (p <= 3) return count_points_naive(small_[p == 2 ? 0 : 1].minimal_model, p);
  if (const LocalData* ld = at(p)) {
    // singular reduction: p, p + 1, p + 2 points for additive, split, nonsplit
    switch (ld->reduction) {
      case Reduction::additive: return i64(p) + 1;
      case Reduction::split_multiplicative: return i64(p);
      case Reduction::nonsplit_multiplicative: return i64(p) + 2;
      case Reduction::good: break;
    }
  }
  if (p < kBsgsThreshold || p >= (u64(1) << 31)) return count_points_charsum(curve_.a4, curve_.a6, p);
  return count_points_bsgs(curve_.a4, curve_.a6, p);
}

i64 count_points_mod_p(const Curve& c, u64 p) {
  if (!is_prime(p)) throw std::invalid_argument("count_points_mod_p: p must be prime");
  return ReductionProfile(c).count_points(p);
}

std::vector<i64> ap_powers(const ReductionProfile& profile, u64 p, int emax) {
  if (emax < 1) throw std::invalid_argument("ap_powers: emax must be positive");
  const i64 ap = profile.trace(p);
  std::vector<i64> s(std::size_t(emax) + 1);
  const LocalData* ld = profile.at(p);
  const bool good = ld == nullptr || ld->reduction == Reduction::good;
  s[0] = good ? 2 : 1;
  for (int e = 1; e <= emax; ++e) {
    if (good) {
      const i128 prev2 = e >= 2 ? s[e - 2] : 0;
      const i128 v = e == 1 ? i128(ap) : i128(ap) * s[e - 1] - i128(p) * prev2;
      if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("ap_powers: value exceeds 64 bits");
      s[e] = i64(v);
    } else {
      s[e] = ap * s[e - 1];
    }
  }
  s.erase(s.begin());
  return s;
}

std::vector<i64> ap_powers(const Curve& c, u64 p, int emax) { return ap_powers(ReductionProfile(c), p, emax); }

std::vector<i64> dirichlet_coefficients(const ReductionProfile& profile, u64 nmax) {
  std::vector<i64> a(nmax + 1, 0);
  if (nmax == 0) return a;
  // multiplicative sieve via smallest prime factor
  std::vector<u64> spf(nmax + 1, 0);
  for (u64 i = 2; i <= nmax; ++i) {
    if (spf[i]) continue;
    for (u64 j = i; j <= nmax; j += i)
      if (!spf[j]) spf[j] = i;
  }
  a[1] = 1;
  for (u64 p = 2; p <= nmax; ++p) {
    if (spf[p] != p) continue;
    const i64 ap = profile.trace(p);
    const LocalData* ld = profile.at(p);
    const bool good = ld == nullptr;
    i64 prev2 = 1, prev = ap;
    a[p] = ap;
    for (u64 q = p; q <= nmax / p;) {
      q *= p;
      const i64 next = good ? ap * prev - i64(p) * prev2 : ap * prev;
      a[q] = next;
      prev2 = prev;
      prev = next;
    }
  }
  for (u64 n = 2; n <= nmax; ++n) {
    const u64 p = spf[n];
    u64 pe = 1, m = n;
    while (m % p == 0) {
      m /= p;
      pe *= p;
    }
    if (m != 1) a[n] = a[pe] * a[m];
  }
  return a;
}

CoeffTable::CoeffTable(const ReductionProfile& profile, u64 limit) : curve_(profile.curve()) {
  extend(profile, limit);
}

void CoeffTable::preload_traces(std::vector<std::pair<u64, i64>> traces) {
  std::sort(traces.begin(), traces.end());
  preloaded_ = std::move(traces);
}

void CoeffTable::extend(const ReductionProfile& profile, u64 new_limit) {
  if (new_limit <= limit_) return;
  if (!traces_.empty() && !(profile.curve() == curve_)) {
    throw std::invalid_argument("CoeffTable::extend: profile belongs to a different curve");
  }
  curve_ = profile.curve();
  const u64 old = limit_;
  std::vector<Entry> fresh;
  auto lookup = [&](u64 p) -> i64 {
    auto it = std::lower_bound(preloaded_.begin(), preloaded_.end(), std::make_pair(p, INT64_MIN));
    if (it != preloaded_.end() && it->first == p) return it->second;
    return profile.trace(p);
  };
  // new primes
  for_each_prime(old, new_limit, [&](u64 p) {
    const i64 ap = lookup(p);
    const LocalData* ld = profile.at(p);
    if (ld == nullptr && std::abs(double(ap)) > 2.0 * std::sqrt(double(p)) + 1e-9) {
      throw std::logic_error("CoeffTable: Hasse bound violated at p = " + std::to_string(p));
    }
    traces_.emplace_back(p, ap);
  });
  // prime powers p^e in [old, new_limit), e >= 1, from every prime below new_limit
  for (const auto& [p, ap] : traces_) {
    const LocalData* ld = profile.at(p);
    const bool good = ld == nullptr;
    const double logp = std::log(double(p));
    i64 prev2 = good ? 2 : 1, prev = ap;
    u64 q = p;
    for (;;) {
      if (q >= old) {
        const double c = -double(prev) * logp / double(q);
        if (c != 0.0) fresh.push_back({q, c});
      }
      if (q > (new_limit - 1) / p) break;
      q *= p;
      const i64 next = good ? ap * prev - i64(p) * prev2 : ap * prev;
      prev2 = prev;
      prev = next;
    }
  }
  std::sort(fresh.begin(), fresh.end(), [](const Entry& x, const Entry& y) { return x.n < y.n; });
  entries_.insert(entries_.end(), fresh.begin(), fresh.end());
  limit_ = new_limit;
}

double CoeffTable::c(u64 n) const {
  if (n >= limit_) throw std::out_of_range("CoeffTable::c: n beyond table limit");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), n, [](const Entry& e, u64 v) { return e.n < v; });
  return it != entries_.end() && it->n == n ? it->c : 0.0;
}

}  // namespace ecdb
