#include "ecdb/mordell.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecdb/lfunc.hpp"

namespace ecdb {

namespace {

mpz_class to_mpz(i128 v) {
  const u128 a = abs_u128(v);
  mpz_class hi = mpz_class(static_cast<unsigned long>(u64(a >> 64)));
  mpz_class lo = mpz_class(static_cast<unsigned long>(u64(a)));
  mpz_class r = (hi << 64) + lo;
  return v < 0 ? mpz_class(-r) : r;
}

}  // namespace

RationalPoint RationalPoint::make(const mpq_class& x, const mpq_class& y) {
  RationalPoint p{x, y, false};
  p.x.canonicalize();
  p.y.canonicalize();
  return p;
}

bool RationalPoint::operator==(const RationalPoint& o) const {
  if (infinity || o.infinity) return infinity == o.infinity;
  return x == o.x && y == o.y;
}

std::string RationalPoint::str() const {
  if (infinity) return "O";
  return "(" + x.get_str() + "," + y.get_str() + ")";
}

bool on_curve(const Curve& c, const RationalPoint& P) {
  if (P.infinity) return true;
  const mpq_class a4(to_mpz(c.a4)), a6(to_mpz(c.a6));
  return P.y * P.y == P.x * P.x * P.x + a4 * P.x + a6;
}

RationalPoint negate(const RationalPoint& P) {
  if (P.infinity) return P;
  return RationalPoint::make(P.x, -P.y);
}

RationalPoint add(const Curve& c, const RationalPoint& P, const RationalPoint& Q) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  mpq_class lambda;
  if (P.x == Q.x) {
    if (P.y != Q.y || sgn(P.y) == 0) return RationalPoint::at_infinity();
    const mpq_class a4(to_mpz(c.a4));
    lambda = (3 * P.x * P.x + a4) / (2 * P.y);
  } else {
    lambda = (Q.y - P.y) / (Q.x - P.x);
  }
  const mpq_class x3 = lambda * lambda - P.x - Q.x;
  const mpq_class y3 = lambda * (P.x - x3) - P.y;
  return RationalPoint::make(x3, y3);
}

RationalPoint multiply(const Curve& c, const RationalPoint& P, long n) {
  RationalPoint base = n < 0 ? negate(P) : P;
  unsigned long k = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  RationalPoint acc = RationalPoint::at_infinity();
  while (k) {
    if (k & 1) acc = add(c, acc, base);
    k >>= 1;
    if (k) base = add(c, base, base);
  }
  return acc;
}

std::string TorsionGroup::label() const {
  if (m == 1 && n == 1) return "trivial";
  if (m == 1) return "Z/" + std::to_string(n);
  return "Z/" + std::to_string(m) + "xZ/" + std::to_string(n);
}

TorsionGroup parse_torsion_label(const std::string& s) {
  TorsionGroup g;
  if (s == "trivial") return g;
  auto parse_factor = [&](const std::string& part) {
    if (part.size() < 3 || part.compare(0, 2, "Z/") != 0) throw std::invalid_argument("bad torsion label: " + s);
    return std::stoi(part.substr(2));
  };
  const auto xpos = s.find('x');
  if (xpos == std::string::npos) {
    g.n = parse_factor(s);
  } else {
    g.m = parse_factor(s.substr(0, xpos));
    g.n = parse_factor(s.substr(xpos + 1));
  }
  if (!mazur_allowed(g.m, g.n)) throw std::invalid_argument("torsion label outside Mazur's list: " + s);
  return g;
}

bool mazur_allowed(int m, int n) {
  if (m == 1) return (n >= 1 && n <= 10) || n == 12;
  if (m == 2) return n == 2 || n == 4 || n == 6 || n == 8;
  return false;
}

namespace {

// Integer roots of x^3 + a x + c, ascending.
std::vector<i128> integer_roots_cubic(i128 a, i128 c) {
  auto g = [&](i128 x) { return x * x * x + a * x + c; };
  const i128 B = 2 * std::max(i128(isqrt(abs_u128(a))) + 1, i128(integer_nth_root(abs_u128(c), 3)) + 1) + 2;
  std::vector<i128> roots;
  // integer root of g on [lo, hi] where g is monotone in direction dir
  auto scan = [&](i128 lo, i128 hi, int dir) {
    if (lo > hi) return;
    // first x with dir * g(x) >= 0
    i128 L = lo, R = hi + 1;
    while (L < R) {
      const i128 mid = L + (R - L) / 2;
      if (dir * g(mid) >= 0) {
        R = mid;
      } else {
        L = mid + 1;
      }
    }
    if (L <= hi && g(L) == 0) roots.push_back(L);
  };
  if (a >= 0) {
    scan(-B, B, 1);
  } else {
    // critical points at +-sigma, sigma = sqrt(-a/3)
    const i128 s = i128(isqrt(abs_u128(a) / 3));
    i128 lo_in = -s, hi_in = s;
    // floor(sigma) may be s or the square root of a non-integer; both work
    // because g is monotone on the integer sets used below.
    if (3 * (s + 1) * (s + 1) <= -a) {
      lo_in = -(s + 1);
      hi_in = s + 1;
    }
    scan(-B, lo_in - 1, 1);
    scan(lo_in, hi_in, -1);
    scan(hi_in + 1, B, 1);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

bool integral(const RationalPoint& P) { return P.x.get_den() == 1 && P.y.get_den() == 1; }

// Order of P if it is torsion, else 0.
int torsion_order(const Curve& c, const RationalPoint& P) {
  if (P.infinity) return 1;
  RationalPoint Q = P;
  for (int k = 1; k <= 12; ++k) {
    if (Q.infinity) return k;
    if (!integral(Q)) return 0;
    Q = add(c, Q, P);
  }
  return 0;
}

// gcd of #E(F_p) over a handful of good odd primes.
i64 torsion_order_bound(const Curve& c) {
  const i128 disc = discriminant(c);
  i64 g = 0;
  int used = 0;
  for (u64 p : primes_up_to(200)) {
    if (p == 2 || disc % i128(p) == 0) continue;
    g = std::gcd(g, count_points_charsum(c.a4, c.a6, p));
    if (++used == 10 || g == 1) break;
  }
  return g;
}

}  // namespace

std::vector<RationalPoint> torsion_points(const Curve& c) {
  if (discriminant(c) == 0) throw std::domain_error("torsion_points: singular curve");
  std::vector<RationalPoint> out{RationalPoint::at_infinity()};
  const i64 bound = torsion_order_bound(c);
  if (bound == 1) return out;

  std::vector<i128> ys{0};
  const i128 D = checked_add(checked_mul(4, checked_pow(c.a4, 3)), checked_mul(27, checked_mul(c.a6, c.a6)));
  {
    // y > 0 with y^2 | D
    std::vector<i128> sq{1};
    for (const auto& pe : factorize(D)) {
      const std::size_t base = sq.size();
      i128 pk = 1;
      for (int k = 1; 2 * k <= pe.e; ++k) {
        pk *= i128(pe.p);
        for (std::size_t i = 0; i < base; ++i) sq.push_back(sq[i] * pk);
      }
    }
    ys.insert(ys.end(), sq.begin(), sq.end());
  }
  for (i128 y : ys) {
    const i128 y2 = checked_mul(y, y);
    for (i128 x : integer_roots_cubic(c.a4, c.a6 - y2)) {
      const RationalPoint P = RationalPoint::make(mpq_class(to_mpz(x)), mpq_class(to_mpz(y)));
      const int ord = torsion_order(c, P);
      if (ord == 0 || bound % ord != 0) continue;
      out.push_back(P);
      if (y != 0) out.push_back(negate(P));
    }
  }
  return out;
}

TorsionGroup torsion_subgroup(const Curve& c) {
  const std::vector<RationalPoint> pts = torsion_points(c);
  const int total = int(pts.size());
  int twos = 0;
  for (const auto& P : pts) {
    if (!P.infinity && sgn(P.y) == 0) ++twos;
  }
  TorsionGroup g;
  if (twos == 3) {
    g.m = 2;
    g.n = total / 2;
  } else {
    g.m = 1;
    g.n = total;
  }
  if (g.m * g.n != total || !mazur_allowed(g.m, g.n)) {
    throw std::logic_error("torsion_subgroup: " + std::to_string(total) + " points do not form a Mazur group");
  }
  if (total == 1) return g;
  const RationalPoint* big = nullptr;
  for (const auto& P : pts) {
    if (torsion_order(c, P) == g.n) {
      big = &P;
      break;
    }
  }
  if (big == nullptr) throw std::logic_error("torsion_subgroup: no point of maximal order");
  g.generators.push_back(*big);
  if (g.m == 2) {
    const RationalPoint half = multiply(c, *big, g.n / 2);
    for (const auto& P : pts) {
      if (!P.infinity && sgn(P.y) == 0 && !(P == half)) {
        g.generators.push_back(P);
        break;
      }
    }
  }
  return g;
}

std::vector<RationalPoint> search_points(const Curve& c, const SearchBounds& bounds) {
  if (bounds.numerator < 1 || bounds.denominator < 1) throw std::invalid_argument("search bounds must be >= 1");
  std::vector<RationalPoint> out;
  for (i64 e = 1; e <= bounds.denominator; ++e) {
    const i128 e2 = i128(e) * e, e4 = e2 * e2, e6 = e4 * e2;
    const i128 A = checked_mul(c.a4, e4), B = checked_mul(c.a6, e6);
    for (i64 m = -bounds.numerator; m <= bounds.numerator; ++m) {
      if (e > 1 && std::gcd(m, e) != 1) continue;
      const i128 M = m;
      const i128 N = M * M * M + A * M + B;
      i128 s;
      if (!is_square(N, &s)) continue;
      const mpq_class x(to_mpz(M), to_mpz(e2));
      const mpq_class y(to_mpz(s), to_mpz(e2 * e));
      out.push_back(RationalPoint::make(x, y));
    }
  }
  return out;
}

std::vector<u64> discriminant_primes(const Curve& c) {
  std::vector<u64> out;
  for (const auto& pe : factorize(discriminant(c))) out.push_back(u64(pe.p));
  return out;
}

namespace {

// Does P reduce to a nonsingular point of the short model mod p?
bool nonsingular_reduction(const Curve& c, const RationalPoint& P, u64 p) {
  if (P.infinity) return true;
  const mpz_class pz(static_cast<unsigned long>(p));
  if (mpz_divisible_p(P.x.get_den_mpz_t(), pz.get_mpz_t())) return true;
  auto residue = [&](const mpq_class& q) {
    mpz_class num = q.get_num() % pz, den = q.get_den() % pz;
    if (num < 0) num += pz;
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), pz.get_mpz_t());
    return u64(mpz_class(num * inv % pz).get_ui());
  };
  const u64 x = residue(P.x), y = residue(P.y);
  const u64 a4 = mod_u64(c.a4, p);
  const bool dy = mulmod(2, y, p) == 0;
  const bool dx = (mulmod(3 % p, mulmod(x, x, p), p) + a4) % p == 0;
  return !(dx && dy);
}

double log_mpz(const mpz_class& z) {
  if (sgn(z) == 0) throw std::domain_error("log of zero");
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(std::fabs(mant)) + double(exp2) * std::log(2.0);
}

long double to_long_double(const mpq_class& q) {
  long e1 = 0, e2 = 0;
  const double n = mpz_get_d_2exp(&e1, q.get_num_mpz_t());
  const double d = mpz_get_d_2exp(&e2, q.get_den_mpz_t());
  return std::ldexp(static_cast<long double>(n) / d, int(e1 - e2));
}

// Smallest real root of x^3 + a4 x + a6.
long double smallest_real_root(const Curve& c) {
  const long double a = static_cast<long double>(c.a4), b = static_cast<long double>(c.a6);
  auto f = [&](long double x) { return (x * x + a) * x + b; };
  long double bound = 1 + std::sqrt(std::fabs(a)) + std::cbrt(std::fabs(b));
  long double lo = -2 * bound, hi = 2 * bound;
  if (a < 0) {
    const long double sigma = std::sqrt(-a / 3);
    if (f(-sigma) >= 0) {
      hi = -sigma;
    } else {
      lo = sigma;
    }
  }
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    if (f(mid) < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Archimedean local height (Tate's series) without the discriminant term.
double lambda_infinity(const Curve& c, const RationalPoint& P) {
  const long double a4 = static_cast<long double>(c.a4), a6 = static_cast<long double>(c.a6);
  const long double K = 1 + std::sqrt(std::fabs(a4)) + std::cbrt(std::fabs(a6));
  const long double r = smallest_real_root(c) - K;
  const long double b2 = 12 * r;
  const long double b4 = 2 * a4 + 6 * r * r;
  const long double b6 = 4 * (r * r * r + a4 * r + a6);
  const long double b8 = -a4 * a4 + 12 * a6 * r + 6 * a4 * r * r + 3 * r * r * r * r;
  const long double xs = to_long_double(P.x) - r;
  if (!(xs > 0)) throw std::logic_error("lambda_infinity: shifted x not positive");
  long double t = 1 / xs;
  long double lambda = -0.5L * std::log(t);
  long double weight = 0.125L;
  for (int n = 0; n < 40; ++n) {
    const long double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
    const long double z = 1 - b4 * t2 - 2 * b6 * t3 - b8 * t4;
    const long double w = 4 * t + b2 * t2 + 2 * b4 * t3 + b6 * t4;
    if (!(z > 0)) throw std::logic_error("lambda_infinity: Tate series left its domain");
    lambda += weight * std::log(z);
    t = w / z;
    weight /= 4;
  }
  return double(lambda);
}

}  // namespace

namespace {

// Torsion points are integral with integral multiples, and have order <= 12.
bool is_torsion_point(const Curve& c, const RationalPoint& P) {
  RationalPoint Q = P;
  for (int k = 1; k <= 12; ++k) {
    if (Q.infinity) return true;
    if (Q.x.get_den() != 1 || Q.y.get_den() != 1) return false;
    Q = add(c, Q, P);
  }
  return Q.infinity;
}

}  // namespace

double canonical_height(const Curve& c, const RationalPoint& P, const std::vector<u64>& bad_primes) {
  if (!on_curve(c, P)) throw std::invalid_argument("canonical_height: point not on curve");
  if (is_torsion_point(c, P)) return 0.0;
  RationalPoint Q = P;
  long k = 1;
  for (;;) {
    if (Q.infinity) return 0.0;
    bool good = true;
    for (u64 p : bad_primes) {
      if (!nonsingular_reduction(c, Q, p)) {
        good = false;
        break;
      }
    }
    if (good) break;
    if (++k > 240) throw std::runtime_error("canonical_height: no multiple with nonsingular reduction");
    Q = add(c, Q, P);
  }
  const double finite = 0.5 * log_mpz(Q.x.get_den());
  const double silverman = lambda_infinity(c, Q) + finite;
  return 2.0 * silverman / double(k * k);
}

double canonical_height(const Curve& c, const RationalPoint& P) {
  return canonical_height(c, P, discriminant_primes(c));
}

double height_pairing(const Curve& c, const RationalPoint& P, const RationalPoint& Q,
                      const std::vector<u64>& bad_primes) {
  const double hp = canonical_height(c, P, bad_primes);
  const double hq = canonical_height(c, Q, bad_primes);
  const double hpq = canonical_height(c, add(c, P, Q), bad_primes);
  return (hpq - hp - hq) / 2;
}

double determinant(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  return det;
}

MordellWeilBasis rank_lower_bound(const Curve& c, const std::vector<RationalPoint>& pts,
                                  std::optional<int> max_rank, double tolerance) {
  MordellWeilBasis basis;
  if (max_rank && *max_rank <= 0) return basis;
  const std::vector<u64> bad = discriminant_primes(c);
  struct Candidate {
    RationalPoint P;
    double h;
  };
  std::vector<Candidate> cands;
  for (const auto& P : pts) {
    if (P.infinity) continue;
    const double h = canonical_height(c, P, bad);
    if (h > kTorsionHeightTolerance) cands.push_back({P, h});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.h < b.h; });
  constexpr std::size_t kMaxCandidates = 500;
  if (cands.size() > kMaxCandidates) cands.resize(kMaxCandidates);

  std::vector<double> heights;
  for (const auto& cand : cands) {
    const std::size_t r = basis.points.size();
    std::vector<double> row(r + 1);
    for (std::size_t i = 0; i < r; ++i) {
      const double hs = canonical_height(c, add(c, basis.points[i], cand.P), bad);
      row[i] = (hs - heights[i] - cand.h) / 2;
    }
    row[r] = cand.h;
    auto gram = basis.gram;
    for (std::size_t i = 0; i < r; ++i) gram[i].push_back(row[i]);
    gram.push_back(row);
    const double det = determinant(gram);
    if (det > tolerance) {
      basis.points.push_back(cand.P);
      heights.push_back(cand.h);
      basis.gram = std::move(gram);
      basis.regulator = det;
      if (max_rank && int(basis.points.size()) >= *max_rank) break;
    }
  }
  basis.rank_lower = int(basis.points.size());
  return basis;
}

}  // namespace ecdb
