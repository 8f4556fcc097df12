#pragma once

// Point counts over F_p and the Dirichlet coefficients of L_E(s).

#include <utility>
#include <vector>

#include "ecdb/local.hpp"
#include "ecdb/model.hpp"

namespace ecdb {

/// #E(F_p) on the reduction of a general model, singular or not, counting the
/// point at infinity. Exhaustive over F_p x F_p; for tests and p <= 3.
i64 count_points_naive(const Weierstrass& model, u64 p);

/// p + 1 + sum_x (f(x)/p) for y^2 = f(x) = x^3 + a4 x + a6, p odd.
i64 count_points_charsum(i128 a4, i128 a6, u64 p);

/// Baby-step giant-step on E and its quadratic twist (Mestre). Requires
/// good reduction, p >= 229 and p < 2^31.
i64 count_points_bsgs(i128 a4, i128 a6, u64 p);

/// Primes below this use the character sum, primes above use BSGS.
inline constexpr u64 kBsgsThreshold = 1000;

/// Curve together with its bad-prime data, so that a_p at many primes does
/// not repeat Tate's algorithm.
class ReductionProfile {
 public:
  explicit ReductionProfile(const Curve& c);
  ReductionProfile(const Curve& c, std::vector<LocalData> local);

  const Curve& curve() const { return curve_; }
  const std::vector<LocalData>& local() const { return local_; }
  /// nullptr when the curve has good reduction at p.
  const LocalData* at(u64 p) const;

  /// #E~(F_p) on the local minimal model.
  i64 count_points(u64 p) const;
  /// a_p = p + 1 - #E~(F_p); 0, +1, -1 at additive, split, nonsplit primes.
  i64 trace(u64 p) const;

 private:
  Curve curve_;
  std::vector<LocalData> local_;
  std::vector<LocalData> small_;  // tate_local at 2 and 3, good or bad
};

/// Convenience wrapper around ReductionProfile.
i64 count_points_mod_p(const Curve& c, u64 p);

/// s_e = alpha^e + beta^e for e = 1..emax, where p^e + 1 - s_e is the point
/// count over F_{p^e}: s_e = a_p s_{e-1} - p s_{e-2} with s_0 = 2 at good
/// primes, (a_p)^e at multiplicative primes, 0 at additive primes.
std::vector<i64> ap_powers(const ReductionProfile& profile, u64 p, int emax);
std::vector<i64> ap_powers(const Curve& c, u64 p, int emax);

/// Coefficients a_1..a_nmax of the L-series (index 0 unused): multiplicative
/// in n, with a_{p^e} = a_p a_{p^{e-1}} - p a_{p^{e-2}} at good p and
/// (a_p)^e at bad p.
std::vector<i64> dirichlet_coefficients(const ReductionProfile& profile, u64 nmax);

/// Sparse table of c_n = -s_e log(p) / p^e at prime powers n = p^e < limit.
class CoeffTable {
 public:
  struct Entry {
    u64 n;
    double c;
  };

  CoeffTable() = default;
  CoeffTable(const ReductionProfile& profile, u64 limit);

  /// Adds entries for limit() <= n < new_limit; a smaller value is a no-op.
  void extend(const ReductionProfile& profile, u64 new_limit);

  /// Seeds a_p values (typically from a cache) for primes below limit so that
  /// construction skips counting them.
  void preload_traces(std::vector<std::pair<u64, i64>> traces);

  Curve curve() const { return curve_; }
  u64 limit() const { return limit_; }
  /// Entries ordered by n.
  const std::vector<Entry>& entries() const { return entries_; }
  /// (p, a_p) for every prime p < limit, ascending.
  const std::vector<std::pair<u64, i64>>& traces() const { return traces_; }
  /// c_n, or 0 when n is not a prime power; n must be below limit().
  double c(u64 n) const;

 private:
  Curve curve_;
  u64 limit_ = 2;
  std::vector<Entry> entries_;
  std::vector<std::pair<u64, i64>> traces_;
  std::vector<std::pair<u64, i64>> preloaded_;
};

}  // namespace ecdb
