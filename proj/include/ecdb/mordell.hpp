#pragma once

// Torsion subgroups, rational point search, canonical heights and rank
// lower bounds on y^2 = x^3 + a4 x + a6.

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "ecdb/model.hpp"

namespace ecdb {

struct RationalPoint {
  mpq_class x;
  mpq_class y;
  bool infinity = false;

  static RationalPoint at_infinity() { return {0, 0, true}; }
  static RationalPoint make(const mpq_class& x, const mpq_class& y);

  bool operator==(const RationalPoint& o) const;
  std::string str() const;  ///< "(x,y)" or "O"
};

bool on_curve(const Curve& c, const RationalPoint& P);

RationalPoint negate(const RationalPoint& P);
RationalPoint add(const Curve& c, const RationalPoint& P, const RationalPoint& Q);
RationalPoint multiply(const Curve& c, const RationalPoint& P, long n);

/// Z/m x Z/n with m | n and m in {1, 2}.
struct TorsionGroup {
  int m = 1;
  int n = 1;
  std::vector<RationalPoint> generators;

  int order() const { return m * n; }
  /// "trivial", "Z/5", "Z/2xZ/4".
  std::string label() const;
  bool same_structure(const TorsionGroup& o) const { return m == o.m && n == o.n; }
};

/// Parses a label produced by TorsionGroup::label (generators left empty).
TorsionGroup parse_torsion_label(const std::string& s);

/// True iff Z/m x Z/n is one of Mazur's fifteen groups.
bool mazur_allowed(int m, int n);

/// All torsion points (including O) via Nagell-Lutz candidates, each order
/// checked with the exact group law.
std::vector<RationalPoint> torsion_points(const Curve& c);

/// Structure and generators. Throws std::logic_error if the points found do
/// not form one of Mazur's groups.
TorsionGroup torsion_subgroup(const Curve& c);

/// x = m / e^2 in lowest terms with |m| <= numerator and 1 <= e <= denominator.
struct SearchBounds {
  i64 numerator = 1000;
  i64 denominator = 8;

  SearchBounds scaled(i64 factor) const { return {numerator * factor, denominator * factor}; }
};

/// Every affine point with x in the box; for each x only the point with
/// y >= 0 is returned. Membership is checked exactly.
std::vector<RationalPoint> search_points(const Curve& c, const SearchBounds& bounds = {});

/// lim h(x(2^n P)) / 4^n with h(a/b) = log max(|a|, |b|), evaluated as a sum of
/// local heights: Tate's series at infinity on a shifted model and the
/// denominator of x at the finite places, after multiplying P into the
/// subgroup of points with nonsingular reduction. bad_primes must contain
/// every prime dividing the discriminant of the short model.
double canonical_height(const Curve& c, const RationalPoint& P, const std::vector<u64>& bad_primes);
double canonical_height(const Curve& c, const RationalPoint& P);

/// The primes dividing the discriminant of the short model.
std::vector<u64> discriminant_primes(const Curve& c);

/// <P, Q> = (h(P + Q) - h(P) - h(Q)) / 2.
double height_pairing(const Curve& c, const RationalPoint& P, const RationalPoint& Q,
                      const std::vector<u64>& bad_primes);

/// Determinant of a symmetric matrix by Gaussian elimination with pivoting.
double determinant(std::vector<std::vector<double>> a);

inline constexpr double kIndependenceTolerance = 1e-6;
inline constexpr double kTorsionHeightTolerance = 1e-8;

struct MordellWeilBasis {
  std::vector<RationalPoint> points;
  std::vector<std::vector<double>> gram;
  double regulator = 1.0;  ///< determinant of gram; 1 for the empty basis
  int rank_lower = 0;
};

/// Greedy selection: candidates are taken in order of increasing canonical
/// height and kept when the Gram determinant of the enlarged set exceeds
/// the tolerance. Stops early once max_rank points are selected.
MordellWeilBasis rank_lower_bound(const Curve& c, const std::vector<RationalPoint>& pts,
                                  std::optional<int> max_rank = std::nullopt,
                                  double tolerance = kIndependenceTolerance);

}  // namespace ecdb
