#pragma once

// Curve representations, heights, discriminants, j-invariants, CM detection
// and minimality for the short family y^2 = x^3 + a4 x + a6 and for the
// marked-point family y^2 + a3 y = x^3 + a2 x^2 + a4 x.

#include <array>
#include <compare>
#include <string>

#include "ecdb/arith.hpp"

namespace ecdb {

struct Rational {
  i128 num = 0;
  i128 den = 1;

  /// Normalizes to lowest terms with den > 0. Throws on den = 0.
  static Rational make(i128 num, i128 den);
  bool operator==(const Rational&) const = default;
  std::string str() const;
};

/// y^2 = x^3 + a4 x + a6.
struct Curve {
  i128 a4 = 0;
  i128 a6 = 0;
  auto operator<=>(const Curve&) const = default;
  std::string str() const;
};

/// y^2 + a3 y = x^3 + a2 x^2 + a4 x, with marked point (0, 0).
struct F1Curve {
  i128 a2 = 0;
  i128 a3 = 0;
  i128 a4 = 0;
  auto operator<=>(const F1Curve&) const = default;
};

enum class HeightKind { naive, uncalibrated, f1 };

std::string to_string(HeightKind k);
/// Throws std::invalid_argument for unknown names.
HeightKind parse_height_kind(std::string_view s);

/// General integral Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
struct Weierstrass {
  i128 a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;

  static Weierstrass from(const Curve& c) { return {0, 0, 0, c.a4, c.a6}; }
  static Weierstrass from(const F1Curve& c) { return {0, c.a2, c.a3, c.a4, 0}; }

  i128 b2() const;
  i128 b4() const;
  i128 b6() const;
  i128 b8() const;
  i128 c4() const;
  i128 c6() const;
  i128 discriminant() const;

  /// The model obtained by x = x' + r, y = y' + s x' + t (unit scaling u = 1).
  Weierstrass shifted(i128 r, i128 s, i128 t) const;
  /// Divides a_i by u^i; the caller guarantees divisibility.
  Weierstrass scaled_down(i128 u) const;

  bool operator==(const Weierstrass&) const = default;
};

i128 height_naive(const Curve& c);
i128 height_uncalibrated(const Curve& c);
i128 height_f1(const F1Curve& c);
i128 height(const Curve& c, HeightKind kind);

/// -16 (4 a4^3 + 27 a6^2).
i128 discriminant(const Curve& c);
i128 discriminant_f1(const F1Curve& c);

/// False iff some prime p has p^4 | a4 and p^6 | a6 (zero is divisible by
/// every prime power).
bool is_minimal(const Curve& c);

struct MinimalReduction {
  Curve curve;
  i128 scale = 1;  ///< a4 = scale^4 * curve.a4, a6 = scale^6 * curve.a6
};

MinimalReduction reduce_to_minimal(const Curve& c);

struct ShortModel {
  Curve curve;
  /// disc(curve) = scale^12 * discriminant_f1(input).
  Rational scale;
};

/// Short model y^2 = x^3 - 27 c4 x - 54 c6, reduced to minimal. Throws
/// std::domain_error for singular input.
ShortModel f1_to_short(const F1Curve& c);

/// j = 1728 * 4 a4^3 / (4 a4^3 + 27 a6^2). Throws std::domain_error if singular.
Rational j_invariant(const Curve& c);

/// The thirteen rational j-invariants of CM curves, one per imaginary
/// quadratic order of class number one, keyed by the order's discriminant.
struct CmJInvariant {
  int discriminant;
  i128 j;
};
const std::array<CmJInvariant, 13>& cm_j_invariants();

bool is_cm(const Curve& c);

}  // namespace ecdb
