#pragma once

#include <string>
#include <vector>

#include "ecdb/model.hpp"

namespace ecdb {

enum class KodairaType { I0, In, II, III, IV, I0s, Ins, IVs, IIIs, IIs };

struct KodairaSymbol {
  KodairaType type = KodairaType::I0;
  int n = 0;  ///< subscript for In and In*
  std::string str() const;  ///< "I0", "I5", "III", "I2*", "IV*", ...
  bool operator==(const KodairaSymbol&) const = default;
};

enum class Reduction { good, split_multiplicative, nonsplit_multiplicative, additive };

std::string to_string(Reduction r);

struct LocalData {
  u64 p = 0;
  KodairaSymbol kodaira;
  int f_p = 0;             ///< conductor exponent
  int c_p = 1;             ///< Tamagawa number
  Reduction reduction = Reduction::good;
  int ord_disc = 0;        ///< valuation of the local minimal discriminant
  Weierstrass minimal_model;  ///< a model minimal at p
};

/// Tate's algorithm at p, including the non-minimal restart. p must be
/// prime and the model nonsingular.
LocalData tate_local(const Weierstrass& model, u64 p);
LocalData tate_local(const Curve& c, u64 p);

/// Local data at every prime dividing the discriminant, ascending by p.
std::vector<LocalData> bad_primes(const Curve& c);

i128 conductor(const Curve& c);
i128 conductor(const std::vector<LocalData>& local);
i128 tamagawa_product(const Curve& c);
i128 tamagawa_product(const std::vector<LocalData>& local);

enum class RootNumberMethod { local_formulas, numeric_functional_equation, unavailable };

struct RootNumber {
  int value = 0;  ///< +1, -1, or 0 for unknown
  RootNumberMethod method = RootNumberMethod::unavailable;
  bool known() const { return value != 0; }
};

/// Budget for the numeric route: coefficients up to ceil(coefficient_factor *
/// sqrt(N)) are summed, never more than max_coefficients, and a sign is only
/// reported when one residual is below accept_tolerance while the other
/// exceeds reject_tolerance.
struct NumericRootOptions {
  double coefficient_factor = 10.0;
  u64 max_coefficients = 5'000'000;
  double accept_tolerance = 1e-6;
  double reject_tolerance = 1e-2;
};

/// Product of local root numbers with w_inf = -1. Multiplicative primes give
/// -1 (split) or +1 (nonsplit); additive p >= 5 use the Kodaira/character
/// classification. Additive reduction at 2 or 3 falls back to the numeric
/// route when allow_numeric is set, otherwise the result is unknown.
RootNumber root_number(const Curve& c, bool allow_numeric = true,
                       const NumericRootOptions& options = {});
RootNumber root_number(const Curve& c, const std::vector<LocalData>& local, bool allow_numeric,
                       const NumericRootOptions& options = {});

/// Sign of the functional equation from the theta-series reflection
/// F(1/y) = w y^2 F(y), F(y) = sum a_n exp(-2 pi n y / sqrt(N)).
RootNumber root_number_numeric(const Curve& c, const NumericRootOptions& options = {});
RootNumber root_number_numeric(const Curve& c, const std::vector<LocalData>& local,
                               const NumericRootOptions& options = {});

}  // namespace ecdb
