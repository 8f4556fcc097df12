#pragma once

// Explicit-formula bound on the analytic rank with the Fejer kernel
// sinc^2(Delta x) and its triangular Fourier transform.

#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ecdb/lfunc.hpp"

namespace ecdb {

struct SpecialConstants {
  static constexpr double euler_gamma = std::numbers::egamma;
  static constexpr double pi = std::numbers::pi;
  /// zeta(10) = pi^10 / 93555
  static constexpr double zeta10 = 1.0009945751278180853;
};

/// (sin(pi delta x) / (pi delta x))^2, equal to 1 at x = 0.
double sinc2(double delta, double x);

/// Fourier transform of sinc2(delta, .): (1/delta)(1 - |y|/(2 pi delta)) on
/// |y| <= 2 pi delta, zero outside.
double fejer_fourier(double delta, double y);

/// Li2(x) = sum x^n / n^2 for |x| <= 1; terms are added until one falls
/// below 1e-18.
double dilog(double x);

/// Re integral over R of psi(1 + i t) sinc^2(delta t) dt
///   = -gamma/delta + (pi^2/6 - Li2(exp(-2 pi delta))) / (2 pi delta^2).
double digamma_term(double delta);

/// Default numerical slack on floor() of the zero sum.
inline constexpr double kZeroSumSlack = 1e-6;

struct ZeroSumResult {
  double delta = 0;
  double sum_value = 0;
  int rank_ceiling = 0;
};

/// Thrown when a coefficient table does not reach exp(2 pi delta).
class InsufficientTable : public std::runtime_error {
 public:
  InsufficientTable(u64 required, u64 available);
  u64 required() const { return required_; }

 private:
  u64 required_;
};

/// ceil(exp(2 pi delta)): the table limit needed by zero_sum_bound.
u64 required_table_limit(double delta);

/// Upper bound for sum over zeros gamma of sinc^2(delta gamma):
///   (1/(delta pi)) [ -gamma_E + log(sqrt(N)/(2 pi))
///                    + (pi^2/6 - Li2(exp(-2 pi delta))) / (2 pi delta)
///                    + sum_{n < exp(2 pi delta)} c_n (1 - log n / (2 pi delta)) ]
/// Under GRH this bounds the analytic rank from above.
ZeroSumResult zero_sum_bound(i128 conductor, double delta, const CoeffTable& coeffs,
                             double slack = kZeroSumSlack);

/// The Delta values used when the caller gives none.
std::vector<double> default_delta_schedule();

struct EscalationResult {
  ZeroSumResult last;
  std::vector<ZeroSumResult> history;
  bool conclusive = false;
};

/// Evaluates the bound along an ascending schedule (max 3.9), extending the
/// table as needed, and stops at the first ceiling <= lower + margin.
/// margin 1 leaves the last step to parity, margin 0 asks for equality.
EscalationResult escalate(const ReductionProfile& profile, i128 conductor, int lower,
                          const std::vector<double>& schedule, CoeffTable& table, int margin = 1,
                          double slack = kZeroSumSlack);
EscalationResult escalate(const Curve& c, int lower, const std::vector<double>& schedule, int margin = 1);

/// Per-term data behind one evaluation, for plotting.
struct ZeroSumTerms {
  double delta = 0;
  double conductor_term = 0;   ///< -gamma_E + log(sqrt(N)/(2 pi))
  double dilog_term = 0;       ///< (pi^2/6 - Li2) / (2 pi delta)
  struct Term {
    u64 n;
    double c;
    double weight;        ///< 1 - log n / (2 pi delta)
    double contribution;  ///< c * weight / (delta pi)
    double cumulative;    ///< running total of the bound through n
  };
  std::vector<Term> terms;
  double total = 0;
};

ZeroSumTerms zero_sum_terms(i128 conductor, double delta, const CoeffTable& coeffs);

/// CSV with a commented preamble holding the constant terms.
void write_zero_sum_csv(std::ostream& os, const ZeroSumTerms& t);

}  // namespace ecdb
