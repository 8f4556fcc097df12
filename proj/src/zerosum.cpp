#include "ecdb/zerosum.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace ecdb {

namespace {

constexpr double kPi = SpecialConstants::pi;

// Neumaier's variant of Kahan summation in extended precision.
class CompensatedSum {
 public:
  void add(long double v) {
    const long double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0;
  long double comp_ = 0;
};

void check_delta(double delta) {
  if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
}

}  // namespace

double sinc2(double delta, double x) {
  check_delta(delta);
  const double u = kPi * delta * x;
  if (u == 0.0) return 1.0;
  if (std::fabs(u) < 1e-4) {
    // series keeps full relative precision near the removable singularity
    const double u2 = u * u;
    const double s = 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
    return s * s;
  }
  const double s = std::sin(u) / u;
  return s * s;
}

double fejer_fourier(double delta, double y) {
  check_delta(delta);
  const double a = std::fabs(y);
  const double support = 2.0 * kPi * delta;
  if (a >= support) return 0.0;
  return (1.0 - a / support) / delta;
}

double dilog(double x) {
  if (std::fabs(x) > 1.0) throw std::domain_error("dilog: series needs |x| <= 1");
  double sum = 0.0;
  double power = x;
  for (int n = 1; n < 100000; ++n) {
    const double term = power / (double(n) * n);
    sum += term;
    if (std::fabs(term) < 1e-18) break;
    power *= x;
  }
  return sum;
}

double digamma_term(double delta) {
  check_delta(delta);
  const double li = dilog(std::exp(-2.0 * kPi * delta));
  return -SpecialConstants::euler_gamma / delta + (kPi * kPi / 6.0 - li) / (2.0 * kPi * delta * delta);
}

namespace {

std::string insufficient_message(u64 required, u64 available) {
  std::ostringstream os;
  os << "coefficient table covers n < " << available << " but the zero sum needs L = " << required;
  return os.str();
}

}  // namespace

InsufficientTable::InsufficientTable(u64 required, u64 available)
    : std::runtime_error(insufficient_message(required, available)), required_(required) {}

u64 required_table_limit(double delta) {
  check_delta(delta);
  return u64(std::ceil(std::exp(2.0 * kPi * delta)));
}

namespace {

struct Constants {
  double conductor_term;
  double dilog_term;
};

Constants constant_terms(i128 conductor, double delta) {
  if (conductor < 1) throw std::invalid_argument("zero_sum_bound: conductor must be positive");
  const double t = 2.0 * kPi * delta;
  const double logN = std::log(double(conductor));
  return {-SpecialConstants::euler_gamma + 0.5 * logN - std::log(2.0 * kPi),
          (kPi * kPi / 6.0 - dilog(std::exp(-t))) / t};
}

}  // namespace

ZeroSumResult zero_sum_bound(i128 conductor, double delta, const CoeffTable& coeffs, double slack) {
  check_delta(delta);
  const u64 need = required_table_limit(delta);
  if (coeffs.limit() < need) throw InsufficientTable(need, coeffs.limit());
  const double t = 2.0 * kPi * delta;
  const Constants k = constant_terms(conductor, delta);
  CompensatedSum acc;
  acc.add(k.conductor_term);
  acc.add(k.dilog_term);
  for (const auto& e : coeffs.entries()) {
    const double logn = std::log(double(e.n));
    if (logn >= t) break;
    acc.add(static_cast<long double>(e.c) * (1.0L - logn / t));
  }
  ZeroSumResult r;
  r.delta = delta;
  r.sum_value = double(acc.value() / (static_cast<long double>(delta) * kPi));
  r.rank_ceiling = std::max(0, int(std::floor(r.sum_value + slack)));
  return r;
}

std::vector<double> default_delta_schedule() { return {1.0, 1.5, 2.0, 2.5, 3.0}; }

EscalationResult escalate(const ReductionProfile& profile, i128 conductor, int lower,
                          const std::vector<double>& schedule, CoeffTable& table, int margin, double slack) {
  if (schedule.empty()) throw std::invalid_argument("escalate: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    check_delta(schedule[i]);
    if (schedule[i] > 3.9) throw std::invalid_argument("escalate: delta above 3.9");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw std::invalid_argument("escalate: schedule must ascend");
  }
  EscalationResult out;
  for (double delta : schedule) {
    table.extend(profile, required_table_limit(delta));
    ZeroSumResult r = zero_sum_bound(conductor, delta, table, slack);
    // the ceiling may only fall along the schedule
    if (!out.history.empty()) r.rank_ceiling = std::min(r.rank_ceiling, out.history.back().rank_ceiling);
    out.history.push_back(r);
    out.last = r;
    if (r.rank_ceiling <= lower + margin) {
      out.conclusive = true;
      break;
    }
  }
  return out;
}

EscalationResult escalate(const Curve& c, int lower, const std::vector<double>& schedule, int margin) {
  const ReductionProfile profile(c);
  CoeffTable table(profile, 2);
  return escalate(profile, conductor(profile.local()), lower, schedule, table, margin);
}

ZeroSumTerms zero_sum_terms(i128 conductor, double delta, const CoeffTable& coeffs) {
  check_delta(delta);
  const u64 need = required_table_limit(delta);
  if (coeffs.limit() < need) throw InsufficientTable(need, coeffs.limit());
  const double t = 2.0 * kPi * delta;
  const double scale = 1.0 / (delta * kPi);
  const Constants k = constant_terms(conductor, delta);
  ZeroSumTerms out;
  out.delta = delta;
  out.conductor_term = k.conductor_term;
  out.dilog_term = k.dilog_term;
  CompensatedSum acc;
  acc.add(k.conductor_term);
  acc.add(k.dilog_term);
  for (const auto& e : coeffs.entries()) {
    const double logn = std::log(double(e.n));
    if (logn >= t) break;
    const double w = 1.0 - logn / t;
    acc.add(static_cast<long double>(e.c) * w);
    out.terms.push_back({e.n, e.c, w, e.c * w * scale, double(acc.value()) * scale});
  }
  out.total = double(acc.value()) * scale;
  return out;
}

void write_zero_sum_csv(std::ostream& os, const ZeroSumTerms& t) {
  os << std::setprecision(17);
  os << "# delta," << t.delta << "\n";
  os << "# conductor_term," << t.conductor_term << "\n";
  os << "# dilog_term," << t.dilog_term << "\n";
  os << "# total," << t.total << "\n";
  os << "n,c_n,weight,contribution,cumulative\n";
  for (const auto& term : t.terms) {
    os << term.n << ',' << term.c << ',' << term.weight << ',' << term.contribution << ',' << term.cumulative
       << '\n';
  }
}

}  // namespace ecdb
