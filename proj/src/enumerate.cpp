#include "ecdb/enumerate.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "ecdb/zerosum.hpp"

namespace ecdb {

namespace {

constexpr i128 kWindowLimit = i128(1) << 100;

struct HeightWeights {
  i128 cube;    // coefficient on |a4|^3
  i128 square;  // coefficient on a6^2
};

HeightWeights weights(HeightKind kind) {
  switch (kind) {
    case HeightKind::naive: return {4, 27};
    case HeightKind::uncalibrated: return {1, 1};
    case HeightKind::f1: break;
  }
  throw std::invalid_argument("enumerate_window: f1 windows use enumerate_f1_window");
}

// Largest t >= 0 with coef * t^k <= bound.
i128 max_root(i128 bound, i128 coef, int k) {
  if (bound < 0) return -1;
  return i128(integer_nth_root(u128(bound / coef), k));
}

// Smallest t >= 0 with coef * t^k >= bound.
i128 min_root(i128 bound, i128 coef, int k) {
  if (bound <= 0) return 0;
  i128 t = max_root(bound - 1, coef, k) + 1;
  return t;
}

}  // namespace

void HeightWindow::validate() const {
  if (lo < 0 || lo >= hi) throw std::invalid_argument("height window must satisfy 0 <= lo < hi");
  if (hi > kWindowLimit) throw std::invalid_argument("height window exceeds 2^100");
}

CoefficientRange a4_range(const HeightWindow& w) {
  w.validate();
  const HeightWeights hw = weights(w.kind);
  const i128 a = max_root(w.hi - 1, hw.cube, 3);
  return {-a, a};
}

void enumerate_window(const HeightWindow& w, const std::function<void(const Curve&)>& emit,
                      std::optional<CoefficientRange> a4_slice) {
  w.validate();
  const HeightWeights hw = weights(w.kind);
  CoefficientRange r = a4_range(w);
  if (a4_slice) {
    r.lo = std::max(r.lo, a4_slice->lo);
    r.hi = std::min(r.hi, a4_slice->hi);
  }
  const i128 b_max = max_root(w.hi - 1, hw.square, 2);
  const i128 b_min = min_root(w.lo, hw.square, 2);
  for (i128 a4 = r.lo; a4 <= r.hi; ++a4) {
    const i128 abs4 = a4 < 0 ? -a4 : a4;
    const i128 cube_term = hw.cube * abs4 * abs4 * abs4;
    // Once the a4 term reaches lo, every a6 in the box is in the window.
    const i128 inner = cube_term >= w.lo ? 0 : b_min;
    auto visit = [&](i128 a6) {
      const Curve c{a4, a6};
      if (4 * abs4 * abs4 * abs4 == 27 * a6 * a6 && a4 <= 0) return;  // singular
      if (!is_minimal(c)) return;
      emit(c);
    };
    for (i128 a6 = -b_max; a6 <= -inner; ++a6) visit(a6);
    for (i128 a6 = std::max<i128>(inner, inner == 0 ? 1 : inner); a6 <= b_max; ++a6) visit(a6);
  }
}

std::vector<Curve> enumerate_curves(const HeightWindow& w) {
  std::vector<Curve> out;
  enumerate_window(w, [&](const Curve& c) { out.push_back(c); });
  return out;
}

namespace {

struct CurveHash {
  std::size_t operator()(const Curve& c) const {
    u64 h = u64(c.a4) * 0x9E3779B97F4A7C15ULL;
    h ^= u64(c.a6) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return std::size_t(h);
  }
};

bool f1_precedes(const F1Curve& a, i128 ha, const F1Curve& b, i128 hb) {
  if (ha != hb) return ha < hb;
  return a < b;
}

}  // namespace

void enumerate_f1_window(const HeightWindow& w, const std::function<void(const F1Curve&)>& emit) {
  w.validate();
  if (w.kind != HeightKind::f1) throw std::invalid_argument("enumerate_f1_window: window kind must be f1");
  const i128 top = w.hi - 1;
  const i128 a2_max = i128(integer_nth_root(u128(top), 6));
  const i128 a3_max = i128(integer_nth_root(u128(top), 4));
  const i128 a4_max = i128(integer_nth_root(u128(top), 3));

  // Representative per isomorphism class among all triples of height < hi.
  struct Best {
    F1Curve curve;
    i128 h;
  };
  std::unordered_map<Curve, Best, CurveHash> best;
  for (i128 a2 = -a2_max; a2 <= a2_max; ++a2) {
    for (i128 a3 = -a3_max; a3 <= a3_max; ++a3) {
      for (i128 a4 = -a4_max; a4 <= a4_max; ++a4) {
        const F1Curve c{a2, a3, a4};
        if (discriminant_f1(c) == 0) continue;
        const i128 h = height_f1(c);
        const Curve key = f1_to_short(c).curve;
        auto it = best.find(key);
        if (it == best.end()) {
          best.emplace(key, Best{c, h});
        } else if (f1_precedes(c, h, it->second.curve, it->second.h)) {
          it->second = {c, h};
        }
      }
    }
  }
  std::vector<F1Curve> out;
  for (const auto& [key, b] : best) {
    if (w.contains(b.h)) out.push_back(b.curve);
  }
  std::sort(out.begin(), out.end());
  for (const auto& c : out) emit(c);
}

void SampleSpec::validate() const {
  if (k < 1 || k > 30) throw std::invalid_argument("sample band exponent k must lie in [1, 30]");
  if (count < 1) throw std::invalid_argument("sample count must be positive");
}

i128 SampleSpec::band_lo() const { return checked_pow(10, unsigned(k)); }
i128 SampleSpec::band_hi() const { return 2 * band_lo(); }

namespace {

// Uniform integer in [0, n] from a 64-bit engine by rejection.
u64 uniform_upto(std::mt19937_64& rng, u64 n) {
  if (n == UINT64_MAX) return rng();
  const u64 range = n + 1;
  const u64 limit = UINT64_MAX - (UINT64_MAX % range);
  u64 v;
  do {
    v = rng();
  } while (v >= limit);
  return v % range;
}

}  // namespace

std::vector<Curve> sample_band(const SampleSpec& spec) {
  spec.validate();
  const i128 lo = spec.band_lo(), hi = spec.band_hi();
  // strict box: 4|a4|^3 < hi and 27 a6^2 < hi
  const i128 a_max = max_root(hi - 1, 4, 3);
  const i128 b_max = max_root(hi - 1, 27, 2);
  std::mt19937_64 rng(spec.seed);
  std::set<Curve> seen;
  std::vector<Curve> out;
  out.reserve(spec.count);
  while (out.size() < spec.count) {
    const i128 a4 = i128(uniform_upto(rng, u64(2 * a_max))) - a_max;
    const i128 a6 = i128(uniform_upto(rng, u64(2 * b_max))) - b_max;
    const Curve c{a4, a6};
    if (discriminant(c) == 0 || !is_minimal(c)) continue;
    const i128 h = height_naive(c);
    if (h < lo || h >= hi) continue;
    if (!seen.insert(c).second) continue;
    out.push_back(c);
  }
  return out;
}

WindowCount count_window(const HeightWindow& w) {
  WindowCount out;
  if (w.kind == HeightKind::f1) {
    enumerate_f1_window(w, [&](const F1Curve&) { ++out.count; });
    return out;
  }
  const CoefficientRange r = a4_range(w);
  enumerate_window(w, [&](const Curve&) { ++out.count; }, r);
  if (w.kind == HeightKind::uncalibrated && w.lo == 0) {
    const double x = double(w.hi - 1);
    out.predicted = 4.0 / SpecialConstants::zeta10 * std::pow(x, 5.0 / 6.0);
    out.ratio = double(out.count) / *out.predicted;
  }
  return out;
}

}  // namespace ecdb
