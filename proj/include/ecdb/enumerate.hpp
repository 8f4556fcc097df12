#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ecdb/model.hpp"

namespace ecdb {

/// Half-open height window [lo, hi). "Height up to X" is [0, X + 1).
struct HeightWindow {
  HeightKind kind = HeightKind::naive;
  i128 lo = 0;
  i128 hi = 0;

  /// Throws std::invalid_argument unless 0 <= lo < hi <= 2^100.
  void validate() const;
  bool contains(i128 h) const { return lo <= h && h < hi; }
  bool operator==(const HeightWindow&) const = default;
};

/// Inclusive a4 range that can contain curves of the window.
struct CoefficientRange {
  i128 lo;
  i128 hi;
};
CoefficientRange a4_range(const HeightWindow& w);

/// Streams every nonsingular minimal curve with height in the window, ordered
/// by a4 then a6. The optional a4 slice restricts the scan so that disjoint
/// slices can run on separate threads. Kind must be naive or uncalibrated.
void enumerate_window(const HeightWindow& w, const std::function<void(const Curve&)>& emit,
                      std::optional<CoefficientRange> a4_slice = std::nullopt);

std::vector<Curve> enumerate_curves(const HeightWindow& w);

/// Marked-point family. One representative per Q-isomorphism class of the
/// underlying curve: the triple of least H1, ties broken by (a2, a3, a4).
/// A class is emitted by the window containing its representative's height,
/// so sibling windows tile without double counting. Output is ordered by
/// (a2, a3, a4).
void enumerate_f1_window(const HeightWindow& w, const std::function<void(const F1Curve&)>& emit);

struct SampleSpec {
  int k = 11;
  std::size_t count = 1;
  u64 seed = 0;

  void validate() const;
  i128 band_lo() const;
  i128 band_hi() const;
};

/// Uniform rejection sampling over the coefficient box 4|a4|^3 < 2*10^k,
/// 27 a6^2 < 2*10^k, keeping nonsingular minimal curves of naive height in
/// [10^k, 2*10^k). Draws are made with std::mt19937_64 seeded by spec.seed,
/// mapped to ranges by rejection (not std::uniform_int_distribution, whose
/// output differs between standard libraries). Duplicate draws are skipped.
std::vector<Curve> sample_band(const SampleSpec& spec);

struct WindowCount {
  i128 count = 0;
  /// (4 / zeta(10)) X^(5/6) for uncalibrated windows [0, X + 1).
  std::optional<double> predicted;
  std::optional<double> ratio;
};

WindowCount count_window(const HeightWindow& w);

}  // namespace ecdb
