#pragma once

// Mergeable aggregates over curve records and the reference formulas the
// results are compared with.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecdb/pipeline.hpp"

namespace ecdb {

/// Integer moments for a Pearson coefficient; merging is exact.
struct Moments {
  u64 n = 0;
  i64 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

  void add(i64 x, i64 y);
  void merge(const Moments& o);
  std::optional<double> r() const;
  bool operator==(const Moments&) const = default;
};

/// Ratio between consecutive bucket edges of the running-average series.
inline constexpr double kSeriesRatio = 1.1;

/// Bucket k holds heights in [1.1^k, 1.1^(k+1)); heights below 1 go to bucket 0.
int series_bucket(i128 height);
double series_bucket_upper(int bucket);

struct MinimalRecord {
  i128 height = 0;
  std::vector<Curve> curves;  ///< sorted, all ties kept
  bool operator==(const MinimalRecord&) const = default;
};

struct StatReport {
  HeightKind kind = HeightKind::naive;
  u64 count = 0;
  u64 undetermined = 0;
  i128 max_height = 0;
  std::map<int, u64> rank_histogram;
  /// Per series bucket, histogram of determined ranks.
  std::map<int, std::map<int, u64>> buckets;
  /// Keyed by sign of the discriminant (+1, -1).
  std::map<int, std::map<int, u64>> rank_by_disc_sign;
  std::map<int, u64> disc_sign_count;
  std::map<std::string, u64> torsion;
  std::map<std::pair<std::string, int>, MinimalRecord> minimal;
  i64 root_number_sum = 0;
  u64 root_number_known = 0;
  std::map<int, u64> sel2_histogram;
  std::map<int, u64> sha2_histogram;
  u64 cm_count = 0;
  std::map<int, u64> cm_rank_histogram;
  Moments rank_vs_sign;

  void add(const CurveRecord& r);
  /// Commutative and associative; a default report is the identity.
  void merge(const StatReport& o);

  u64 determined() const { return count - undetermined; }
  std::optional<double> average_rank() const;
  std::optional<double> root_number_mean() const;
  std::optional<double> positive_disc_fraction() const;
  /// Pearson r between rank and sign(disc) over determined records.
  std::optional<double> correlation() const { return rank_vs_sign.r(); }
  /// (bucket upper edge, mean rank of determined records up to that edge).
  std::vector<std::pair<double, double>> average_rank_series() const;
  /// (bucket upper edge, proportion of rank r among determined records so far).
  std::vector<std::pair<double, double>> rank_proportion_series(int rank) const;

  bool operator==(const StatReport&) const = default;
};

StatReport aggregate(const std::vector<CurveRecord>& records, HeightKind kind = HeightKind::naive);

struct MinimalHeightRow {
  std::string torsion;
  int rank;
  MinimalRecord record;
};

/// Least height for each observed (torsion, rank), ascending by torsion order then rank.
std::vector<MinimalHeightRow> minimal_height_records(const std::vector<CurveRecord>& records,
                                                     HeightKind kind = HeightKind::naive);
std::vector<MinimalHeightRow> minimal_height_records(const StatReport& report);

void write_report_text(std::ostream& os, const StatReport& r);
/// Rows of section,key,value.
void write_report_csv(std::ostream& os, const StatReport& r);

void write_series_csv(std::ostream& os, const std::vector<std::pair<double, double>>& series,
                      const std::string& x_name, const std::string& y_name);
/// Self-contained SVG line chart with a logarithmic x axis.
void write_series_svg(std::ostream& os, const std::vector<std::pair<double, double>>& series,
                      const std::string& title, const std::string& x_name, const std::string& y_name);

// Reference formulas.

/// Poonen-Rains probability that dim S_p(E) = d.
double pr_selmer_prob(u64 p, int d);
/// Delaunay probability that dim Sha(E)[p] = 2n for curves of rank r.
double delaunay_sha_prob(u64 p, int r, int n);
/// 1 + 2^-(2r-1).
double expected_sha2_size(int r);
/// Harron-Snowden main terms for "trivial", "Z/2", "Z/3" at uncalibrated height X.
/// Throws std::invalid_argument for other groups.
double hs_predicted_count(const std::string& group, double X);
inline constexpr double kHarronSnowdenC2 = 3.1969;
inline constexpr double kHarronSnowdenC3 = 1.5221;
/// sigma(n) for 2 <= n <= 5; throws std::invalid_argument otherwise.
int theoretical_avg_selmer(int n);
/// Pearson coefficient; nullopt for fewer than two pairs or a constant marginal.
std::optional<double> pearson_r(const std::vector<std::pair<double, double>>& pairs);
/// X^(19/24) (ln X)^(3/8), the order of growth of the rank-2 count.
double rank2_growth(double X);

}  // namespace ecdb
