#pragma once

// Rank determination: invariants, point search, zero-sum ceilings, parity,
// and imported 2-Selmer ranks.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecdb/local.hpp"
#include "ecdb/mordell.hpp"
#include "ecdb/zerosum.hpp"

namespace ecdb {

enum class RankStatus { unconditional, grh_bsd, grh_bsd_parity, undetermined };

/// "unconditional", "GRH+BSD", "GRH+BSD+Parity", "undetermined".
std::string to_string(RankStatus s);
RankStatus parse_rank_status(std::string_view s);

struct CurveRecord {
  i128 a4 = 0;
  i128 a6 = 0;
  i128 h_naive = 0;
  i128 h_uncal = 0;
  i128 disc = 0;
  i128 cond = 0;
  i128 tamagawa = 0;
  std::string torsion = "trivial";
  std::optional<int> root_number;
  int rank_lower = 0;
  std::optional<int> rank_upper;  ///< empty until a ceiling has been computed
  std::optional<int> rank;
  RankStatus rank_status = RankStatus::undetermined;
  std::optional<int> sel2_rank;
  std::optional<int> sha2_rank;
  bool is_cm = false;

  Curve curve() const { return {a4, a6}; }
  bool operator==(const CurveRecord&) const = default;
};

/// Schedule steps needing a larger coefficient table run only after the
/// widened point search has been tried.
inline constexpr u64 kCheapTableLimit = 1000000;

struct RankConfig {
  std::vector<double> delta_schedule = default_delta_schedule();
  SearchBounds search;
  int search_escalation = 4;
  int retry_rounds = 1;
  bool numeric_root_number = true;
  NumericRootOptions numeric;
  double slack = kZeroSumSlack;

  void validate() const;
  /// Canonical JSON text; equal configs give equal strings.
  std::string to_json() const;
  static RankConfig from_json(const std::string& text);
  /// FNV-1a 64 of to_json(), as 16 hex digits.
  std::string hash() const;
};

/// Curve invariants without any rank information.
CurveRecord curve_invariants(const Curve& c, const RankConfig& config = {});

/// Optional details of one determination, for diagnostics.
struct RankTrace {
  std::vector<ZeroSumResult> zero_sums;
  std::vector<RationalPoint> basis;
  double regulator = 1.0;
  int search_rounds = 1;
};

CurveRecord determine_rank(const Curve& c, const RankConfig& config = {}, RankTrace* trace = nullptr);
/// Same, reusing the invariant fields of a record from curve_invariants
/// (rank fields are recomputed).
CurveRecord determine_rank(const CurveRecord& invariants, const RankConfig& config = {},
                           RankTrace* trace = nullptr);

/// dim over F_2 of E(Q)[2] for a torsion label.
int two_torsion_rank(const std::string& torsion_label);

struct SelmerRow {
  i128 a4;
  i128 a6;
  int sel2_rank;
};

/// Header-bearing CSV with columns a4, a6, sel2_rank (any order, extra
/// columns ignored). Throws std::runtime_error with the line number on bad input.
std::vector<SelmerRow> read_selmer_csv(std::istream& in);

struct SelmerImportReport {
  std::size_t updated = 0;
  std::vector<std::string> unknown_keys;      ///< "[a4,a6]" of rows with no record
  std::vector<std::string> integrity_errors;  ///< contradictions, records left unchanged
  std::vector<std::string> anomalies;         ///< odd sha2 ranks
  bool ok() const { return unknown_keys.empty() && integrity_errors.empty(); }
};

/// Applies rank <= sel2 - dim E(Q)[2] to the matching records.
SelmerImportReport import_selmer(std::vector<CurveRecord>& records, const std::vector<SelmerRow>& rows);

}  // namespace ecdb
