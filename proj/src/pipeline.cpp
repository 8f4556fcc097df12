#include "ecdb/pipeline.hpp"

#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecdb {

std::string to_string(RankStatus s) {
  switch (s) {
    case RankStatus::unconditional: return "unconditional";
    case RankStatus::grh_bsd: return "GRH+BSD";
    case RankStatus::grh_bsd_parity: return "GRH+BSD+Parity";
    case RankStatus::undetermined: return "undetermined";
  }
  return "?";
}

RankStatus parse_rank_status(std::string_view s) {
  if (s == "unconditional") return RankStatus::unconditional;
  if (s == "GRH+BSD") return RankStatus::grh_bsd;
  if (s == "GRH+BSD+Parity") return RankStatus::grh_bsd_parity;
  if (s == "undetermined") return RankStatus::undetermined;
  throw std::invalid_argument("unknown rank status: " + std::string(s));
}

void RankConfig::validate() const {
  if (delta_schedule.empty()) throw std::invalid_argument("delta schedule is empty");
  for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
    if (!(delta_schedule[i] > 0) || delta_schedule[i] > 3.9) throw std::invalid_argument("delta must lie in (0, 3.9]");
    if (i > 0 && delta_schedule[i] <= delta_schedule[i - 1]) throw std::invalid_argument("delta schedule must ascend");
  }
  if (search.numerator < 1 || search.denominator < 1) throw std::invalid_argument("search bounds must be >= 1");
  if (search_escalation < 1) throw std::invalid_argument("search escalation must be >= 1");
  if (retry_rounds < 0) throw std::invalid_argument("retry rounds must be >= 0");
  if (!(slack >= 0)) throw std::invalid_argument("slack must be >= 0");
}

std::string RankConfig::to_json() const {
  nlohmann::ordered_json j;
  j["delta_schedule"] = delta_schedule;
  j["search_numerator"] = search.numerator;
  j["search_denominator"] = search.denominator;
  j["search_escalation"] = search_escalation;
  j["retry_rounds"] = retry_rounds;
  j["numeric_root_number"] = numeric_root_number;
  j["numeric_coefficient_factor"] = numeric.coefficient_factor;
  j["numeric_max_coefficients"] = numeric.max_coefficients;
  j["numeric_accept_tolerance"] = numeric.accept_tolerance;
  j["numeric_reject_tolerance"] = numeric.reject_tolerance;
  j["slack"] = slack;
  return j.dump();
}

RankConfig RankConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RankConfig c;
  c.delta_schedule = j.at("delta_schedule").get<std::vector<double>>();
  c.search.numerator = j.at("search_numerator").get<i64>();
  c.search.denominator = j.at("search_denominator").get<i64>();
  c.search_escalation = j.at("search_escalation").get<int>();
  c.retry_rounds = j.at("retry_rounds").get<int>();
  c.numeric_root_number = j.at("numeric_root_number").get<bool>();
  c.numeric.coefficient_factor = j.at("numeric_coefficient_factor").get<double>();
  c.numeric.max_coefficients = j.at("numeric_max_coefficients").get<u64>();
  c.numeric.accept_tolerance = j.at("numeric_accept_tolerance").get<double>();
  c.numeric.reject_tolerance = j.at("numeric_reject_tolerance").get<double>();
  c.slack = j.at("slack").get<double>();
  c.validate();
  return c;
}

std::string RankConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json())));
  return buf;
}

namespace {

CurveRecord invariants_from(const Curve& c, const std::vector<LocalData>& local, const RankConfig& config) {
  CurveRecord r;
  r.a4 = c.a4;
  r.a6 = c.a6;
  r.h_naive = height_naive(c);
  r.h_uncal = height_uncalibrated(c);
  r.disc = discriminant(c);
  r.cond = conductor(local);
  r.tamagawa = tamagawa_product(local);
  r.torsion = torsion_subgroup(c).label();
  const RootNumber w = root_number(c, local, config.numeric_root_number, config.numeric);
  if (w.known()) r.root_number = w.value;
  r.is_cm = is_cm(c);
  return r;
}

}  // namespace

CurveRecord curve_invariants(const Curve& c, const RankConfig& config) {
  if (discriminant(c) == 0) throw std::domain_error("curve_invariants: singular curve");
  return invariants_from(c, bad_primes(c), config);
}

namespace {

CurveRecord rank_from(CurveRecord rec, const std::vector<LocalData>& local, const RankConfig& config,
                      RankTrace* trace) {
  const Curve c = rec.curve();
  rec.rank.reset();
  rec.sel2_rank.reset();
  rec.sha2_rank.reset();

  SearchBounds bounds = config.search;
  MordellWeilBasis basis = rank_lower_bound(c, search_points(c, bounds));
  rec.rank_lower = basis.rank_lower;

  const ReductionProfile profile(c, local);
  CoeffTable table(profile, 2);
  const int margin = rec.root_number ? 1 : 0;

  // Schedule steps whose table stays small run first; the wider search is
  // tried before the costly steps, since a missed generator is far cheaper
  // to find than to rule out.
  std::vector<double> cheap, costly;
  for (double d : config.delta_schedule) {
    (cheap.empty() || required_table_limit(d) <= kCheapTableLimit ? cheap : costly).push_back(d);
  }
  std::vector<ZeroSumResult> history;
  auto run = [&](const std::vector<double>& schedule) {
    const EscalationResult esc = escalate(profile, rec.cond, rec.rank_lower, schedule, table, margin, config.slack);
    for (ZeroSumResult z : esc.history) {
      if (!history.empty()) z.rank_ceiling = std::min(z.rank_ceiling, history.back().rank_ceiling);
      history.push_back(z);
    }
    rec.rank_upper = history.back().rank_ceiling;
  };

  int rounds = 1;
  int retries = config.retry_rounds;
  auto settle = [&]() {
    if (*rec.rank_upper == rec.rank_lower) {
      rec.rank = rec.rank_lower;
      rec.rank_status = RankStatus::grh_bsd;
      return true;
    }
    if (*rec.rank_upper == rec.rank_lower + 1 && rec.root_number) {
      const int parity_sign = rec.rank_lower % 2 == 0 ? 1 : -1;
      rec.rank = parity_sign == *rec.root_number ? rec.rank_lower : rec.rank_lower + 1;
      rec.rank_status = RankStatus::grh_bsd_parity;
      return true;
    }
    return false;
  };
  auto widen = [&]() {
    bounds = bounds.scaled(config.search_escalation);
    ++rounds;
    --retries;
    MordellWeilBasis wider = rank_lower_bound(c, search_points(c, bounds), rec.rank_upper);
    if (wider.rank_lower > basis.rank_lower) basis = std::move(wider);
    rec.rank_lower = basis.rank_lower;
  };

  run(cheap);
  bool done = settle();
  if (!done && !costly.empty()) {
    if (retries > 0 && *rec.rank_upper > rec.rank_lower) {
      widen();
      done = settle();
    }
    if (!done) {
      run(costly);
      done = settle();
    }
  }
  while (!done && retries > 0 && *rec.rank_upper > rec.rank_lower) {
    widen();
    done = settle();
  }
  if (!done) {
    rec.rank.reset();
    rec.rank_status = RankStatus::undetermined;
  }
  if (trace) {
    trace->zero_sums = history;
    trace->basis = basis.points;
    trace->regulator = basis.regulator;
    trace->search_rounds = rounds;
  }
  return rec;
}

}  // namespace

CurveRecord determine_rank(const Curve& c, const RankConfig& config, RankTrace* trace) {
  config.validate();
  if (discriminant(c) == 0) throw std::domain_error("determine_rank: singular curve");
  const std::vector<LocalData> local = bad_primes(c);
  return rank_from(invariants_from(c, local, config), local, config, trace);
}

CurveRecord determine_rank(const CurveRecord& invariants, const RankConfig& config, RankTrace* trace) {
  config.validate();
  const Curve c = invariants.curve();
  if (discriminant(c) == 0) throw std::domain_error("determine_rank: singular curve");
  return rank_from(invariants, bad_primes(c), config, trace);
}

int two_torsion_rank(const std::string& torsion_label) {
  const TorsionGroup g = parse_torsion_label(torsion_label);
  if (g.m == 2) return 2;
  return g.n % 2 == 0 ? 1 : 0;
}

std::vector<SelmerRow> read_selmer_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("selmer csv: missing header");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  };
  const auto header = split(line);
  int ia4 = -1, ia6 = -1, isel = -1;
  for (int i = 0; i < int(header.size()); ++i) {
    if (header[i] == "a4") ia4 = i;
    if (header[i] == "a6") ia6 = i;
    if (header[i] == "sel2_rank") isel = i;
  }
  if (ia4 < 0 || ia6 < 0 || isel < 0) throw std::runtime_error("selmer csv: header needs a4, a6, sel2_rank");
  std::vector<SelmerRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    const int need = std::max({ia4, ia6, isel});
    if (int(cells.size()) <= need) throw std::runtime_error("selmer csv: short row at line " + std::to_string(lineno));
    try {
      const int sel = std::stoi(cells[isel]);
      if (sel < 0) throw std::invalid_argument("negative");
      rows.push_back({parse_i128(cells[ia4]), parse_i128(cells[ia6]), sel});
    } catch (const std::exception& e) {
      throw std::runtime_error("selmer csv: bad value at line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

SelmerImportReport import_selmer(std::vector<CurveRecord>& records, const std::vector<SelmerRow>& rows) {
  SelmerImportReport report;
  std::map<Curve, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index[records[i].curve()] = i;
  for (const SelmerRow& row : rows) {
    const Curve key{row.a4, row.a6};
    auto it = index.find(key);
    if (it == index.end()) {
      report.unknown_keys.push_back(key.str());
      continue;
    }
    CurveRecord updated = records[it->second];
    const int t2 = two_torsion_rank(updated.torsion);
    const int bound = row.sel2_rank - t2;
    if (bound < updated.rank_lower) {
      report.integrity_errors.push_back(key.str() + ": sel2_rank " + std::to_string(row.sel2_rank) +
                                        " is below rank_lower + dim E[2] = " +
                                        std::to_string(updated.rank_lower + t2));
      continue;
    }
    if (updated.rank && *updated.rank > bound) {
      report.integrity_errors.push_back(key.str() + ": rank " + std::to_string(*updated.rank) +
                                        " exceeds the Selmer bound " + std::to_string(bound));
      continue;
    }
    updated.sel2_rank = row.sel2_rank;
    updated.rank_upper = std::min(updated.rank_upper.value_or(bound), bound);
    if (bound == updated.rank_lower) {
      updated.rank = updated.rank_lower;
      updated.rank_status = RankStatus::unconditional;
      updated.rank_upper = bound;
    }
    if (updated.rank) {
      updated.sha2_rank = row.sel2_rank - *updated.rank - t2;
      if (*updated.sha2_rank % 2 != 0) {
        report.anomalies.push_back(key.str() + ": odd sha2_rank " + std::to_string(*updated.sha2_rank));
      }
    }
    records[it->second] = std::move(updated);
    ++report.updated;
  }
  return report;
}

}  // namespace ecdb
