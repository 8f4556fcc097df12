// ecdb: enumerate curves, determine ranks, import Selmer data, and report.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "ecdb/enumerate.hpp"
#include "ecdb/parallel.hpp"
#include "ecdb/pipeline.hpp"
#include "ecdb/stats.hpp"
#include "ecdb/store.hpp"
#include "ecdb/zerosum.hpp"

using namespace ecdb;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIntegrity = 2;
constexpr std::size_t kBatch = 512;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out() {
  const char* env = std::getenv("ECDB_OUT");
  return env && *env ? fs::path(env) : fs::path("ecdb_run");
}

i128 parse_arg(const std::string& s, const char* name) {
  try {
    return parse_i128(s);
  } catch (const std::exception&) {
    throw UsageError(std::string("--") + name + ": not an integer: " + s);
  }
}

void update_run_json(const fs::path& run, const std::string& stage, const json& entry) {
  fs::create_directories(run);
  const fs::path p = run / "run.json";
  json j = json::object();
  if (fs::exists(p)) {
    std::ifstream in(p);
    j = json::parse(in);
  }
  j[stage] = entry;
  std::ofstream out(p, std::ios::trunc);
  out << j.dump(2) << "\n";
}

json config_json(const RankConfig& c) { return json::parse(c.to_json()); }

// Records for one shard, computed in batches and appended in enumeration
// order so an interrupted shard resumes to the same bytes.
template <class Item, class Fn>
void fill_shard(ShardWriter& w, const std::vector<Item>& items, unsigned threads, Fn&& make,
                const std::function<Curve(const Item&)>& key) {
  std::vector<Item> todo;
  for (const auto& it : items) {
    if (!w.contains(key(it))) todo.push_back(it);
  }
  for (std::size_t at = 0; at < todo.size(); at += kBatch) {
    std::vector<Item> batch(todo.begin() + at, todo.begin() + std::min(todo.size(), at + kBatch));
    w.write(parallel_map(batch, threads, make));
  }
  w.seal();
}

struct Common {
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Run directory (default $ECDB_OUT or ./ecdb_run)");
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
}

fs::path run_dir(const Common& c) { return c.out.empty() ? default_out() : fs::path(c.out); }

struct RankOptions {
  std::vector<double> deltas;
  i64 numerator = SearchBounds{}.numerator;
  i64 denominator = SearchBounds{}.denominator;
  bool no_numeric_root = false;
};

void add_rank_options(CLI::App* sub, RankOptions& o) {
  sub->add_option("--delta-schedule", o.deltas, "Ascending Delta values (max 3.9)")->delimiter(',');
  sub->add_option("--search-numerator", o.numerator, "Point search bound on |m| in x = m/e^2");
  sub->add_option("--search-denominator", o.denominator, "Point search bound on e in x = m/e^2");
  sub->add_flag("--no-numeric-root", o.no_numeric_root, "Leave root numbers unknown at additive 2 and 3");
}

RankConfig make_config(const RankOptions& o) {
  RankConfig c;
  if (!o.deltas.empty()) c.delta_schedule = o.deltas;
  c.search = {o.numerator, o.denominator};
  c.numeric_root_number = !o.no_numeric_root;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

// Latest stage present: selmer, rank, then enumerate.
fs::path stage_dir(const fs::path& run, const std::string& stage) {
  if (!stage.empty()) return run / stage;
  for (const char* s : {"selmer", "rank", "enumerate"}) {
    if (!list_shards(run / s).empty()) return run / s;
  }
  throw UsageError("no shards under " + run.string());
}

StatReport report_for(const fs::path& dir, HeightKind kind, unsigned threads) {
  const auto shards = list_shards(dir);
  if (shards.empty()) throw UsageError("no shards in " + dir.string());
  std::vector<StatReport> parts(shards.size());
  parallel_for(shards.size(), threads, [&](std::size_t i) {
    if (shards[i].meta.status != ShardStatus::sealed) {
      throw IntegrityError("shard not sealed: " + shards[i].path.string());
    }
    parts[i] = aggregate(read_records(shards[i].path), kind);
  });
  StatReport total;
  total.kind = kind;
  for (const auto& p : parts) total.merge(p);
  return total;
}

int cmd_enumerate(const Common& common, const std::string& kind_s, const std::string& lo_s, const std::string& hi_s,
                  const std::string& shard_s, const RankOptions& ro) {
  HeightWindow w{parse_height_kind(kind_s), parse_arg(lo_s, "lo"), parse_arg(hi_s, "hi")};
  if (w.kind == HeightKind::f1) throw UsageError("enumerate writes records for naive or uncalibrated heights");
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const i128 shard_size = shard_s.empty() ? w.hi - w.lo : parse_arg(shard_s, "shard-size");
  const RankConfig config = make_config(ro);
  const fs::path run = run_dir(common);
  update_run_json(run, "enumerate",
                  {{"kind", to_string(w.kind)},
                   {"lo", to_string(w.lo)},
                   {"hi", to_string(w.hi)},
                   {"shard_size", to_string(shard_size)},
                   {"config", config_json(config)}});
  u64 total = 0;
  for (const auto& tile : tile_window(w, shard_size)) {
    ShardWriter writer(run / "enumerate", tile, config.hash());
    if (writer.meta().status != ShardStatus::sealed) {
      fill_shard<Curve>(writer, enumerate_curves(tile), common.threads,
                        [&](const Curve& c) { return curve_invariants(c, config); },
                        [](const Curve& c) { return c; });
    }
    total += writer.meta().rows;
    std::cout << writer.path().filename().string() << " rows=" << writer.meta().rows << "\n";
  }
  std::cout << "curves: " << total << "\n";
  return 0;
}

int cmd_sample(const Common& common, int k, std::size_t count, u64 seed, bool rank, const RankOptions& ro) {
  SampleSpec spec{k, count, seed};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RankConfig config = make_config(ro);
  const fs::path dir = run_dir(common) / ("sample_k" + std::to_string(k) + "_seed" + std::to_string(seed));
  update_run_json(run_dir(common), dir.filename().string(),
                  {{"k", k}, {"count", count}, {"seed", seed}, {"rank", rank}, {"generator", "mt19937_64"},
                   {"config", config_json(config)}});
  const HeightWindow band{HeightKind::naive, spec.band_lo(), spec.band_hi()};
  ShardWriter writer(dir, band, config.hash());
  if (writer.meta().status != ShardStatus::sealed) {
    fill_shard<Curve>(
        writer, sample_band(spec), common.threads,
        [&](const Curve& c) { return rank ? determine_rank(c, config) : curve_invariants(c, config); },
        [](const Curve& c) { return c; });
  }
  std::cout << writer.path().string() << " rows=" << writer.meta().rows << "\n";
  return 0;
}

int cmd_rank(const Common& common, const RankOptions& ro) {
  const RankConfig config = make_config(ro);
  const fs::path run = run_dir(common);
  const auto shards = list_shards(run / "enumerate");
  if (shards.empty()) throw UsageError("no enumerate shards under " + run.string());
  update_run_json(run, "rank", {{"config", config_json(config)}});
  std::map<std::string, u64> statuses;
  for (const auto& s : shards) {
    if (s.meta.status != ShardStatus::sealed) throw IntegrityError("enumerate shard not sealed: " + s.path.string());
    ShardWriter writer(run / "rank", s.meta.window, config.hash());
    if (writer.meta().status != ShardStatus::sealed) {
      fill_shard<CurveRecord>(writer, read_records(s.path), common.threads,
                              [&](const CurveRecord& r) { return determine_rank(r, config); },
                              [](const CurveRecord& r) { return r.curve(); });
    }
    std::cout << writer.path().filename().string() << " rows=" << writer.meta().rows << "\n";
  }
  for (const auto& s : list_shards(run / "rank")) {
    for (const auto& r : read_records(s.path)) statuses[to_string(r.rank_status)]++;
  }
  for (const auto& [k, v] : statuses) std::cout << k << ": " << v << "\n";
  return 0;
}

int cmd_import_selmer(const Common& common, const std::string& csv) {
  const fs::path run = run_dir(common);
  std::ifstream in(csv);
  if (!in) throw UsageError("cannot open " + csv);
  std::vector<SelmerRow> rows;
  try {
    rows = read_selmer_csv(in);
  } catch (const std::runtime_error& e) {
    throw IntegrityError(e.what());
  }
  const auto shards = list_shards(run / "rank");
  if (shards.empty()) throw UsageError("no rank shards under " + run.string());
  std::vector<CurveRecord> all;
  std::vector<std::size_t> ends;
  for (const auto& s : shards) {
    if (s.meta.status != ShardStatus::sealed) throw IntegrityError("rank shard not sealed: " + s.path.string());
    auto recs = read_records(s.path);
    all.insert(all.end(), recs.begin(), recs.end());
    ends.push_back(all.size());
  }
  const SelmerImportReport rep = import_selmer(all, rows);
  const std::string source_hash = [&] {
    std::ifstream f(csv, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
  }();
  const std::string hash = shards.front().meta.config_hash + "-" + source_hash;
  update_run_json(run, "selmer", {{"source", csv}, {"source_checksum", source_hash}});
  fs::remove_all(run / "selmer");
  std::size_t begin = 0;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    ShardWriter writer(run / "selmer", shards[i].meta.window, hash);
    writer.write(std::vector<CurveRecord>(all.begin() + begin, all.begin() + ends[i]));
    writer.seal();
    begin = ends[i];
  }
  std::cout << "updated: " << rep.updated << "\n";
  for (const auto& a : rep.anomalies) std::cout << "anomaly: " << a << "\n";
  for (const auto& k : rep.unknown_keys) std::cerr << "unknown curve key: " << k << "\n";
  for (const auto& e : rep.integrity_errors) std::cerr << "integrity error: " << e << "\n";
  return rep.ok() ? 0 : kExitIntegrity;
}

int cmd_stats(const Common& common, const std::string& stage, const std::string& kind_s, const std::string& csv) {
  const fs::path dir = stage_dir(run_dir(common), stage);
  const StatReport r = report_for(dir, parse_height_kind(kind_s), common.threads);
  write_report_text(std::cout, r);
  if (!csv.empty()) {
    std::ofstream out(csv);
    write_report_csv(out, r);
  }
  return 0;
}

int cmd_records(const Common& common, const std::string& stage, const std::string& kind_s) {
  const fs::path dir = stage_dir(run_dir(common), stage);
  const StatReport r = report_for(dir, parse_height_kind(kind_s), common.threads);
  std::cout << "torsion,rank,height,curves\n";
  for (const auto& row : minimal_height_records(r)) {
    std::cout << row.torsion << "," << row.rank << "," << to_string(row.record.height) << ",";
    for (std::size_t i = 0; i < row.record.curves.size(); ++i) {
      std::cout << (i ? " " : "") << row.record.curves[i].str();
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_plot(const Common& common, const std::string& stage, const std::string& kind_s, const std::string& series,
             int rank, const std::string& csv, const std::string& svg) {
  const fs::path dir = stage_dir(run_dir(common), stage);
  const StatReport r = report_for(dir, parse_height_kind(kind_s), common.threads);
  std::vector<std::pair<double, double>> data;
  std::string y_name, title;
  if (series == "average-rank") {
    data = r.average_rank_series();
    y_name = "average_rank";
    title = "Average rank up to height X";
  } else {
    data = r.rank_proportion_series(rank);
    y_name = "proportion_rank_" + std::to_string(rank);
    title = "Proportion of rank " + std::to_string(rank) + " up to height X";
  }
  if (csv.empty()) {
    write_series_csv(std::cout, data, "height", y_name);
  } else {
    std::ofstream out(csv);
    write_series_csv(out, data, "height", y_name);
  }
  if (!svg.empty()) {
    std::ofstream out(svg);
    write_series_svg(out, data, title, "height X", y_name);
  }
  return 0;
}

int cmd_zerosum(const std::string& a4_s, const std::string& a6_s, double delta, const std::string& csv) {
  const Curve c{parse_arg(a4_s, "a4"), parse_arg(a6_s, "a6")};
  if (discriminant(c) == 0) throw UsageError("singular curve " + c.str());
  if (!(delta > 0) || delta > 3.9) throw UsageError("--delta must lie in (0, 3.9]");
  const ReductionProfile profile(c);
  const i128 N = conductor(profile.local());
  const CoeffTable table(profile, required_table_limit(delta));
  const ZeroSumResult z = zero_sum_bound(N, delta, table);
  std::cout << "curve " << c.str() << "\n";
  std::cout << "conductor " << to_string(N) << "\n";
  std::cout << "delta " << delta << "\n";
  std::cout.precision(12);
  std::cout << "bound " << z.sum_value << "\n";
  std::cout << "rank ceiling " << z.rank_ceiling << "\n";
  if (!csv.empty()) {
    std::ofstream out(csv);
    write_zero_sum_csv(out, zero_sum_terms(N, delta, table));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Height-ordered elliptic curve database builder"};
  app.require_subcommand(1);
  Common common;
  common.threads = std::max(1u, std::thread::hardware_concurrency());

  RankOptions ro;
  std::string kind = "naive", lo = "0", hi, shard_size, stage, csv, svg, series = "average-rank", a4, a6;
  int k = 11, rank = 2;
  std::size_t count = 1000;
  u64 seed = 0;
  bool with_rank = false;
  double delta = 2.0;

  auto* en = app.add_subcommand("enumerate", "Write invariant records for every curve in a height window");
  add_common(en, common);
  add_rank_options(en, ro);
  en->add_option("--kind", kind, "naive or uncalibrated")->check(CLI::IsMember({"naive", "uncalibrated"}));
  en->add_option("--lo", lo, "Window start (inclusive)");
  en->add_option("--hi", hi, "Window end (exclusive)")->required();
  en->add_option("--shard-size", shard_size, "Height span per shard (default: one shard)");

  auto* sa = app.add_subcommand("sample", "Uniform sample of curves with naive height in [10^k, 2*10^k)");
  add_common(sa, common);
  add_rank_options(sa, ro);
  sa->add_option("--k", k, "Band exponent")->check(CLI::Range(1, 30));
  sa->add_option("--count", count, "Number of curves")->check(CLI::PositiveNumber);
  sa->add_option("--seed", seed, "mt19937_64 seed");
  sa->add_flag("--rank", with_rank, "Also determine ranks");

  auto* ra = app.add_subcommand("rank", "Determine ranks for the enumerate stage of a run");
  add_common(ra, common);
  add_rank_options(ra, ro);

  auto* se = app.add_subcommand("import-selmer", "Apply 2-Selmer ranks from a CSV (a4,a6,sel2_rank)");
  add_common(se, common);
  se->add_option("--csv", csv, "Selmer CSV")->required();

  std::string report_csv;
  auto* st = app.add_subcommand("stats", "Aggregate statistics for a run");
  add_common(st, common);
  st->add_option("--stage", stage, "enumerate, rank or selmer (default: latest)");
  st->add_option("--kind", kind, "Height used for series and records")->check(CLI::IsMember({"naive", "uncalibrated"}));
  st->add_option("--csv", report_csv, "Also write the report as CSV");

  auto* rc = app.add_subcommand("records", "Least height for each (torsion, rank)");
  add_common(rc, common);
  rc->add_option("--stage", stage, "enumerate, rank or selmer (default: latest)");
  rc->add_option("--kind", kind, "Height kind")->check(CLI::IsMember({"naive", "uncalibrated"}));

  auto* pl = app.add_subcommand("plot", "Emit a running-statistic series as CSV and optional SVG");
  add_common(pl, common);
  pl->add_option("--stage", stage, "enumerate, rank or selmer (default: latest)");
  pl->add_option("--kind", kind, "Height kind")->check(CLI::IsMember({"naive", "uncalibrated"}));
  pl->add_option("--series", series, "average-rank or rank-proportion")
      ->check(CLI::IsMember({"average-rank", "rank-proportion"}));
  pl->add_option("--rank", rank, "Rank for rank-proportion")->check(CLI::NonNegativeNumber);
  pl->add_option("--csv", csv, "Series CSV path (default stdout)");
  pl->add_option("--svg", svg, "SVG path");

  auto* zs = app.add_subcommand("zerosum", "Zero-sum bound for one curve, with optional per-term CSV");
  zs->add_option("--a4", a4, "a4")->required();
  zs->add_option("--a6", a6, "a6")->required();
  zs->add_option("--delta", delta, "Delta");
  zs->add_option("--csv", csv, "Per-term CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*en) return cmd_enumerate(common, kind, lo, hi, shard_size, ro);
    if (*sa) return cmd_sample(common, k, count, seed, with_rank, ro);
    if (*ra) return cmd_rank(common, ro);
    if (*se) return cmd_import_selmer(common, csv);
    if (*st) return cmd_stats(common, stage, kind, report_csv);
    if (*rc) return cmd_records(common, stage, kind);
    if (*pl) return cmd_plot(common, stage, kind, series, rank, csv, svg);
    if (*zs) return cmd_zerosum(a4, a6, delta, csv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const CorruptShard& e) {
    std::cerr << "corrupt shard: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIntegrity;
  }
  return kExitUsage;
}
