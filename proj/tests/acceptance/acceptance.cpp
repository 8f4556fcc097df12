// Prints one PASS/FAIL line per acceptance criterion. Exits nonzero if any
// criterion other than the stretch goal (12) fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ecdb/enumerate.hpp"
#include "ecdb/parallel.hpp"
#include "ecdb/stats.hpp"
#include "ecdb/store.hpp"
#include "support/fejer_quadrature.hpp"

using namespace ecdb;

namespace {

// Independent arbitrary-precision values (tests/oracles/zero_sum_oracle.py).
constexpr double kOracleZeroSum92 = 1.0081275172190665971;
constexpr double kOracleZeroSum368 = 0.017836836671384782698;
const std::map<double, double> kOracleDigamma{{0.5, -0.13504767719299948892},
                                              {1.0, -0.31571362871630519314},
                                              {2.0, -0.2231581242580436057},
                                              {3.0, -0.16331640088243685888}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

Outcome enumeration_exactness() {
  Clock clock;
  const auto c = count_window({HeightKind::naive, 0, 100000001});
  const double t = clock.seconds();
  return {c.count == 2249362 && t < 300,
          "naive height <= 10^8 gives " + to_string(c.count) + " curves (want 2249362) in " + fmt(t, 3) + " s"};
}

Outcome tiny_window() {
  const auto got = enumerate_curves({HeightKind::naive, 0, 28});
  std::set<Curve> brute;
  for (i128 a4 = -20; a4 <= 20; ++a4)
    for (i128 a6 = -20; a6 <= 20; ++a6) {
      const Curve c{a4, a6};
      if (height_naive(c) <= 27 && discriminant(c) != 0 && is_minimal(c)) brute.insert(c);
    }
  const std::set<Curve> expected{{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  const std::set<Curve> got_set(got.begin(), got.end());
  return {got.size() == 8 && got_set == expected && brute == expected,
          std::to_string(got.size()) + " curves, brute-force scan " + std::to_string(brute.size()) +
              ", sets equal: " + (got_set == brute ? "yes" : "no")};
}

Outcome conductor_fixtures() {
  const std::vector<std::pair<Curve, i128>> fixtures{{{-1, -1}, 368}, {{-1, 1}, 92},   {{1, -1}, 248},
                                                     {{1, 1}, 496},   {{-4, 1}, 916},  {{-13, 4}, 66848},
                                                     {{0, 4}, 108},   {{0, 1}, 36},    {{-2, 1}, 40},
                                                     {{-1, 0}, 32},   {{-18, 51}, 750384}};
  std::string bad;
  for (const auto& [c, n] : fixtures) {
    const i128 got = conductor(c);
    if (got != n) bad += " " + c.str() + "->" + to_string(got);
  }
  return {bad.empty(), bad.empty() ? "11/11 conductors match" : "mismatches:" + bad};
}

Outcome torsion_fixtures() {
  struct Fixture {
    Curve c;
    std::string label;
    std::optional<i128> cond;
  };
  const std::vector<Fixture> fixtures{{{-1, 0}, "Z/2xZ/2", {}},     {{0, 4}, "Z/3", {}},
                                      {{0, 1}, "Z/6", {}},          {{-2, 1}, "Z/4", {}},
                                      {{-432, 8208}, "Z/5", 11},    {{-43, 166}, "Z/7", 26},
                                      {{-219, 1654}, "Z/9", 54},    {{-351, 1890}, "Z/2xZ/4", 24}};
  std::string bad;
  for (const auto& f : fixtures) {
    const std::string got = torsion_subgroup(f.c).label();
    if (got != f.label) bad += " " + f.c.str() + "->" + got;
    if (f.cond && conductor(f.c) != *f.cond) bad += " " + f.c.str() + " N=" + to_string(conductor(f.c));
  }
  const Curve literal{-43, 8208};
  const std::string note = "; printed pair [-43,8208] has torsion " + torsion_subgroup(literal).label() +
                           " and N=" + to_string(conductor(literal)) + ", so the Z/5 row is checked on [-432,8208]";
  return {bad.empty(), (bad.empty() ? std::string("8/8 torsion groups and conductors match") : "mismatches:" + bad) + note};
}

Outcome rank_fixtures() {
  const std::vector<std::pair<Curve, int>> fixtures{{{-1, -1}, 0},     {{-1, 1}, 1},         {{-4, 1}, 2},
                                                    {{-13, 4}, 3},     {{-19, 151}, 4},      {{-217, 1585}, 5},
                                                    {{-1126, 6796}, 6}};
  std::string detail, bad;
  for (const auto& [c, r] : fixtures) {
    RankTrace trace;
    const auto rec = determine_rank(c, {}, &trace);
    const bool ok = rec.rank == r &&
                    (rec.rank_status == RankStatus::grh_bsd || rec.rank_status == RankStatus::grh_bsd_parity) &&
                    !trace.zero_sums.empty() && trace.zero_sums.back().delta <= 3;
    detail += (detail.empty() ? "" : " ") + c.str() + "=" + (rec.rank ? std::to_string(*rec.rank) : "?") + "(" +
              to_string(rec.rank_status) + ",D=" + fmt(trace.zero_sums.empty() ? 0 : trace.zero_sums.back().delta) + ")";
    if (!ok) bad += " " + c.str();
  }
  return {bad.empty(), (bad.empty() ? "" : "wrong:" + bad + "; ") + detail};
}

Outcome zero_sum_correctness() {
  auto eval = [](const Curve& c) {
    const ReductionProfile prof(c);
    const CoeffTable t(prof, required_table_limit(2));
    return zero_sum_bound(conductor(prof.local()), 2, t).sum_value;
  };
  const double v92 = eval({-1, 1});
  const double v368 = eval({-1, -1});
  const double e92 = std::abs(v92 - kOracleZeroSum92);
  const double e368 = std::abs(v368 - kOracleZeroSum368);
  const bool ok = v92 >= 1 && v92 < 2 && v368 >= 0 && v368 < 1 && e92 < 1e-8 && e368 < 1e-8;
  return {ok, "(-1,1): " + fmt(v92, 12) + " |err| " + fmt(e92, 2) + "; (-1,-1): " + fmt(v368, 12) + " |err| " +
                  fmt(e368, 2)};
}

Outcome special_functions() {
  double worst_fejer = 0;
  for (double delta : {1.0, 2.0}) {
    for (int k = 0; k < 100; ++k) {
      const double y = -2.5 * SpecialConstants::pi * delta + 5 * SpecialConstants::pi * delta * k / 99.0;
      worst_fejer = std::max(worst_fejer, std::abs(testing::fejer_fourier_numeric(delta, y) - fejer_fourier(delta, y)));
    }
  }
  double worst_digamma = 0;
  for (const auto& [delta, ref] : kOracleDigamma) worst_digamma = std::max(worst_digamma, std::abs(digamma_term(delta) - ref));
  return {worst_fejer < 1e-6 && worst_digamma < 1e-8,
          "Fejer transform max |err| " + fmt(worst_fejer, 2) + " over 2x100 points; digamma max |err| " +
              fmt(worst_digamma, 2) + " at Delta in {0.5,1,2,3}"};
}

Outcome formula_evaluators() {
  struct Check {
    double got, want;
  };
  const std::vector<Check> checks{{pr_selmer_prob(2, 0), 0.2097},     {pr_selmer_prob(2, 1), 0.4194},
                                  {pr_selmer_prob(2, 2), 0.2796},     {delaunay_sha_prob(2, 0, 0), 0.4194},
                                  {delaunay_sha_prob(2, 0, 1), 0.5592}, {delaunay_sha_prob(2, 0, 2), 0.0213},
                                  {delaunay_sha_prob(2, 1, 0), 0.8388}, {delaunay_sha_prob(2, 1, 1), 0.1598}};
  double worst = 0;
  for (const auto& c : checks) worst = std::max(worst, std::abs(c.got - c.want));
  const bool sha = expected_sha2_size(0) == 3.0;
  return {worst <= 5e-5 && sha, "max |err| " + fmt(worst, 2) + " over 8 probabilities; E|Sha[2]|(r=0) = " +
                                    fmt(expected_sha2_size(0))};
}

Outcome census(unsigned threads) {
  Clock clock;
  const HeightWindow w{HeightKind::uncalibrated, 0, 1000001};
  const auto curves = enumerate_curves(w);
  const auto labels = parallel_map(curves, threads, [](const Curve& c) { return torsion_subgroup(c).label(); });
  std::map<std::string, u64> counts;
  for (const auto& l : labels) counts[l]++;
  const double predicted = hs_predicted_count("trivial", 1e6);
  const double z2 = hs_predicted_count("Z/2", 1e6);
  const double all_ratio = double(curves.size()) / predicted;
  const double trivial_ratio = double(counts["trivial"]) / predicted;
  const double z2_ratio = double(counts["Z/2"]) / z2;
  const bool ok = std::abs(all_ratio - 1) < 0.02 && std::abs(trivial_ratio - 1) < 0.02 && std::abs(z2_ratio - 1) < 0.35;
  return {ok, "all " + std::to_string(curves.size()) + " (ratio " + fmt(all_ratio, 5) + "), trivial " +
                  std::to_string(counts["trivial"]) + " (ratio " + fmt(trivial_ratio, 5) + "), Z/2 " +
                  std::to_string(counts["Z/2"]) + " vs " + fmt(z2, 5) + " (ratio " + fmt(z2_ratio, 4) + ") in " +
                  fmt(clock.seconds(), 3) + " s"};
}

Outcome parity(unsigned threads) {
  Clock clock;
  const auto curves = enumerate_curves({HeightKind::naive, 0, 100001});
  const auto recs = parallel_map(curves, threads, [](const Curve& c) { return determine_rank(c); });
  u64 checked = 0, violations = 0, undetermined = 0, unknown_w = 0;
  for (const auto& r : recs) {
    if (!r.rank) ++undetermined;
    if (!r.root_number) ++unknown_w;
    if (!r.rank || !r.root_number) continue;
    ++checked;
    if ((*r.rank % 2 == 0 ? 1 : -1) != *r.root_number) ++violations;
  }
  return {violations == 0 && checked > 0,
          std::to_string(curves.size()) + " curves, " + std::to_string(checked) + " checked, " +
              std::to_string(violations) + " violations, " + std::to_string(undetermined) + " undetermined, " +
              std::to_string(unknown_w) + " unknown root numbers, " + fmt(clock.seconds(), 3) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome merge_resume(unsigned threads) {
  const fs::path root = fs::temp_directory_path() / ("ecdb_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const HeightWindow whole{HeightKind::naive, 0, 10001};
  const RankConfig config;
  const auto recs = parallel_map(enumerate_curves(whole), threads, [&](const Curve& c) { return determine_rank(c, config); });

  // Sharded stats against whole-run stats.
  StatReport merged;
  for (const auto& t : tile_window(whole, 2500)) {
    std::vector<CurveRecord> part;
    for (const auto& r : recs)
      if (t.contains(r.h_naive)) part.push_back(r);
    ShardWriter writer(root / "tiles", t, config.hash());
    writer.write(part);
    writer.seal();
  }
  std::size_t shards = 0;
  for (const auto& s : list_shards(root / "tiles")) {
    merged.merge(aggregate(read_records(s.path)));
    ++shards;
  }
  const bool merge_ok = merged == aggregate(recs);

  // Uninterrupted against killed-and-resumed.
  auto write_all = [&](const fs::path& dir, std::size_t stop_after) {
    ShardWriter writer(dir, whole, config.hash());
    for (std::size_t i = 0; i < recs.size() && i < stop_after; i += 64)
      writer.write({recs.begin() + i, recs.begin() + std::min(recs.size(), i + 64)});
    if (stop_after >= recs.size()) writer.seal();
  };
  write_all(root / "clean", recs.size());
  const pid_t pid = ::fork();
  if (pid == 0) {
    write_all(root / "killed", recs.size() / 2);
    ::kill(::getpid(), SIGKILL);
    ::_exit(0);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  const bool killed = pid > 0 && WIFSIGNALED(status);
  const auto pending = resume(root / "killed");
  write_all(root / "killed", recs.size());
  const std::string name = shard_filename(whole);
  const bool same = slurp(root / "clean" / name) == slurp(root / "killed" / name) &&
                    slurp(meta_path(root / "clean" / name)) == slurp(meta_path(root / "killed" / name));
  fs::remove_all(root);
  return {merge_ok && killed && pending.size() == 1 && same,
          std::to_string(recs.size()) + " ranked records; merge of " + std::to_string(shards) +
              " shards equals whole run: " + (merge_ok ? "yes" : "no") + "; resumed shard byte-identical: " +
              (same ? "yes" : "no")};
}

Outcome stretch(bool run, unsigned threads) {
  Clock clock;
  u64 f1 = 0;
  enumerate_f1_window({HeightKind::f1, 0, 100000001}, [&](const F1Curve&) { ++f1; });
  std::string detail = "F1 classes at H1 <= 10^8: " + std::to_string(f1) + " (want 3594891, " +
                       fmt(clock.seconds(), 3) + " s)";
  if (!run) {
    return {false, detail + "; average-rank run over 2249362 curves not run (days on this machine, see the "
                            "decisions ledger; pass --stretch to run it)"};
  }
  const auto curves = enumerate_curves({HeightKind::naive, 0, 100000001});
  StatReport report;
  for (std::size_t i = 0; i < curves.size(); i += 4096) {
    const std::vector<Curve> batch(curves.begin() + i, curves.begin() + std::min(curves.size(), i + 4096));
    for (const auto& r : parallel_map(batch, threads, [](const Curve& c) { return determine_rank(c); })) report.add(r);
  }
  const double avg = report.average_rank().value_or(-1);
  const std::map<int, u64> row{{0, 722275}, {1, 1073502}, {2, 400769}, {3, 51258}, {4, 1551}, {5, 7}, {6, 0}};
  bool cells_ok = true;
  std::string cells;
  for (const auto& [rank, want] : row) {
    const auto it = report.rank_histogram.find(rank);
    const u64 got = it == report.rank_histogram.end() ? 0 : it->second;
    cells_ok = cells_ok && std::abs(double(got) - double(want)) <= 0.001 * double(want);
    cells += " " + std::to_string(got);
  }
  return {f1 == 3594891 && std::abs(avg - 0.904724540) <= 0.002 && cells_ok,
          detail + "; average rank " + fmt(avg, 9) + " over " + std::to_string(report.determined()) +
              " determined; histogram" + cells};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  bool run_stretch = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_flag("--stretch", run_stretch, "Run the full rank census for criterion 12");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"enumeration exactness", enumeration_exactness},
      {"tiny-window oracle", tiny_window},
      {"conductor fixtures", conductor_fixtures},
      {"torsion fixtures", torsion_fixtures},
      {"rank pipeline fixtures", rank_fixtures},
      {"zero-sum correctness", zero_sum_correctness},
      {"special-function self-consistency", special_functions},
      {"theoretical formula evaluators", formula_evaluators},
      {"census vs asymptotics", [&] { return census(threads); }},
      {"parity consistency", [&] { return parity(threads); }},
      {"merge/resume properties", [&] { return merge_resume(threads); }},
      {"stretch: average rank at naive height 10^8", [&] { return stretch(run_stretch, threads); }},
  };
  bool required_ok = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
    if (!o.pass && i + 1 != 12) required_ok = false;
  }
  return required_ok ? 0 : 1;
}
