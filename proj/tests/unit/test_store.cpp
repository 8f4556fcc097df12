#include <doctest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <random>
#include <stdexcept>

#include "ecdb/stats.hpp"
#include "ecdb/store.hpp"

using namespace ecdb;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ecdb_store_" + std::to_string(::getpid()) + "_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<CurveRecord> records_in(const HeightWindow& w, u64 seed, std::size_t limit = SIZE_MAX) {
  std::mt19937_64 rng(seed);
  std::vector<CurveRecord> out;
  for (const auto& c : enumerate_curves(w)) {
    if (out.size() == limit) break;
    CurveRecord r;
    r.a4 = c.a4;
    r.a6 = c.a6;
    r.h_naive = height_naive(c);
    r.h_uncal = height_uncalibrated(c);
    r.disc = discriminant(c);
    r.cond = 1 + i128(rng() % 100000);
    r.tamagawa = 1 + i128(rng() % 8);
    r.torsion = rng() % 4 ? "trivial" : "Z/2";
    if (rng() % 5) r.root_number = rng() % 2 ? 1 : -1;
    r.rank_lower = int(rng() % 3);
    if (rng() % 4) {
      r.rank_upper = r.rank_lower + int(rng() % 2);
      if (*r.rank_upper == r.rank_lower) {
        r.rank = r.rank_lower;
        r.rank_status = RankStatus::grh_bsd;
      }
    }
    if (rng() % 3 == 0) {
      r.sel2_rank = int(rng() % 5);
      r.sha2_rank = 2;
    }
    r.is_cm = rng() % 50 == 0;
    out.push_back(r);
  }
  return out;
}

const std::string kConfig = "0123456789abcdef";

}  // namespace

TEST_CASE("record rendering") {
  for (const auto& r : records_in({HeightKind::naive, 0, 5000}, 3)) {
    const std::string line = render_record(r);
    CHECK(parse_record(line) == r);
    CHECK(std::count(line.begin(), line.end(), ',') == 15);
  }
  CurveRecord big;
  big.a4 = -(i128(1) << 100);
  big.a6 = (i128(1) << 120) + 7;
  big.disc = -(i128(1) << 126);
  CHECK(parse_record(render_record(big)) == big);
  CHECK_THROWS_AS(parse_record("1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_record(render_record(big) + ",extra"), std::invalid_argument);
  CHECK_THROWS_AS(parse_record("x" + render_record(big)), std::invalid_argument);
}

TEST_CASE("meta line") {
  ShardMeta m;
  m.window = {HeightKind::uncalibrated, 100, 2000};
  m.rows = 12;
  m.checksum = 0x0123456789abcdefULL;
  m.status = ShardStatus::sealed;
  m.config_hash = kConfig;
  CHECK(m.render() == "kind=uncalibrated lo=100 hi=2000 rows=12 checksum=0123456789abcdef status=sealed config=" + kConfig);
  CHECK(ShardMeta::parse(m.render()) == m);
  CHECK_THROWS(ShardMeta::parse("kind=naive lo=0"));
  CHECK(shard_filename(m.window) == "shard_uncalibrated_100_2000.csv");
}

TEST_CASE("write, replay and seal") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 3000};
  const auto recs = records_in(w, 1);
  REQUIRE(recs.size() > 100);
  fs::path shard;
  {
    ShardWriter writer(dir.path, w, kConfig);
    shard = writer.path();
    CHECK(fs::exists(shard.string() + ".lock"));
    CHECK(writer.write(recs) == recs.size());
    // Replaying the same records appends nothing.
    CHECK(writer.write(recs) == 0);
    CHECK(writer.meta().rows == recs.size());
    CHECK(read_meta(shard).status == ShardStatus::in_progress);
    CHECK(resume(dir.path) == std::vector<HeightWindow>{w});
    writer.seal();
    CHECK_THROWS_AS(writer.write(recs), std::logic_error);
  }
  CHECK_FALSE(fs::exists(shard.string() + ".lock"));
  const ShardMeta meta = read_meta(shard);
  CHECK(meta.status == ShardStatus::sealed);
  CHECK(meta.checksum == file_checksum(shard));
  CHECK(read_records(shard) == recs);
  CHECK(resume(dir.path).empty());
  ShardWriter reopened(dir.path, w, kConfig);
  CHECK(reopened.meta() == meta);
  CHECK_THROWS_AS(reopened.write({recs[0]}), std::logic_error);
}

TEST_CASE("out-of-window records are rejected before anything is written") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 100, 2000};
  auto recs = records_in(w, 2, 20);
  ShardWriter writer(dir.path, w, kConfig);
  auto bad = recs;
  bad.push_back(records_in({HeightKind::naive, 0, 30}, 2, 1).front());
  CHECK_THROWS_AS(writer.write(bad), std::out_of_range);
  CHECK(writer.meta().rows == 0);
  CHECK(writer.write(recs) == recs.size());
}

TEST_CASE("config hash mismatch") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 100};
  { ShardWriter writer(dir.path, w, kConfig); }
  CHECK_THROWS_AS(ShardWriter(dir.path, w, "ffffffffffffffff"), std::runtime_error);
}

TEST_CASE("a sealed shard of 10^5 rows") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 4000000};
  const auto recs = records_in(w, 5, 100000);
  REQUIRE(recs.size() == 100000);
  fs::path shard;
  {
    ShardWriter writer(dir.path, w, kConfig);
    shard = writer.path();
    for (std::size_t i = 0; i < recs.size(); i += 4096)
      writer.write({recs.begin() + i, recs.begin() + std::min(recs.size(), i + 4096)});
    writer.seal();
  }
  const auto back = read_records(shard);
  CHECK(back.size() == 100000);
  CHECK(back == recs);
  CHECK(read_meta(shard).rows == 100000);
}

TEST_CASE("corruption is detected") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 2000};
  const auto recs = records_in(w, 9);
  fs::path shard;
  {
    ShardWriter writer(dir.path, w, kConfig);
    shard = writer.path();
    writer.write(recs);
    writer.seal();
  }
  const std::string good = slurp(shard);
  SUBCASE("flipped digit") {
    std::string bad = good;
    const auto pos = bad.rfind(",1,") + 1;
    bad[pos] = '2';
    std::ofstream(shard, std::ios::binary) << bad;
    CHECK_THROWS_AS(read_records(shard), CorruptShard);
  }
  SUBCASE("dropped row") {
    std::string bad = good;
    bad.resize(bad.rfind('\n', bad.size() - 2) + 1);
    std::ofstream(shard, std::ios::binary) << bad;
    CHECK_THROWS_AS(read_records(shard), CorruptShard);
  }
  SUBCASE("bad header") {
    std::ofstream(shard, std::ios::binary) << "a4,a6\n" << good.substr(good.find('\n') + 1);
    CHECK_THROWS_AS(read_records(shard), CorruptShard);
  }
}

TEST_CASE("resume after an interrupted append") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 2000};
  const auto recs = records_in(w, 4);
  fs::path shard;
  {
    ShardWriter writer(dir.path, w, kConfig);
    shard = writer.path();
    writer.write({recs.begin(), recs.begin() + 40});
  }
  // A torn last line.
  std::ofstream(shard, std::ios::binary | std::ios::app) << "-7,3,12";
  {
    ShardWriter writer(dir.path, w, kConfig);
    CHECK(writer.meta().rows == 40);
    CHECK(writer.contains(recs[39].curve()));
    CHECK(writer.write(recs) == recs.size() - 40);
    writer.seal();
  }
  CHECK(read_records(shard) == recs);
}

TEST_CASE("kill and resume gives byte-identical shards") {
  TempDir a, b;
  const HeightWindow w{HeightKind::naive, 0, 20000};
  const auto recs = records_in(w, 8);
  REQUIRE(recs.size() > 1000);
  {
    ShardWriter writer(a.path, w, kConfig);
    for (std::size_t i = 0; i < recs.size(); i += 97)
      writer.write({recs.begin() + i, recs.begin() + std::min(recs.size(), i + 97)});
    writer.seal();
  }
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    ShardWriter writer(b.path, w, kConfig);
    for (std::size_t i = 0; i < recs.size() / 2; i += 97)
      writer.write({recs.begin() + i, recs.begin() + std::min(recs.size(), i + 97)});
    ::kill(::getpid(), SIGKILL);
    ::_exit(0);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  REQUIRE(WIFSIGNALED(status));
  REQUIRE(resume(b.path) == std::vector<HeightWindow>{w});
  {
    ShardWriter writer(b.path, w, kConfig);
    CHECK(writer.meta().rows > 0);
    for (std::size_t i = 0; i < recs.size(); i += 97)
      writer.write({recs.begin() + i, recs.begin() + std::min(recs.size(), i + 97)});
    writer.seal();
  }
  const std::string name = shard_filename(w);
  CHECK(slurp(a.path / name) == slurp(b.path / name));
  CHECK(slurp(meta_path(a.path / name)) == slurp(meta_path(b.path / name)));
}

TEST_CASE("tiled shards cover the window and merge exactly") {
  TempDir dir;
  const HeightWindow whole{HeightKind::naive, 0, 10000};
  const auto tiles = tile_window(whole, 1500);
  REQUIRE(tiles.size() == 7);
  CHECK(tiles.front().lo == 0);
  CHECK(tiles.back().hi == 10000);
  for (std::size_t i = 1; i < tiles.size(); ++i) CHECK(tiles[i].lo == tiles[i - 1].hi);
  for (const auto& t : tiles) {
    ShardWriter writer(dir.path, t, kConfig);
    writer.write(records_in(t, 6));
    writer.seal();
  }
  std::vector<CurveRecord> all;
  StatReport merged;
  for (const auto& s : list_shards(dir.path)) {
    const auto part = read_records(s.path);
    merged.merge(aggregate(part));
    all.insert(all.end(), part.begin(), part.end());
  }
  std::vector<Curve> keys;
  for (const auto& r : all) keys.push_back(r.curve());
  auto expected = enumerate_curves(whole);
  std::sort(keys.begin(), keys.end());
  std::sort(expected.begin(), expected.end());
  CHECK(keys == expected);
  CHECK(merged == aggregate(all));
  CHECK_THROWS_AS(tile_window(whole, 0), std::invalid_argument);
}

TEST_CASE("a_p cache") {
  TempDir dir;
  const Curve c{-(i128(1) << 90), (i128(1) << 100) + 3};
  const std::vector<std::pair<u64, i64>> traces{{2, 0}, {3, -1}, {5, 2}, {1000003, -1987}};
  const fs::path p = dir.path / "cache.ecap";
  write_ap_cache(p, c, traces);
  CHECK(fs::file_size(p) == 4 + 32 + 16 * traces.size());
  const auto [c2, t2] = read_ap_cache(p);
  CHECK(c2 == c);
  CHECK(t2 == traces);
  std::ofstream(p, std::ios::binary | std::ios::app) << "xyz";
  CHECK_THROWS_AS(read_ap_cache(p), std::runtime_error);
  std::ofstream(p, std::ios::binary) << "NOPE" << std::string(32, '\0');
  CHECK_THROWS_AS(read_ap_cache(p), std::runtime_error);
}

TEST_CASE("one writer per shard") {
  TempDir dir;
  const HeightWindow w{HeightKind::naive, 0, 100};
  ShardWriter first(dir.path, w, kConfig);
  CHECK_THROWS_AS(ShardWriter(dir.path, w, kConfig), std::runtime_error);
  CHECK_THROWS_AS(ShardWriter(dir.path, {HeightKind::f1, 0, 100}, kConfig), std::invalid_argument);
}
