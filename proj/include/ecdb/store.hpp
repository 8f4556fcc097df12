#pragma once

// Sharded CSV persistence of curve records with checksummed sidecars, and
// the binary a_p cache.

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ecdb/enumerate.hpp"
#include "ecdb/pipeline.hpp"

namespace ecdb {

namespace fs = std::filesystem;

/// Header line of every shard, without the newline.
inline constexpr const char* kRecordHeader =
    "a4,a6,h_naive,h_uncal,disc,cond,tamagawa,torsion,root_number,rank_lower,rank_upper,rank,rank_status,"
    "sel2_rank,sha2_rank,is_cm";

/// One CSV row, no trailing newline. Empty fields are absent optionals.
std::string render_record(const CurveRecord& r);
/// Inverse of render_record; throws std::invalid_argument on malformed rows.
CurveRecord parse_record(const std::string& line);

/// Thrown when a shard fails its checksum or row-count check, or cannot be parsed.
class CorruptShard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ShardStatus { in_progress, sealed };

struct ShardMeta {
  HeightWindow window;
  u64 rows = 0;
  u64 checksum = kFnvOffset;  ///< FNV-1a over the header and row lines, newlines included
  ShardStatus status = ShardStatus::in_progress;
  std::string config_hash;

  /// "kind=naive lo=0 hi=1000 rows=12 checksum=<16 hex> status=sealed config=<hash>"
  std::string render() const;
  static ShardMeta parse(const std::string& line);
  bool operator==(const ShardMeta&) const = default;
};

/// "shard_<kind>_<lo>_<hi>.csv".
std::string shard_filename(const HeightWindow& w);
/// The sidecar path for a shard: the shard path with ".meta" appended.
fs::path meta_path(const fs::path& shard);

ShardMeta read_meta(const fs::path& shard);

/// Single writer for one shard. Opening an existing in-progress shard resumes
/// it: a partial last line is truncated and the keys already present are
/// skipped on replay. Writers hold an advisory lock for their lifetime.
class ShardWriter {
 public:
  ShardWriter(const fs::path& dir, const HeightWindow& window, const std::string& config_hash);
  ~ShardWriter();
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  /// Appends the records whose key is not yet present, in the given order.
  /// Throws std::out_of_range for a record outside the window and
  /// std::logic_error after seal. Returns the number of rows appended.
  std::size_t write(const std::vector<CurveRecord>& records);
  void seal();

  const ShardMeta& meta() const { return meta_; }
  const fs::path& path() const { return path_; }
  bool contains(const Curve& c) const { return keys_.count(c) != 0; }

 private:
  void flush_meta();

  fs::path path_;
  ShardMeta meta_;
  std::set<Curve> keys_;
  std::ofstream out_;
  int lock_fd_ = -1;
};

/// Reads every row, checking the header, the row count and, for sealed
/// shards, the checksum. Throws CorruptShard on any mismatch.
std::vector<CurveRecord> read_records(const fs::path& shard);

/// Checksum of a shard file as it is on disk.
u64 file_checksum(const fs::path& shard);

struct ShardInfo {
  fs::path path;
  ShardMeta meta;
};

/// All shards in dir (those with a sidecar), ordered by kind then lo.
std::vector<ShardInfo> list_shards(const fs::path& dir);

/// Windows of the shards in dir that are not sealed.
std::vector<HeightWindow> resume(const fs::path& dir);

/// Splits [lo, hi) into consecutive windows of at most `size` heights.
std::vector<HeightWindow> tile_window(const HeightWindow& w, i128 size);

// a_p cache: "ECAP", a4 and a6 as 16-byte little-endian two's complement,
// then (p: u64, a_p: i64) little-endian pairs.

void write_ap_cache(const fs::path& path, const Curve& c, const std::vector<std::pair<u64, i64>>& traces);
/// Throws std::runtime_error on a bad magic or truncated pair.
std::pair<Curve, std::vector<std::pair<u64, i64>>> read_ap_cache(const fs::path& path);

}  // namespace ecdb
