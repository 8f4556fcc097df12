#include "ecdb/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <limits>
#include <sstream>

namespace ecdb {

namespace {

constexpr int kColumns = 16;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

int parse_int(const std::string& s, const char* what) {
  const i128 v = parse_i128(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(std::string(what) + " out of range");
  }
  return int(v);
}

std::optional<int> parse_opt(const std::string& s, const char* what) {
  if (s.empty()) return std::nullopt;
  return parse_int(s, what);
}

std::string hex16(u64 v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_atomically(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

const std::string& header_line() {
  static const std::string h = std::string(kRecordHeader) + "\n";
  return h;
}

}  // namespace

std::string render_record(const CurveRecord& r) {
  std::string s;
  s += to_string(r.a4) + ',' + to_string(r.a6) + ',' + to_string(r.h_naive) + ',' + to_string(r.h_uncal) + ',';
  s += to_string(r.disc) + ',' + to_string(r.cond) + ',' + to_string(r.tamagawa) + ',' + r.torsion + ',';
  s += opt(r.root_number) + ',' + std::to_string(r.rank_lower) + ',' + opt(r.rank_upper) + ',' + opt(r.rank) + ',';
  s += to_string(r.rank_status) + ',' + opt(r.sel2_rank) + ',' + opt(r.sha2_rank) + ',' + (r.is_cm ? "1" : "0");
  return s;
}

CurveRecord parse_record(const std::string& line) {
  const auto f = split_fields(line);
  if (int(f.size()) != kColumns) {
    throw std::invalid_argument("record has " + std::to_string(f.size()) + " fields, expected " +
                                std::to_string(kColumns));
  }
  CurveRecord r;
  r.a4 = parse_i128(f[0]);
  r.a6 = parse_i128(f[1]);
  r.h_naive = parse_i128(f[2]);
  r.h_uncal = parse_i128(f[3]);
  r.disc = parse_i128(f[4]);
  r.cond = parse_i128(f[5]);
  r.tamagawa = parse_i128(f[6]);
  r.torsion = f[7];
  if (parse_torsion_label(r.torsion).label() != r.torsion) throw std::invalid_argument("bad torsion label");
  r.root_number = parse_opt(f[8], "root_number");
  if (r.root_number && *r.root_number != 1 && *r.root_number != -1) {
    throw std::invalid_argument("root_number must be 1 or -1");
  }
  r.rank_lower = parse_int(f[9], "rank_lower");
  r.rank_upper = parse_opt(f[10], "rank_upper");
  r.rank = parse_opt(f[11], "rank");
  r.rank_status = parse_rank_status(f[12]);
  r.sel2_rank = parse_opt(f[13], "sel2_rank");
  r.sha2_rank = parse_opt(f[14], "sha2_rank");
  if (f[15] != "0" && f[15] != "1") throw std::invalid_argument("is_cm must be 0 or 1");
  r.is_cm = f[15] == "1";
  return r;
}

std::string ShardMeta::render() const {
  return "kind=" + to_string(window.kind) + " lo=" + to_string(window.lo) + " hi=" + to_string(window.hi) +
         " rows=" + std::to_string(rows) + " checksum=" + hex16(checksum) +
         " status=" + (status == ShardStatus::sealed ? "sealed" : "in-progress") + " config=" + config_hash;
}

ShardMeta ShardMeta::parse(const std::string& line) {
  std::istringstream ss(line);
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("meta token without '=': " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"kind", "lo", "hi", "rows", "checksum", "status", "config"}) {
    if (!kv.count(key)) throw std::invalid_argument(std::string("meta missing ") + key);
  }
  ShardMeta m;
  m.window.kind = parse_height_kind(kv["kind"]);
  m.window.lo = parse_i128(kv["lo"]);
  m.window.hi = parse_i128(kv["hi"]);
  m.rows = std::stoull(kv["rows"]);
  if (kv["checksum"].size() != 16) throw std::invalid_argument("meta checksum must be 16 hex digits");
  m.checksum = std::stoull(kv["checksum"], nullptr, 16);
  if (kv["status"] == "sealed") {
    m.status = ShardStatus::sealed;
  } else if (kv["status"] == "in-progress") {
    m.status = ShardStatus::in_progress;
  } else {
    throw std::invalid_argument("meta status: " + kv["status"]);
  }
  m.config_hash = kv["config"];
  return m;
}

std::string shard_filename(const HeightWindow& w) {
  return "shard_" + to_string(w.kind) + "_" + to_string(w.lo) + "_" + to_string(w.hi) + ".csv";
}

fs::path meta_path(const fs::path& shard) { return fs::path(shard.string() + ".meta"); }

ShardMeta read_meta(const fs::path& shard) {
  std::ifstream in(meta_path(shard));
  if (!in) throw CorruptShard("missing sidecar for " + shard.string());
  std::string line;
  std::getline(in, line);
  try {
    return ShardMeta::parse(line);
  } catch (const std::exception& e) {
    throw CorruptShard("bad sidecar for " + shard.string() + ": " + e.what());
  }
}

ShardWriter::ShardWriter(const fs::path& dir, const HeightWindow& window, const std::string& config_hash) {
  window.validate();
  if (window.kind == HeightKind::f1) throw std::invalid_argument("ShardWriter: record shards use naive or uncalibrated heights");
  fs::create_directories(dir);
  path_ = dir / shard_filename(window);

  const fs::path lock = path_.string() + ".lock";
  lock_fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR, 0644);
  if (lock_fd_ < 0) throw std::runtime_error("cannot open lock " + lock.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw std::runtime_error("shard is locked by another writer: " + path_.string());
  }

  meta_.window = window;
  meta_.config_hash = config_hash;
  if (fs::exists(meta_path(path_))) {
    const ShardMeta old = read_meta(path_);
    if (!(old.window == window)) throw CorruptShard("sidecar window does not match " + path_.string());
    if (old.config_hash != config_hash) {
      throw std::runtime_error("config hash " + config_hash + " differs from the shard's " + old.config_hash);
    }
    if (old.status == ShardStatus::sealed) {
      meta_ = old;
      return;
    }
  }

  std::string text = fs::exists(path_) ? slurp(path_) : std::string();
  const std::string& h = header_line();
  if (text.size() < h.size()) {
    if (h.compare(0, text.size(), text) != 0) throw CorruptShard("bad header in " + path_.string());
    text = h;
  } else if (text.compare(0, h.size(), h) != 0) {
    throw CorruptShard("bad header in " + path_.string());
  }
  // Drop a partial last line left by an interrupted append.
  text.resize(text.rfind('\n') + 1);

  meta_.checksum = fnv1a64(h);
  meta_.rows = 0;
  std::size_t pos = h.size();
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    CurveRecord r;
    try {
      r = parse_record(line);
    } catch (const std::exception& e) {
      throw CorruptShard("unparseable row in " + path_.string() + ": " + e.what());
    }
    if (!keys_.insert(r.curve()).second) throw CorruptShard("duplicate key in " + path_.string());
    meta_.checksum = fnv1a64(text.substr(pos, nl - pos + 1), meta_.checksum);
    ++meta_.rows;
    pos = nl + 1;
  }
  write_atomically(path_, text);
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw std::runtime_error("cannot append to " + path_.string());
  flush_meta();
}

ShardWriter::~ShardWriter() {
  if (out_.is_open()) out_.close();
  if (lock_fd_ >= 0) {
    std::error_code ec;
    fs::remove(path_.string() + ".lock", ec);
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::size_t ShardWriter::write(const std::vector<CurveRecord>& records) {
  if (meta_.status == ShardStatus::sealed) throw std::logic_error("write after seal: " + path_.string());
  for (const auto& r : records) {
    const i128 h = height(r.curve(), meta_.window.kind);
    if (!meta_.window.contains(h)) {
      throw std::out_of_range("record " + r.curve().str() + " at height " + to_string(h) + " is outside " +
                              shard_filename(meta_.window));
    }
  }
  std::size_t appended = 0;
  std::string buf;
  for (const auto& r : records) {
    if (!keys_.insert(r.curve()).second) continue;
    const std::string line = render_record(r) + "\n";
    meta_.checksum = fnv1a64(line, meta_.checksum);
    ++meta_.rows;
    buf += line;
    ++appended;
  }
  out_ << buf;
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
  flush_meta();
  return appended;
}

void ShardWriter::seal() {
  if (meta_.status == ShardStatus::sealed) return;
  out_.flush();
  out_.close();
  meta_.status = ShardStatus::sealed;
  flush_meta();
}

void ShardWriter::flush_meta() { write_atomically(meta_path(path_), meta_.render() + "\n"); }

u64 file_checksum(const fs::path& shard) { return fnv1a64(slurp(shard)); }

std::vector<CurveRecord> read_records(const fs::path& shard) {
  const ShardMeta meta = read_meta(shard);
  const std::string text = slurp(shard);
  const std::string& h = header_line();
  if (text.compare(0, h.size(), h) != 0) throw CorruptShard("bad header in " + shard.string());
  if (meta.status == ShardStatus::sealed && fnv1a64(text) != meta.checksum) {
    throw CorruptShard("checksum mismatch in " + shard.string());
  }
  std::vector<CurveRecord> out;
  std::size_t pos = h.size();
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      if (meta.status == ShardStatus::sealed) throw CorruptShard("unterminated row in " + shard.string());
      break;
    }
    try {
      out.push_back(parse_record(text.substr(pos, nl - pos)));
    } catch (const std::exception& e) {
      throw CorruptShard("unparseable row in " + shard.string() + ": " + e.what());
    }
    pos = nl + 1;
  }
  if (meta.status == ShardStatus::sealed && out.size() != meta.rows) {
    throw CorruptShard("row count mismatch in " + shard.string());
  }
  return out;
}

std::vector<ShardInfo> list_shards(const fs::path& dir) {
  std::vector<ShardInfo> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("shard_", 0) != 0 || entry.path().extension() != ".csv") continue;
    if (!fs::exists(meta_path(entry.path()))) continue;
    out.push_back({entry.path(), read_meta(entry.path())});
  }
  std::sort(out.begin(), out.end(), [](const ShardInfo& a, const ShardInfo& b) {
    if (a.meta.window.kind != b.meta.window.kind) return a.meta.window.kind < b.meta.window.kind;
    return a.meta.window.lo < b.meta.window.lo;
  });
  return out;
}

std::vector<HeightWindow> resume(const fs::path& dir) {
  std::vector<HeightWindow> out;
  for (const auto& s : list_shards(dir)) {
    if (s.meta.status != ShardStatus::sealed) out.push_back(s.meta.window);
  }
  return out;
}

std::vector<HeightWindow> tile_window(const HeightWindow& w, i128 size) {
  w.validate();
  if (size < 1) throw std::invalid_argument("tile_window: size must be >= 1");
  std::vector<HeightWindow> out;
  for (i128 lo = w.lo; lo < w.hi; lo += size) out.push_back({w.kind, lo, std::min(w.hi, lo + size)});
  return out;
}

namespace {

void put_le(std::string& s, u128 v, int bytes) {
  for (int i = 0; i < bytes; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

u128 get_le(const std::string& s, std::size_t at, int bytes) {
  u128 v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}

}  // namespace

void write_ap_cache(const fs::path& path, const Curve& c, const std::vector<std::pair<u64, i64>>& traces) {
  std::string s = "ECAP";
  put_le(s, u128(c.a4), 16);
  put_le(s, u128(c.a6), 16);
  for (const auto& [p, ap] : traces) {
    put_le(s, p, 8);
    put_le(s, u64(ap), 8);
  }
  write_atomically(path, s);
}

std::pair<Curve, std::vector<std::pair<u64, i64>>> read_ap_cache(const fs::path& path) {
  const std::string s = slurp(path);
  if (s.size() < 36 || s.compare(0, 4, "ECAP") != 0) throw std::runtime_error("not an a_p cache: " + path.string());
  if ((s.size() - 36) % 16 != 0) throw std::runtime_error("truncated a_p cache: " + path.string());
  Curve c{i128(get_le(s, 4, 16)), i128(get_le(s, 20, 16))};
  std::vector<std::pair<u64, i64>> traces;
  for (std::size_t at = 36; at < s.size(); at += 16) {
    traces.emplace_back(u64(get_le(s, at, 8)), i64(u64(get_le(s, at + 8, 8))));
  }
  return {c, std::move(traces)};
}

}  // namespace ecdb
