#include "ecdb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ecdb/zerosum.hpp"

namespace ecdb {

void Moments::add(i64 x, i64 y) {
  ++n;
  sx += x;
  sy += y;
  sxx += x * x;
  syy += y * y;
  sxy += x * y;
}

void Moments::merge(const Moments& o) {
  n += o.n;
  sx += o.sx;
  sy += o.sy;
  sxx += o.sxx;
  syy += o.syy;
  sxy += o.sxy;
}

std::optional<double> Moments::r() const {
  if (n < 2) return std::nullopt;
  // n * sum(xy) - sum(x) sum(y) etc., exact in 128 bits.
  const i128 nn = i128(n);
  const i128 cov = nn * sxy - i128(sx) * sy;
  const i128 vx = nn * sxx - i128(sx) * sx;
  const i128 vy = nn * syy - i128(sy) * sy;
  if (vx <= 0 || vy <= 0) return std::nullopt;
  return double(cov) / std::sqrt(double(vx) * double(vy));
}

int series_bucket(i128 height) {
  if (height <= 1) return 0;
  int k = static_cast<int>(std::floor(std::log(double(height)) / std::log(kSeriesRatio)));
  // Guard against rounding at the edges.
  while (k > 0 && std::pow(kSeriesRatio, k) > double(height)) --k;
  while (std::pow(kSeriesRatio, k + 1) <= double(height)) ++k;
  return k;
}

double series_bucket_upper(int bucket) { return std::pow(kSeriesRatio, bucket + 1); }

namespace {

template <class K>
void merge_counts(std::map<K, u64>& into, const std::map<K, u64>& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

void merge_minimal(MinimalRecord& into, const MinimalRecord& from) {
  if (into.curves.empty() || from.height < into.height) {
    into = from;
  } else if (from.height == into.height) {
    into.curves.insert(into.curves.end(), from.curves.begin(), from.curves.end());
    std::sort(into.curves.begin(), into.curves.end());
    into.curves.erase(std::unique(into.curves.begin(), into.curves.end()), into.curves.end());
  }
}

int sign(i128 v) { return v > 0 ? 1 : -1; }

}  // namespace

void StatReport::add(const CurveRecord& r) {
  const i128 h = height(r.curve(), kind);
  ++count;
  max_height = std::max(max_height, h);
  torsion[r.torsion]++;
  const int s = sign(r.disc);
  disc_sign_count[s]++;
  if (r.root_number) {
    root_number_sum += *r.root_number;
    ++root_number_known;
  }
  if (r.sel2_rank) sel2_histogram[*r.sel2_rank]++;
  if (r.sha2_rank) sha2_histogram[*r.sha2_rank]++;
  if (r.is_cm) ++cm_count;
  if (!r.rank) {
    ++undetermined;
    return;
  }
  const int rank = *r.rank;
  rank_histogram[rank]++;
  buckets[series_bucket(h)][rank]++;
  rank_by_disc_sign[s][rank]++;
  if (r.is_cm) cm_rank_histogram[rank]++;
  rank_vs_sign.add(rank, s);
  merge_minimal(minimal[{r.torsion, rank}], MinimalRecord{h, {r.curve()}});
}

void StatReport::merge(const StatReport& o) {
  if (o.count == 0) return;
  if (count == 0) kind = o.kind;
  if (kind != o.kind) throw std::invalid_argument("StatReport::merge: height kinds differ");
  count += o.count;
  undetermined += o.undetermined;
  max_height = std::max(max_height, o.max_height);
  merge_counts(rank_histogram, o.rank_histogram);
  for (const auto& [b, hist] : o.buckets) merge_counts(buckets[b], hist);
  for (const auto& [s, hist] : o.rank_by_disc_sign) merge_counts(rank_by_disc_sign[s], hist);
  merge_counts(disc_sign_count, o.disc_sign_count);
  merge_counts(torsion, o.torsion);
  for (const auto& [key, rec] : o.minimal) merge_minimal(minimal[key], rec);
  root_number_sum += o.root_number_sum;
  root_number_known += o.root_number_known;
  merge_counts(sel2_histogram, o.sel2_histogram);
  merge_counts(sha2_histogram, o.sha2_histogram);
  cm_count += o.cm_count;
  merge_counts(cm_rank_histogram, o.cm_rank_histogram);
  rank_vs_sign.merge(o.rank_vs_sign);
}

namespace {

std::optional<double> mean_of(const std::map<int, u64>& hist) {
  u64 n = 0;
  i64 s = 0;
  for (const auto& [k, v] : hist) {
    n += v;
    s += i64(k) * i64(v);
  }
  if (n == 0) return std::nullopt;
  return double(s) / double(n);
}

}  // namespace

std::optional<double> StatReport::average_rank() const { return mean_of(rank_histogram); }

std::optional<double> StatReport::root_number_mean() const {
  if (root_number_known == 0) return std::nullopt;
  return double(root_number_sum) / double(root_number_known);
}

std::optional<double> StatReport::positive_disc_fraction() const {
  if (count == 0) return std::nullopt;
  auto it = disc_sign_count.find(1);
  return double(it == disc_sign_count.end() ? 0 : it->second) / double(count);
}

std::vector<std::pair<double, double>> StatReport::average_rank_series() const {
  std::vector<std::pair<double, double>> out;
  u64 n = 0;
  i64 s = 0;
  for (const auto& [b, hist] : buckets) {
    for (const auto& [k, v] : hist) {
      n += v;
      s += i64(k) * i64(v);
    }
    out.emplace_back(series_bucket_upper(b), double(s) / double(n));
  }
  return out;
}

std::vector<std::pair<double, double>> StatReport::rank_proportion_series(int rank) const {
  std::vector<std::pair<double, double>> out;
  u64 n = 0, hits = 0;
  for (const auto& [b, hist] : buckets) {
    for (const auto& [k, v] : hist) {
      n += v;
      if (k == rank) hits += v;
    }
    out.emplace_back(series_bucket_upper(b), double(hits) / double(n));
  }
  return out;
}

StatReport aggregate(const std::vector<CurveRecord>& records, HeightKind kind) {
  StatReport r;
  r.kind = kind;
  for (const auto& rec : records) r.add(rec);
  return r;
}

std::vector<MinimalHeightRow> minimal_height_records(const StatReport& report) {
  std::vector<MinimalHeightRow> rows;
  for (const auto& [key, rec] : report.minimal) rows.push_back({key.first, key.second, rec});
  std::stable_sort(rows.begin(), rows.end(), [](const MinimalHeightRow& a, const MinimalHeightRow& b) {
    const TorsionGroup ga = parse_torsion_label(a.torsion), gb = parse_torsion_label(b.torsion);
    if (ga.order() != gb.order()) return ga.order() < gb.order();
    if (ga.m != gb.m) return ga.m < gb.m;
    return a.rank < b.rank;
  });
  return rows;
}

std::vector<MinimalHeightRow> minimal_height_records(const std::vector<CurveRecord>& records, HeightKind kind) {
  return minimal_height_records(aggregate(records, kind));
}

namespace {

std::string fmt(std::optional<double> v, int digits = 9) {
  if (!v) return "undefined";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << *v;
  return ss.str();
}

std::string curve_list(const std::vector<Curve>& cs) {
  std::string s;
  for (const auto& c : cs) {
    if (!s.empty()) s += ' ';
    s += c.str();
  }
  return s;
}

}  // namespace

void write_report_text(std::ostream& os, const StatReport& r) {
  os << "height kind: " << to_string(r.kind) << "\n";
  os << "curves: " << r.count << "\n";
  os << "max height: " << to_string(r.max_height) << "\n";
  os << "undetermined ranks: " << r.undetermined << " (excluded from rank statistics)\n";
  os << "average rank: " << fmt(r.average_rank()) << "\n";
  os << "rank histogram:";
  for (const auto& [k, v] : r.rank_histogram) os << " " << k << ":" << v;
  os << "\n";
  if (r.max_height > 1) {
    auto it = r.rank_histogram.find(2);
    const double n2 = it == r.rank_histogram.end() ? 0.0 : double(it->second);
    os << "rank 2 count / X^(19/24)(ln X)^(3/8): " << fmt(n2 / rank2_growth(double(r.max_height)), 6) << "\n";
  }
  os << "positive discriminant fraction: " << fmt(r.positive_disc_fraction(), 6) << "\n";
  for (const auto& [s, hist] : r.rank_by_disc_sign) {
    os << "  disc " << (s > 0 ? "> 0" : "< 0") << ": average rank " << fmt(mean_of(hist)) << ", histogram";
    for (const auto& [k, v] : hist) os << " " << k << ":" << v;
    os << "\n";
  }
  os << "correlation r(rank, sign disc): " << fmt(r.correlation(), 6) << "\n";
  os << "root number mean: " << fmt(r.root_number_mean(), 6) << " over " << r.root_number_known << " curves\n";
  os << "torsion census:\n";
  std::vector<std::pair<std::string, u64>> tors(r.torsion.begin(), r.torsion.end());
  std::stable_sort(tors.begin(), tors.end(), [](const auto& a, const auto& b) {
    const TorsionGroup ga = parse_torsion_label(a.first), gb = parse_torsion_label(b.first);
    return ga.order() != gb.order() ? ga.order() < gb.order() : ga.m < gb.m;
  });
  for (const auto& [t, v] : tors) os << "  " << t << ": " << v << "\n";
  os << "CM curves: " << r.cm_count;
  if (!r.cm_rank_histogram.empty()) {
    os << ", ranks";
    for (const auto& [k, v] : r.cm_rank_histogram) os << " " << k << ":" << v;
  }
  os << "\n";
  if (!r.sel2_histogram.empty()) {
    os << "2-Selmer rank histogram:";
    for (const auto& [k, v] : r.sel2_histogram) os << " " << k << ":" << v;
    os << "\n";
  }
  if (!r.sha2_histogram.empty()) {
    os << "Sha[2] rank histogram:";
    for (const auto& [k, v] : r.sha2_histogram) os << " " << k << ":" << v;
    os << "\n";
  }
  os << "minimal heights (torsion, rank, height, curves):\n";
  for (const auto& row : minimal_height_records(r)) {
    os << "  " << row.torsion << ", " << row.rank << ", " << to_string(row.record.height) << ", "
       << curve_list(row.record.curves) << "\n";
  }
}

void write_report_csv(std::ostream& os, const StatReport& r) {
  os << "section,key,value\n";
  os << "summary,height_kind," << to_string(r.kind) << "\n";
  os << "summary,curves," << r.count << "\n";
  os << "summary,max_height," << to_string(r.max_height) << "\n";
  os << "summary,undetermined," << r.undetermined << "\n";
  os << "summary,average_rank," << fmt(r.average_rank()) << "\n";
  os << "summary,positive_disc_fraction," << fmt(r.positive_disc_fraction()) << "\n";
  os << "summary,correlation," << fmt(r.correlation()) << "\n";
  os << "summary,root_number_mean," << fmt(r.root_number_mean()) << "\n";
  os << "summary,cm_curves," << r.cm_count << "\n";
  for (const auto& [k, v] : r.rank_histogram) os << "rank," << k << "," << v << "\n";
  for (const auto& [s, hist] : r.rank_by_disc_sign) {
    for (const auto& [k, v] : hist) os << (s > 0 ? "rank_disc_pos," : "rank_disc_neg,") << k << "," << v << "\n";
  }
  for (const auto& [t, v] : r.torsion) os << "torsion," << t << "," << v << "\n";
  for (const auto& [k, v] : r.cm_rank_histogram) os << "cm_rank," << k << "," << v << "\n";
  for (const auto& [k, v] : r.sel2_histogram) os << "sel2_rank," << k << "," << v << "\n";
  for (const auto& [k, v] : r.sha2_histogram) os << "sha2_rank," << k << "," << v << "\n";
  for (const auto& row : minimal_height_records(r)) {
    os << "minimal," << row.torsion << " rank " << row.rank << "," << to_string(row.record.height) << " "
       << curve_list(row.record.curves) << "\n";
  }
}

void write_series_csv(std::ostream& os, const std::vector<std::pair<double, double>>& series,
                      const std::string& x_name, const std::string& y_name) {
  os << x_name << "," << y_name << "\n";
  os << std::setprecision(12);
  for (const auto& [x, y] : series) os << x << "," << y << "\n";
}

void write_series_svg(std::ostream& os, const std::vector<std::pair<double, double>>& series,
                      const std::string& title, const std::string& x_name, const std::string& y_name) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = 1, x1 = 10, y0 = 0, y1 = 1;
  if (!series.empty()) {
    x0 = x1 = std::log10(std::max(series.front().first, 1.0));
    y0 = y1 = series.front().second;
    for (const auto& [x, y] : series) {
      const double lx = std::log10(std::max(x, 1.0));
      x0 = std::min(x0, lx);
      x1 = std::max(x1, lx);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 - x0 < 1e-9) x1 = x0 + 1;
    if (y1 - y0 < 1e-9) {
      y0 -= 0.5;
      y1 += 0.5;
    }
  }
  auto px = [&](double x) { return L + (std::log10(std::max(x, 1.0)) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int d = int(std::ceil(x0)); d <= int(std::floor(x1)); ++d) {
    const double x = L + (d - x0) / (x1 - x0) * (W - L - R);
    os << "<text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"11\">1e" << d << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 + (y1 - y0) * i / 4;
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << std::setprecision(4) << y << std::setprecision(2) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_name << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">" << y_name << "</text>\n";
  if (!series.empty()) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series) os << px(x) << "," << py(y) << " ";
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

double pr_selmer_prob(u64 p, int d) {
  if (!is_prime(p)) throw std::invalid_argument("pr_selmer_prob: p must be prime");
  if (d < 0) throw std::invalid_argument("pr_selmer_prob: d must be >= 0");
  const double pd = double(p);
  double prod = 0.5;  // j = 0
  for (int j = 1;; ++j) {
    const double f = 1.0 / (1.0 + std::pow(pd, -j));
    prod *= f;
    if (1.0 - f < 1e-15) break;
  }
  for (int j = 1; j <= d; ++j) prod *= pd / (std::pow(pd, j) - 1.0);
  return prod;
}

double delaunay_sha_prob(u64 p, int r, int n) {
  if (!is_prime(p)) throw std::invalid_argument("delaunay_sha_prob: p must be prime");
  if (r < 0 || n < 0) throw std::invalid_argument("delaunay_sha_prob: r and n must be >= 0");
  const double pd = double(p);
  double v = std::pow(pd, -double(n) * (2.0 * r + 2.0 * n - 1.0));
  for (int i = n + 1;; ++i) {
    const double t = std::pow(pd, -(2.0 * r + 2.0 * i - 1.0));
    v *= 1.0 - t;
    if (t < 1e-15) break;
  }
  for (int i = 1; i <= n; ++i) v /= 1.0 - std::pow(pd, -2.0 * i);
  return v;
}

double expected_sha2_size(int r) {
  if (r < 0) throw std::invalid_argument("expected_sha2_size: rank must be >= 0");
  return 1.0 + std::ldexp(1.0, -(2 * r - 1));
}

double hs_predicted_count(const std::string& group, double X) {
  if (!(X > 0)) throw std::invalid_argument("hs_predicted_count: X must be positive");
  if (group == "trivial") return 4.0 / SpecialConstants::zeta10 * std::pow(X, 5.0 / 6.0);
  if (group == "Z/2") return kHarronSnowdenC2 * std::sqrt(X);
  if (group == "Z/3") return kHarronSnowdenC3 * std::cbrt(X);
  throw std::invalid_argument("hs_predicted_count: no asymptotic constant for " + group);
}

int theoretical_avg_selmer(int n) {
  if (n < 2 || n > 5) throw std::invalid_argument("theoretical_avg_selmer: n must lie in [2, 5]");
  int s = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d == 0) s += d;
  }
  return s;
}

std::optional<double> pearson_r(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= double(pairs.size());
  my /= double(pairs.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double rank2_growth(double X) { return std::pow(X, 19.0 / 24.0) * std::pow(std::log(X), 3.0 / 8.0); }

}  // namespace ecdb
