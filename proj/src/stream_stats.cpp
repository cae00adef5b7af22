#include "cdfband/stream_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace cdfband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// --- little-endian snapshot primitives -------------------------------------

constexpr char kMagic[4] = {'C', 'D', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindValueCounts = 1;
constexpr std::uint8_t kKindWeightedStats = 2;

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 8);
}

void put_i64(std::ostream& os, std::int64_t v) {
  put_u64(os, static_cast<std::uint64_t>(v));
}

void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

[[noreturn]] void throw_truncated() {
  throw std::runtime_error("snapshot: truncated or corrupt stream");
}

void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw_truncated();
}

std::uint8_t get_u8(std::istream& is) {
  std::uint8_t v;
  get_bytes(is, &v, 1);
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  get_bytes(is, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  get_bytes(is, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::int64_t get_i64(std::istream& is) {
  return static_cast<std::int64_t>(get_u64(is));
}

double get_f64(std::istream& is) {
  return std::bit_cast<double>(get_u64(is));
}

void put_header(std::ostream& os, std::uint8_t kind) {
  put_bytes(os, kMagic, 4);
  put_u32(os, kVersion);
  put_u8(os, kind);
}

void check_header(std::istream& is, std::uint8_t kind) {
  char magic[4];
  get_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("snapshot: bad magic");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("snapshot: unsupported version " +
                             std::to_string(version));
  }
  const std::uint8_t got = get_u8(is);
  if (got != kind) {
    throw std::runtime_error("snapshot: unexpected payload kind");
  }
}

// --- sorted-index order statistics ------------------------------------------

// cum[i] = number of samples with value <= values[i].
std::uint64_t index_count_le(const std::vector<double>& values,
                             const std::vector<std::uint64_t>& cum, double v) {
  const auto it = std::upper_bound(values.begin(), values.end(), v);
  if (it == values.begin()) return 0;
  return cum[static_cast<std::size_t>(it - values.begin()) - 1];
}

std::uint64_t index_count_lt(const std::vector<double>& values,
                             const std::vector<std::uint64_t>& cum, double v) {
  const auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.begin()) return 0;
  return cum[static_cast<std::size_t>(it - values.begin()) - 1];
}

double index_next_above(const std::vector<double>& values, double v) {
  const auto it = std::upper_bound(values.begin(), values.end(), v);
  return it == values.end() ? kInf : *it;
}

double index_prev_below(const std::vector<double>& values, double v) {
  const auto it = std::lower_bound(values.begin(), values.end(), v);
  return it == values.begin() ? -kInf : *(it - 1);
}

// --- shared bucket-bound arithmetic ------------------------------------------

void check_lambda_ystar(double lambda, double ystar) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::domain_error("sum_log_one_plus: lambda must lie in [0, 1)");
  }
  if (!(ystar >= 0.0 && ystar <= 1.0)) {
    throw std::domain_error("sum_log_one_plus: ystar must lie in [0, 1]");
  }
}

// Lower bound on the contribution of one bucket to
// sum log(1 + lambda (z - ystar)): chord values at the edges plus a curvature
// credit capped by the smallest |f''| over the bucket (attained at the upper
// edge, since |f''| decreases in z for this concave f).
double cell_bound(std::int64_t key, const BucketCell& cell, double k,
                  double lambda, double ystar) {
  if (lambda == 0.0) return 0.0;
  const double z_l = std::pow(1.0 + k, static_cast<double>(key));
  const double z_u = std::pow(1.0 + k, static_cast<double>(key + 1));
  double out = 0.0;
  if (cell.a > 0.0) out += cell.a * std::log1p(lambda * (z_l - ystar));
  if (cell.b > 0.0) out += cell.b * std::log1p(lambda * (z_u - ystar));
  if (cell.c > 0.0 && std::isfinite(z_u)) {
    const double rad = (z_u - z_l) * lambda / (1.0 + lambda * (z_u - ystar));
    out += 0.5 * cell.c * rad * rad;
  }
  return out;
}

}  // namespace

// --- ValueCounts -------------------------------------------------------------

void ValueCounts::update(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("ValueCounts::update: non-finite value");
  }
  if (x == 0.0) x = 0.0;  // collapse -0.0 onto +0.0
  ++counts_[x];
  ++total_;
  dirty_ = true;
}

void ValueCounts::refresh() const {
  if (!dirty_ && values_.size() == counts_.size()) return;
  values_.clear();
  values_.reserve(counts_.size());
  for (const auto& [v, n] : counts_) values_.push_back(v);
  std::sort(values_.begin(), values_.end());
  cum_.resize(values_.size());
  std::uint64_t run = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    run += counts_.at(values_[i]);
    cum_[i] = run;
  }
  dirty_ = false;
}

std::uint64_t ValueCounts::count_open_closed(double lo, double hi) const {
  if (!(lo < hi)) return 0;
  refresh();
  return index_count_le(values_, cum_, hi) - index_count_le(values_, cum_, lo);
}

std::uint64_t ValueCounts::count_closed_open(double lo, double hi) const {
  if (!(lo < hi)) return 0;
  refresh();
  return index_count_lt(values_, cum_, hi) - index_count_lt(values_, cum_, lo);
}

std::uint64_t ValueCounts::count_le(double v) const {
  refresh();
  return index_count_le(values_, cum_, v);
}

std::uint64_t ValueCounts::count_lt(double v) const {
  refresh();
  return index_count_lt(values_, cum_, v);
}

double ValueCounts::next_above(double v) const {
  refresh();
  return index_next_above(values_, v);
}

double ValueCounts::prev_below(double v) const {
  refresh();
  return index_prev_below(values_, v);
}

const std::vector<double>& ValueCounts::sorted_values() const {
  refresh();
  return values_;
}

void ValueCounts::serialize(std::ostream& os) const {
  refresh();
  put_header(os, kKindValueCounts);
  put_u64(os, values_.size());
  for (double v : values_) {
    put_f64(os, v);
    put_u64(os, counts_.at(v));
  }
  if (!os) throw std::runtime_error("snapshot: write failure");
}

ValueCounts ValueCounts::deserialize(std::istream& is) {
  check_header(is, kKindValueCounts);
  const std::uint64_t m = get_u64(is);
  ValueCounts out;
  for (std::uint64_t i = 0; i < m; ++i) {
    const double v = get_f64(is);
    const std::uint64_t n = get_u64(is);
    if (!std::isfinite(v) || n == 0) throw_truncated();
    out.counts_[v] += n;
    out.total_ += n;
  }
  out.dirty_ = true;
  return out;
}

// --- LogApproxBuckets ----------------------------------------------------------

LogApproxBuckets::LogApproxBuckets(double granularity) : k_(granularity) {
  if (!(k_ > 0.0) || !std::isfinite(k_)) {
    throw std::invalid_argument("LogApproxBuckets: granularity must be positive");
  }
}

double LogApproxBuckets::edge(std::int64_t n) const {
  return std::pow(1.0 + k_, static_cast<double>(n));
}

void LogApproxBuckets::add(double z) {
  if (!std::isfinite(z) || z < 0.0) {
    throw std::invalid_argument("LogApproxBuckets::add: need finite z >= 0");
  }
  if (z == 0.0) {
    ++zero_count_;
    return;
  }
  auto n = static_cast<std::int64_t>(
      std::floor(std::log(z) / std::log1p(k_)));
  while (edge(n) > z) --n;
  while (edge(n + 1) <= z) ++n;
  const double z_l = edge(n);
  const double z_u = edge(n + 1);
  double alpha = 1.0;
  const double width = z_u - z_l;
  if (std::isfinite(z_u) && width > 0.0) {
    alpha = (z_u - z) / width;
    if (!(alpha > 0.0)) alpha = std::numeric_limits<double>::min();
    if (alpha > 1.0) alpha = 1.0;
  }
  BucketCell& cell = cells_[n];
  cell.a += alpha;
  cell.b += 1.0 - alpha;
  cell.c += alpha * (1.0 - alpha);
}

void LogApproxBuckets::merge(const LogApproxBuckets& other) {
  if (k_ != other.k_) {
    throw std::invalid_argument("LogApproxBuckets::merge: granularity mismatch");
  }
  zero_count_ += other.zero_count_;
  for (const auto& [n, cell] : other.cells_) {
    BucketCell& mine = cells_[n];
    mine.a += cell.a;
    mine.b += cell.b;
    mine.c += cell.c;
  }
}

double LogApproxBuckets::sum_log_one_plus(double lambda, double ystar) const {
  check_lambda_ystar(lambda, ystar);
  double out = static_cast<double>(zero_count_) * std::log1p(-lambda * ystar);
  for (const auto& [n, cell] : cells_) {
    out += cell_bound(n, cell, k_, lambda, ystar);
  }
  return out;
}

void LogApproxBuckets::restore_cell(std::int64_t key, const BucketCell& cell) {
  cells_[key] = cell;
}

// --- WeightedStreamStats --------------------------------------------------------

WeightedStreamStats::WeightedStreamStats(double granularity)
    : granularity_(granularity) {
  if (!(granularity_ > 0.0) || !std::isfinite(granularity_)) {
    throw std::invalid_argument(
        "WeightedStreamStats: granularity must be positive");
  }
}

void WeightedStreamStats::update(double w, double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("WeightedStreamStats::update: non-finite value");
  }
  if (!std::isfinite(w) || w < 0.0) {
    throw std::invalid_argument(
        "WeightedStreamStats::update: weight must be finite and >= 0");
  }
  if (x == 0.0) x = 0.0;
  if (w == 0.0) w = 0.0;
  auto [it, inserted] = cells_.try_emplace(x, granularity_);
  Cell& cell = it->second;
  ++cell.count;
  cell.sum_w += w;
  cell.sum_w_sq += w * w;
  cell.buckets.add(w);
  ++total_;
  sum_w_ += w;
  sum_w_sq_ += w * w;
  dirty_ = true;
}

void WeightedStreamStats::refresh() const {
  if (!dirty_ && values_.size() == cells_.size()) return;
  values_.clear();
  values_.reserve(cells_.size());
  for (const auto& [v, cell] : cells_) values_.push_back(v);
  std::sort(values_.begin(), values_.end());
  cum_counts_.resize(values_.size());
  std::uint64_t run = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    run += cells_.at(values_[i]).count;
    cum_counts_[i] = run;
  }
  dirty_ = false;
}

std::uint64_t WeightedStreamStats::count_open_closed(double lo,
                                                     double hi) const {
  if (!(lo < hi)) return 0;
  refresh();
  return index_count_le(values_, cum_counts_, hi) -
         index_count_le(values_, cum_counts_, lo);
}

std::uint64_t WeightedStreamStats::count_closed_open(double lo,
                                                     double hi) const {
  if (!(lo < hi)) return 0;
  refresh();
  return index_count_lt(values_, cum_counts_, hi) -
         index_count_lt(values_, cum_counts_, lo);
}

std::uint64_t WeightedStreamStats::count_le(double v) const {
  refresh();
  return index_count_le(values_, cum_counts_, v);
}

double WeightedStreamStats::next_above(double v) const {
  refresh();
  return index_next_above(values_, v);
}

double WeightedStreamStats::prev_below(double v) const {
  refresh();
  return index_prev_below(values_, v);
}

const std::vector<double>& WeightedStreamStats::sorted_values() const {
  refresh();
  return values_;
}

FrozenTailStats WeightedStreamStats::freeze() const {
  refresh();
  FrozenTailStats out;
  out.t_ = total_;
  out.sum_w_ = sum_w_;
  out.sum_w_sq_ = sum_w_sq_;
  out.granularity_ = granularity_;
  out.values_ = values_;
  out.cum_counts_ = cum_counts_;

  const std::size_t m = values_.size();

  std::set<std::int64_t> key_union;
  for (const auto& [v, cell] : cells_) {
    for (const auto& [n, bucket] : cell.buckets.cells()) key_union.insert(n);
  }
  out.keys_.assign(key_union.begin(), key_union.end());
  const std::size_t kk = out.keys_.size();

  out.head_count_.assign(m + 1, 0);
  out.tail_count_.assign(m + 1, 0);
  out.head_zero_w_.assign(m + 1, 0);
  out.tail_zero_w_.assign(m + 1, 0);
  out.head_sum_.assign(m + 1, 0.0);
  out.tail_sum_.assign(m + 1, 0.0);
  out.head_sum_sq_.assign(m + 1, 0.0);
  out.tail_sum_sq_.assign(m + 1, 0.0);
  out.head_rows_.assign((m + 1) * kk, BucketCell{});
  out.tail_rows_.assign((m + 1) * kk, BucketCell{});

  auto key_index = [&](std::int64_t n) {
    return static_cast<std::size_t>(
        std::lower_bound(out.keys_.begin(), out.keys_.end(), n) -
        out.keys_.begin());
  };

  // Head accumulation: cut i summarizes values_[0..i).
  for (std::size_t i = 1; i <= m; ++i) {
    const Cell& cell = cells_.at(values_[i - 1]);
    out.head_count_[i] = out.head_count_[i - 1] + cell.count;
    out.head_zero_w_[i] =
        out.head_zero_w_[i - 1] + cell.buckets.zero_count();
    out.head_sum_[i] = out.head_sum_[i - 1] + cell.sum_w;
    out.head_sum_sq_[i] = out.head_sum_sq_[i - 1] + cell.sum_w_sq;
    BucketCell* prev = out.head_rows_.data() + (i - 1) * kk;
    BucketCell* cur = out.head_rows_.data() + i * kk;
    for (std::size_t j = 0; j < kk; ++j) cur[j] = prev[j];
    for (const auto& [n, bucket] : cell.buckets.cells()) {
      BucketCell& dst = cur[key_index(n)];
      dst.a += bucket.a;
      dst.b += bucket.b;
      dst.c += bucket.c;
    }
  }

  // Tail accumulation: cut i summarizes values_[i..m).
  for (std::size_t i = m; i-- > 0;) {
    const Cell& cell = cells_.at(values_[i]);
    out.tail_count_[i] = out.tail_count_[i + 1] + cell.count;
    out.tail_zero_w_[i] =
        out.tail_zero_w_[i + 1] + cell.buckets.zero_count();
    out.tail_sum_[i] = out.tail_sum_[i + 1] + cell.sum_w;
    out.tail_sum_sq_[i] = out.tail_sum_sq_[i + 1] + cell.sum_w_sq;
    const BucketCell* prev = out.tail_rows_.data() + (i + 1) * kk;
    BucketCell* cur = out.tail_rows_.data() + i * kk;
    for (std::size_t j = 0; j < kk; ++j) cur[j] = prev[j];
    for (const auto& [n, bucket] : cell.buckets.cells()) {
      BucketCell& dst = cur[key_index(n)];
      dst.a += bucket.a;
      dst.b += bucket.b;
      dst.c += bucket.c;
    }
  }

  return out;
}

void WeightedStreamStats::serialize(std::ostream& os) const {
  refresh();
  put_header(os, kKindWeightedStats);
  put_f64(os, granularity_);
  put_u64(os, total_);
  put_f64(os, sum_w_);
  put_f64(os, sum_w_sq_);
  put_u64(os, values_.size());
  for (double v : values_) {
    const Cell& cell = cells_.at(v);
    put_f64(os, v);
    put_u64(os, cell.count);
    put_f64(os, cell.sum_w);
    put_f64(os, cell.sum_w_sq);
    put_u64(os, cell.buckets.zero_count());
    put_u64(os, cell.buckets.cells().size());
    for (const auto& [n, bucket] : cell.buckets.cells()) {
      put_i64(os, n);
      put_f64(os, bucket.a);
      put_f64(os, bucket.b);
      put_f64(os, bucket.c);
    }
  }
  if (!os) throw std::runtime_error("snapshot: write failure");
}

WeightedStreamStats WeightedStreamStats::deserialize(std::istream& is) {
  check_header(is, kKindWeightedStats);
  const double granularity = get_f64(is);
  if (!(granularity > 0.0) || !std::isfinite(granularity)) throw_truncated();
  WeightedStreamStats out(granularity);
  out.total_ = get_u64(is);
  out.sum_w_ = get_f64(is);
  out.sum_w_sq_ = get_f64(is);
  const std::uint64_t m = get_u64(is);
  for (std::uint64_t i = 0; i < m; ++i) {
    const double v = get_f64(is);
    if (!std::isfinite(v)) throw_truncated();
    auto [it, inserted] = out.cells_.try_emplace(v, granularity);
    if (!inserted) throw_truncated();
    Cell& cell = it->second;
    cell.count = get_u64(is);
    cell.sum_w = get_f64(is);
    cell.sum_w_sq = get_f64(is);
    cell.buckets.restore_zero_count(get_u64(is));
    const std::uint64_t nb = get_u64(is);
    for (std::uint64_t bidx = 0; bidx < nb; ++bidx) {
      const std::int64_t key = get_i64(is);
      BucketCell restored;
      restored.a = get_f64(is);
      restored.b = get_f64(is);
      restored.c = get_f64(is);
      cell.buckets.restore_cell(key, restored);
    }
  }
  out.dirty_ = true;
  return out;
}

// --- FrozenTailStats ---------------------------------------------------------

double FrozenTailStats::SideView::sum_log_one_plus(double lambda,
                                                   double ystar) const {
  check_lambda_ystar(lambda, ystar);
  double out = static_cast<double>(zero_y_count) * std::log1p(-lambda * ystar);
  for (std::size_t j = 0; j < keys.size(); ++j) {
    out += cell_bound(keys[j], cells[j], granularity, lambda, ystar);
  }
  return out;
}

FrozenTailStats::SideView FrozenTailStats::view_at(std::size_t cut,
                                                   bool head) const {
  SideView view;
  view.t = t_;
  view.granularity = granularity_;
  const std::size_t kk = keys_.size();
  if (head) {
    view.side_count = head_count_[cut];
    view.sum_y = head_sum_[cut];
    view.sum_y_sq = head_sum_sq_[cut];
    view.zero_y_count = (t_ - view.side_count) + head_zero_w_[cut];
    view.cells = std::span<const BucketCell>(head_rows_.data() + cut * kk, kk);
  } else {
    view.side_count = tail_count_[cut];
    view.sum_y = tail_sum_[cut];
    view.sum_y_sq = tail_sum_sq_[cut];
    view.zero_y_count = (t_ - view.side_count) + tail_zero_w_[cut];
    view.cells = std::span<const BucketCell>(tail_rows_.data() + cut * kk, kk);
  }
  view.keys = std::span<const std::int64_t>(keys_.data(), kk);
  return view;
}

FrozenTailStats::SideView FrozenTailStats::head_leq(double rho) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), rho);
  return view_at(static_cast<std::size_t>(it - values_.begin()), true);
}

FrozenTailStats::SideView FrozenTailStats::tail_gt(double rho) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), rho);
  return view_at(static_cast<std::size_t>(it - values_.begin()), false);
}

FrozenTailStats::SideView FrozenTailStats::tail_geq(double v) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), v);
  return view_at(static_cast<std::size_t>(it - values_.begin()), false);
}

std::uint64_t FrozenTailStats::count_open_closed(double lo, double hi) const {
  if (!(lo < hi)) return 0;
  return index_count_le(values_, cum_counts_, hi) -
         index_count_le(values_, cum_counts_, lo);
}

std::uint64_t FrozenTailStats::count_closed_open(double lo, double hi) const {
  if (!(lo < hi)) return 0;
  return index_count_lt(values_, cum_counts_, hi) -
         index_count_lt(values_, cum_counts_, lo);
}

double FrozenTailStats::next_above(double v) const {
  return index_next_above(values_, v);
}

double FrozenTailStats::prev_below(double v) const {
  return index_prev_below(values_, v);
}

}  // namespace cdfband
