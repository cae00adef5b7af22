#pragma once

// Streaming sufficient statistics for the band oracles: an exact value->count
// index for unweighted presence queries, geometric log-approximation buckets
// for weighted log-wealth terms, per-value weighted accumulators with O(1)
// amortized ingestion, and an O(t log t) freeze into cumulative head/tail form.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

namespace cdfband {

// Exact multiset of observed values with order-statistic queries.  Ingestion
// is O(1) amortized (hash insert); the sorted index is rebuilt lazily on the
// first query after a mutation.
class ValueCounts {
 public:
  void update(double x);  // throws std::invalid_argument on non-finite x

  std::uint64_t total() const { return total_; }

  // Exact count of samples in (lo, hi].
  std::uint64_t count_open_closed(double lo, double hi) const;
  // Exact count of samples in [lo, hi).
  std::uint64_t count_closed_open(double lo, double hi) const;
  std::uint64_t count_le(double v) const;
  std::uint64_t count_lt(double v) const;

  // Smallest observed value > v (+inf when none), largest < v (-inf when none).
  double next_above(double v) const;
  double prev_below(double v) const;

  // Distinct observed values in increasing order.
  const std::vector<double>& sorted_values() const;

  void serialize(std::ostream& os) const;
  static ValueCounts deserialize(std::istream& is);

 private:
  void refresh() const;

  std::unordered_map<double, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  mutable bool dirty_ = false;
  mutable std::vector<double> values_;      // sorted distinct values
  mutable std::vector<std::uint64_t> cum_;  // cum_[i] = count of values <= values_[i]
};

struct BucketCell {
  double a = 0.0;  // sum of interpolation weights alpha
  double b = 0.0;  // sum of (1 - alpha)
  double c = 0.0;  // sum of alpha * (1 - alpha)
};

// Geometric buckets with edges (1+k)^n.  Each positive value z contributes
// interpolation mass alpha to its lower edge and 1-alpha to its upper edge;
// the c accumulator carries the curvature credit used to tighten concave
// per-point bounds.  Zeros are tracked by count only.
class LogApproxBuckets {
 public:
  explicit LogApproxBuckets(double granularity = 0.25);

  void add(double z);  // z >= 0 finite; throws std::invalid_argument otherwise
  void merge(const LogApproxBuckets& other);  // requires equal granularity

  double granularity() const { return k_; }
  std::uint64_t zero_count() const { return zero_count_; }
  const std::map<std::int64_t, BucketCell>& cells() const { return cells_; }

  double edge(std::int64_t n) const;  // (1+k)^n

  // Lower bound on sum over all ingested z (zeros included) of
  // log(1 + lambda * (z - ystar)), for lambda in [0, 1) and ystar in [0, 1]:
  // chord interpolation plus a curvature credit that provably never exceeds
  // the true concave gap.
  double sum_log_one_plus(double lambda, double ystar) const;

  // Snapshot restore: overwrite one cell / the zero count wholesale.
  void restore_cell(std::int64_t key, const BucketCell& cell);
  void restore_zero_count(std::uint64_t n) { zero_count_ = n; }

 private:
  double k_;
  std::uint64_t zero_count_ = 0;
  std::map<std::int64_t, BucketCell> cells_;
};

class FrozenTailStats;

// Per-value weighted accumulators: O(1) amortized per (w, x) observation.
class WeightedStreamStats {
 public:
  explicit WeightedStreamStats(double granularity = 0.25);

  // Ingests one observation; throws std::invalid_argument on negative or
  // non-finite inputs.
  void update(double w, double x);

  std::uint64_t total() const { return total_; }
  double total_weight() const { return sum_w_; }
  double total_weight_sq() const { return sum_w_sq_; }
  double granularity() const { return granularity_; }

  // Sample-presence queries (weights ignored), same semantics as ValueCounts.
  std::uint64_t count_open_closed(double lo, double hi) const;
  std::uint64_t count_closed_open(double lo, double hi) const;
  std::uint64_t count_le(double v) const;
  double next_above(double v) const;
  double prev_below(double v) const;
  const std::vector<double>& sorted_values() const;

  FrozenTailStats freeze() const;

  void serialize(std::ostream& os) const;
  static WeightedStreamStats deserialize(std::istream& is);

 private:
  struct Cell {
    std::uint64_t count = 0;
    double sum_w = 0.0;
    double sum_w_sq = 0.0;
    LogApproxBuckets buckets;

    explicit Cell(double granularity) : buckets(granularity) {}
  };

  void refresh() const;

  double granularity_;
  std::unordered_map<double, Cell> cells_;
  std::uint64_t total_ = 0;
  double sum_w_ = 0.0;
  double sum_w_sq_ = 0.0;
  mutable bool dirty_ = false;
  mutable std::vector<double> values_;
  mutable std::vector<std::uint64_t> cum_counts_;
};

// Immutable cumulative form of a weighted stream: for every cut position in
// the sorted distinct values, the exact statistics of the head process
// Y_s = W_s 1{X_s <= cut} and the tail process Y_s = W_s 1{X_s > cut} (or
// >= at a grid value), with bucket rows built by one-directional accumulation
// so no cancellation occurs.
class FrozenTailStats {
 public:
  // A one-sided view: the statistics of Y_s = W_s * I_s where I_s selects the
  // side.  zero_y_count counts every s with Y_s = 0 (out-of-side samples plus
  // in-side zero weights).
  struct SideView {
    std::uint64_t t = 0;
    std::uint64_t side_count = 0;
    std::uint64_t zero_y_count = 0;
    double sum_y = 0.0;
    double sum_y_sq = 0.0;
    double granularity = 0.25;
    std::span<const std::int64_t> keys;
    std::span<const BucketCell> cells;

    // Lower bound on sum_{s<=t} log(1 + lambda * (Y_s - ystar)).
    double sum_log_one_plus(double lambda, double ystar) const;
  };

  std::uint64_t time() const { return t_; }
  double total_weight() const { return sum_w_; }
  double total_weight_sq() const { return sum_w_sq_; }
  const std::vector<double>& values() const { return values_; }

  SideView head_leq(double rho) const;  // Y = W * 1{X <= rho}
  SideView tail_gt(double rho) const;   // Y = W * 1{X >  rho}
  SideView tail_geq(double v) const;    // Y = W * 1{X >= v}

  // Sample-presence helpers on the frozen snapshot.
  std::uint64_t count_open_closed(double lo, double hi) const;
  std::uint64_t count_closed_open(double lo, double hi) const;
  double next_above(double v) const;
  double prev_below(double v) const;

 private:
  friend class WeightedStreamStats;

  SideView view_at(std::size_t cut, bool head) const;

  std::uint64_t t_ = 0;
  double sum_w_ = 0.0;
  double sum_w_sq_ = 0.0;
  double granularity_ = 0.25;
  std::vector<double> values_;             // sorted distinct values, size m
  std::vector<std::uint64_t> cum_counts_;  // prefix sample counts, size m
  std::vector<std::int64_t> keys_;         // union of bucket keys, size K

  // Cut arrays, size m+1: index i summarizes values_[0..i) (head) and
  // values_[i..m) (tail).
  std::vector<std::uint64_t> head_count_, tail_count_;
  std::vector<std::uint64_t> head_zero_w_, tail_zero_w_;
  std::vector<double> head_sum_, tail_sum_;
  std::vector<double> head_sum_sq_, tail_sum_sq_;
  std::vector<BucketCell> head_rows_, tail_rows_;  // (m+1) x K, row-major
};

}  // namespace cdfband
