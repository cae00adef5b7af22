#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cdfband/stream_stats.hpp"
#include "test_util.hpp"

using namespace cdfband;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RawPoint {
  double w;
  double x;
};

// Exact sum of log(1 + lambda (Y - ystar)) over the full stream, where
// Y = w * indicator(side).
template <typename Pred>
double exact_log_sum(const std::vector<RawPoint>& pts, double lambda,
                     double ystar, Pred&& in_side) {
  double out = 0.0;
  for (const auto& p : pts) {
    const double y = in_side(p.x) ? p.w : 0.0;
    out += std::log1p(lambda * (y - ystar));
  }
  return out;
}

std::vector<RawPoint> random_weighted_stream(testutil::Rng& rng, int n) {
  std::vector<RawPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Cluster x on a coarse grid so duplicates occur.
    const double x = std::floor(rng.uniform(-8.0, 8.0) * 4.0) / 4.0;
    double w;
    const double kind = rng.uniform();
    if (kind < 0.15) {
      w = 0.0;
    } else if (kind < 0.55) {
      w = rng.uniform(0.0, 2.5);
    } else if (kind < 0.9) {
      w = std::exp(rng.uniform(-3.0, 3.0));
    } else {
      w = std::pow(1.25, static_cast<double>(rng.uniform_int(13)) - 6.0);
    }
    pts.push_back({w, x});
  }
  return pts;
}

}  // namespace

TEST_CASE("value counts boundary semantics") {
  ValueCounts vc;
  CHECK(vc.total() == 0);
  CHECK(vc.count_open_closed(-1.0, 1.0) == 0);

  vc.update(0.25);
  vc.update(0.25);
  vc.update(0.5);
  CHECK(vc.total() == 3);
  CHECK(vc.count_open_closed(0.25, 0.5) == 1);
  CHECK(vc.count_closed_open(0.25, 0.5) == 2);
  CHECK(vc.count_open_closed(0.2, 0.25) == 2);
  CHECK(vc.count_le(0.25) == 2);
  CHECK(vc.count_lt(0.25) == 0);
  CHECK(vc.count_open_closed(0.5, 0.5) == 0);
  CHECK(vc.sorted_values() == std::vector<double>{0.25, 0.5});

  CHECK(vc.next_above(0.25) == 0.5);
  CHECK(vc.next_above(0.5) == kInf);
  CHECK(vc.prev_below(0.5) == 0.25);
  CHECK(vc.prev_below(0.25) == -kInf);

  CHECK_THROWS_AS(vc.update(std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
  CHECK_THROWS_AS(vc.update(kInf), std::invalid_argument);
  CHECK(vc.total() == 3);

  vc.update(-0.0);
  vc.update(0.0);
  CHECK(vc.count_le(0.0) == 2);
  CHECK(vc.sorted_values().size() == 3);
}

TEST_CASE("value counts match a linear scan") {
  testutil::Rng rng(404);
  ValueCounts vc;
  std::vector<double> raw;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::floor(rng.uniform(-5.0, 5.0) * 8.0) / 8.0;
    raw.push_back(x);
    vc.update(x);
  }
  CHECK(vc.total() == raw.size());

  for (int q = 0; q < 100; ++q) {
    double lo = rng.uniform(-6.0, 6.0);
    double hi = rng.uniform(-6.0, 6.0);
    if (lo > hi) std::swap(lo, hi);
    std::uint64_t oc = 0;
    std::uint64_t co = 0;
    std::uint64_t le = 0;
    double above = kInf;
    double below = -kInf;
    for (double x : raw) {
      if (x > lo && x <= hi) ++oc;
      if (x >= lo && x < hi) ++co;
      if (x <= hi) ++le;
      if (x > hi && x < above) above = x;
      if (x < hi && x > below) below = x;
    }
    CHECK(vc.count_open_closed(lo, hi) == oc);
    CHECK(vc.count_closed_open(lo, hi) == co);
    CHECK(vc.count_le(hi) == le);
    CHECK(vc.next_above(hi) == above);
    CHECK(vc.prev_below(hi) == below);
  }
}

TEST_CASE("value counts snapshot round trip") {
  testutil::Rng rng(7);
  ValueCounts vc;
  for (int i = 0; i < 200; ++i) vc.update(std::floor(rng.uniform(0.0, 40.0)) / 4.0);

  std::ostringstream out;
  vc.serialize(out);
  const std::string bytes = out.str();

  std::istringstream in(bytes);
  ValueCounts back = ValueCounts::deserialize(in);
  CHECK(back.total() == vc.total());
  CHECK(back.sorted_values() == vc.sorted_values());
  for (int q = 0; q < 20; ++q) {
    const double lo = rng.uniform(-1.0, 11.0);
    const double hi = lo + rng.uniform(0.0, 3.0);
    CHECK(back.count_open_closed(lo, hi) == vc.count_open_closed(lo, hi));
  }

  std::ostringstream out2;
  back.serialize(out2);
  CHECK(out2.str() == bytes);  // byte-stable representation

  // Corruption: bad magic, wrong version, truncation.
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream s(bad);
    CHECK_THROWS_AS(ValueCounts::deserialize(s), std::runtime_error);
  }
  {
    std::string bad = bytes;
    bad[4] = 9;  // version field
    std::istringstream s(bad);
    CHECK_THROWS_AS(ValueCounts::deserialize(s), std::runtime_error);
  }
  for (std::size_t cut : {bytes.size() - 3, bytes.size() / 2, std::size_t{2}}) {
    std::istringstream s(bytes.substr(0, cut));
    CHECK_THROWS_AS(ValueCounts::deserialize(s), std::runtime_error);
  }
}

TEST_CASE("log-approx bucket interpolation") {
  LogApproxBuckets lb(0.25);
  lb.add(1.0);
  REQUIRE(lb.cells().size() == 1);
  {
    const auto& cell = lb.cells().at(0);
    CHECK(cell.a == 1.0);
    CHECK(cell.b == 0.0);
    CHECK(cell.c == 0.0);
  }

  LogApproxBuckets lb2(0.25);
  lb2.add(1.1);
  {
    const auto& cell = lb2.cells().at(0);
    CHECK(std::fabs(cell.a - 0.6) < 1e-12);
    CHECK(std::fabs(cell.b - 0.4) < 1e-12);
    CHECK(std::fabs(cell.c - 0.24) < 1e-12);
  }

  LogApproxBuckets lbz(0.25);
  lbz.add(0.0);
  CHECK(lbz.zero_count() == 1);
  CHECK(lbz.cells().empty());

  CHECK_THROWS_AS(lb.add(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(lb.add(kInf), std::invalid_argument);
  CHECK_THROWS_AS(LogApproxBuckets(0.0), std::invalid_argument);
  CHECK_THROWS_AS(LogApproxBuckets(-1.0), std::invalid_argument);

  // Values sitting exactly on an edge carry full mass at that edge.
  for (int n = -5; n <= 5; ++n) {
    LogApproxBuckets le(0.25);
    le.add(std::pow(1.25, n));
    const auto& cell = le.cells().at(n);
    CHECK(cell.a == 1.0);
    CHECK(cell.b == 0.0);
  }

  // Mass accounting: a + b + zeros reconstructs the ingestion count.
  testutil::Rng rng(5);
  LogApproxBuckets big(0.25);
  int zeros = 0;
  for (int i = 0; i < 500; ++i) {
    if (rng.uniform() < 0.1) {
      big.add(0.0);
      ++zeros;
    } else {
      big.add(std::exp(rng.uniform(-6.0, 6.0)));
    }
  }
  double mass = static_cast<double>(big.zero_count());
  for (const auto& [n, cell] : big.cells()) mass += cell.a + cell.b;
  CHECK(std::fabs(mass - 500.0) < 1e-9);
  CHECK(big.zero_count() == static_cast<std::uint64_t>(zeros));
}

TEST_CASE("bucketed log sum never overshoots the exact sum") {
  testutil::Rng rng(606);
  const std::vector<double> lambdas = {0.0, 1e-6, 0.05, 0.25, 0.5, 0.9, 0.999};
  const std::vector<double> ystars = {0.0, 0.3, 0.77, 1.0};
  for (int rep = 0; rep < 60; ++rep) {
    LogApproxBuckets lb(0.25);
    std::vector<double> ws;
    const int n = 1 + static_cast<int>(rng.uniform_int(60));
    for (int i = 0; i < n; ++i) {
      double w;
      const double kind = rng.uniform();
      if (kind < 0.1) {
        w = 0.0;
      } else if (kind < 0.2) {
        w = std::pow(1.25, static_cast<double>(rng.uniform_int(9)) - 4.0);
      } else if (kind < 0.95) {
        w = std::exp(rng.uniform(-7.0, 7.0));
      } else {
        w = 1e250;  // extreme magnitudes must stay sound, not accurate
      }
      ws.push_back(w);
      lb.add(w);
    }
    for (double lam : lambdas) {
      for (double ys : ystars) {
        double exact = 0.0;
        for (double w : ws) exact += std::log1p(lam * (w - ys));
        const double bound = lb.sum_log_one_plus(lam, ys);
        CHECK(bound <= exact + 1e-9 * (1.0 + std::fabs(exact)));
        if (lam == 0.0) CHECK(bound == 0.0);

        // The curvature credit only ever tightens the plain chord bound.
        double chord = static_cast<double>(lb.zero_count()) *
                       std::log1p(-lam * ys);
        for (const auto& [key, cell] : lb.cells()) {
          const double zl = lb.edge(key);
          const double zu = lb.edge(key + 1);
          if (cell.a > 0.0) chord += cell.a * std::log1p(lam * (zl - ys));
          if (cell.b > 0.0) chord += cell.b * std::log1p(lam * (zu - ys));
        }
        CHECK(bound >= chord - 1e-12 * (1.0 + std::fabs(chord)));
      }
    }
  }

  LogApproxBuckets lb(0.25);
  lb.add(2.0);
  CHECK_THROWS_AS(lb.sum_log_one_plus(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(lb.sum_log_one_plus(-0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS(lb.sum_log_one_plus(0.5, 1.5), std::domain_error);
}

TEST_CASE("bucket merge equals one-shot construction") {
  testutil::Rng rng(33);
  std::vector<double> ws;
  for (int i = 0; i < 300; ++i) {
    ws.push_back(rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-5.0, 5.0)));
  }
  LogApproxBuckets whole(0.25);
  for (double w : ws) whole.add(w);

  LogApproxBuckets a(0.25);
  LogApproxBuckets b(0.25);
  LogApproxBuckets c(0.25);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add(ws[i]);
  }
  LogApproxBuckets merged = a;
  merged.merge(b);
  merged.merge(c);

  CHECK(merged.zero_count() == whole.zero_count());
  REQUIRE(merged.cells().size() == whole.cells().size());
  for (const auto& [key, cell] : whole.cells()) {
    const auto& got = merged.cells().at(key);
    CHECK(std::fabs(got.a - cell.a) < 1e-12 * (1.0 + cell.a));
    CHECK(std::fabs(got.b - cell.b) < 1e-12 * (1.0 + cell.b));
    CHECK(std::fabs(got.c - cell.c) < 1e-12 * (1.0 + cell.c));
  }

  LogApproxBuckets other_k(0.5);
  CHECK_THROWS_AS(merged.merge(other_k), std::invalid_argument);
}

TEST_CASE("weighted stats freeze matches brute force") {
  // Single point.
  {
    WeightedStreamStats ws;
    ws.update(2.0, 0.5);
    FrozenTailStats fz = ws.freeze();
    CHECK(fz.time() == 1);
    CHECK(fz.tail_geq(0.5).sum_y == 2.0);
    CHECK(fz.tail_geq(0.6).sum_y == 0.0);
    CHECK(fz.tail_gt(0.5).sum_y == 0.0);
    CHECK(fz.head_leq(0.5).sum_y == 2.0);
    CHECK(fz.head_leq(0.49).sum_y == 0.0);
    CHECK(fz.head_leq(0.5).sum_y_sq == 4.0);
  }

  // Zero-weight point: counts as a present sample whose Y is zero.
  {
    WeightedStreamStats ws;
    ws.update(0.0, 0.3);
    FrozenTailStats fz = ws.freeze();
    const auto head = fz.head_leq(0.3);
    CHECK(head.side_count == 1);
    CHECK(head.sum_y == 0.0);
    CHECK(head.zero_y_count == 1);
    const auto tail = fz.tail_gt(0.3);
    CHECK(tail.side_count == 0);
    CHECK(tail.zero_y_count == 1);
    CHECK(fz.count_open_closed(0.0, 0.3) == 1);
  }

  testutil::Rng rng(2222);
  for (int rep = 0; rep < 12; ++rep) {
    const auto pts = random_weighted_stream(rng, 200);
    WeightedStreamStats ws;
    for (const auto& p : pts) ws.update(p.w, p.x);
    FrozenTailStats fz = ws.freeze();
    CHECK(fz.time() == pts.size());

    std::vector<double> probes = fz.values();
    for (std::size_t i = 0; i + 1 < fz.values().size(); ++i) {
      probes.push_back(0.5 * (fz.values()[i] + fz.values()[i + 1]));
    }
    probes.push_back(fz.values().front() - 1.0);
    probes.push_back(fz.values().back() + 1.0);

    for (double v : probes) {
      double head_sum = 0.0, head_sq = 0.0, tail_sum = 0.0, tail_sq = 0.0;
      double geq_sum = 0.0;
      std::uint64_t head_n = 0, tail_n = 0, head_zero_y = 0, tail_zero_y = 0;
      for (const auto& p : pts) {
        if (p.x <= v) {
          ++head_n;
          head_sum += p.w;
          head_sq += p.w * p.w;
          if (p.w == 0.0) ++head_zero_y;
        } else {
          ++tail_n;
          tail_sum += p.w;
          tail_sq += p.w * p.w;
          if (p.w == 0.0) ++tail_zero_y;
        }
        if (p.x >= v) geq_sum += p.w;
      }
      const auto head = fz.head_leq(v);
      const auto tail = fz.tail_gt(v);
      CHECK(head.side_count == head_n);
      CHECK(tail.side_count == tail_n);
      CHECK(std::fabs(head.sum_y - head_sum) < 1e-9 * (1.0 + head_sum));
      CHECK(std::fabs(head.sum_y_sq - head_sq) < 1e-9 * (1.0 + head_sq));
      CHECK(std::fabs(tail.sum_y - tail_sum) < 1e-9 * (1.0 + tail_sum));
      CHECK(std::fabs(tail.sum_y_sq - tail_sq) < 1e-9 * (1.0 + tail_sq));
      CHECK(head.zero_y_count == (pts.size() - head_n) + head_zero_y);
      CHECK(tail.zero_y_count == (pts.size() - tail_n) + tail_zero_y);
      CHECK(std::fabs(fz.tail_geq(v).sum_y - geq_sum) < 1e-9 * (1.0 + geq_sum));
    }
  }
}

TEST_CASE("frozen bucket rows equal from-scratch construction") {
  testutil::Rng rng(318);
  const auto pts = random_weighted_stream(rng, 150);
  WeightedStreamStats ws;
  for (const auto& p : pts) ws.update(p.w, p.x);
  FrozenTailStats fz = ws.freeze();

  std::vector<double> cuts = fz.values();
  cuts.push_back(fz.values().front() - 0.5);
  cuts.push_back(fz.values().back() + 0.5);
  for (double v : cuts) {
    // From-scratch tail buckets over {w_s : x_s > v, w_s > 0} plus zeros.
    LogApproxBuckets scratch(0.25);
    std::uint64_t out_of_side = 0;
    for (const auto& p : pts) {
      if (p.x > v) {
        scratch.add(p.w);
      } else {
        ++out_of_side;
      }
    }
    const auto tail = fz.tail_gt(v);
    // Every scratch cell must match the frozen row field-by-field.
    std::size_t nonzero_cells = 0;
    for (std::size_t j = 0; j < tail.keys.size(); ++j) {
      const auto& got = tail.cells[j];
      const auto it = scratch.cells().find(tail.keys[j]);
      if (it == scratch.cells().end()) {
        CHECK(got.a == 0.0);
        CHECK(got.b == 0.0);
        CHECK(got.c == 0.0);
        continue;
      }
      ++nonzero_cells;
      CHECK(std::fabs(got.a - it->second.a) < 1e-12 * (1.0 + it->second.a));
      CHECK(std::fabs(got.b - it->second.b) < 1e-12 * (1.0 + it->second.b));
      CHECK(std::fabs(got.c - it->second.c) < 1e-12 * (1.0 + it->second.c));
    }
    CHECK(nonzero_cells == scratch.cells().size());
    CHECK(tail.zero_y_count == out_of_side + scratch.zero_count());

    // End-to-end soundness of the frozen view's log-sum bound.
    for (double lam : {0.1, 0.5, 0.9}) {
      for (double ysv : {0.0, 0.4, 1.0}) {
        const double exact = exact_log_sum(pts, lam, ysv,
                                           [&](double x) { return x > v; });
        CHECK(fz.tail_gt(v).sum_log_one_plus(lam, ysv) <=
              exact + 1e-9 * (1.0 + std::fabs(exact)));
      }
    }
  }
}

TEST_CASE("ingestion order does not matter") {
  testutil::Rng rng(11);
  auto pts = random_weighted_stream(rng, 120);

  WeightedStreamStats first;
  for (const auto& p : pts) first.update(p.w, p.x);
  FrozenTailStats fz1 = first.freeze();

  for (int shuffle = 0; shuffle < 3; ++shuffle) {
    for (std::size_t i = pts.size(); i > 1; --i) {
      std::swap(pts[i - 1], pts[rng.uniform_int(i)]);
    }
    WeightedStreamStats again;
    for (const auto& p : pts) again.update(p.w, p.x);
    FrozenTailStats fz2 = again.freeze();

    REQUIRE(fz2.values() == fz1.values());
    CHECK(fz2.time() == fz1.time());
    for (double v : fz1.values()) {
      const auto a = fz1.tail_geq(v);
      const auto b = fz2.tail_geq(v);
      CHECK(a.side_count == b.side_count);
      CHECK(a.zero_y_count == b.zero_y_count);
      CHECK(std::fabs(a.sum_y - b.sum_y) < 1e-12 * (1.0 + std::fabs(a.sum_y)));
      CHECK(std::fabs(a.sum_y_sq - b.sum_y_sq) <
            1e-12 * (1.0 + std::fabs(a.sum_y_sq)));
      REQUIRE(a.keys.size() == b.keys.size());
      for (std::size_t j = 0; j < a.keys.size(); ++j) {
        CHECK(a.keys[j] == b.keys[j]);
        CHECK(std::fabs(a.cells[j].a - b.cells[j].a) < 1e-12 * (1.0 + a.cells[j].a));
        CHECK(std::fabs(a.cells[j].b - b.cells[j].b) < 1e-12 * (1.0 + a.cells[j].b));
        CHECK(std::fabs(a.cells[j].c - b.cells[j].c) < 1e-12 * (1.0 + a.cells[j].c));
      }
    }
  }
}

TEST_CASE("weighted stats input validation and presence queries") {
  WeightedStreamStats ws;
  CHECK_THROWS_AS(ws.update(-1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ws.update(kInf, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ws.update(1.0, kInf), std::invalid_argument);
  CHECK_THROWS_AS(ws.update(std::numeric_limits<double>::quiet_NaN(), 0.0),
                  std::invalid_argument);
  CHECK(ws.total() == 0);
  CHECK_THROWS_AS(WeightedStreamStats(-0.25), std::invalid_argument);

  testutil::Rng rng(99);
  std::vector<double> xs;
  for (int i = 0; i < 400; ++i) {
    const double x = std::floor(rng.uniform(-4.0, 4.0) * 8.0) / 8.0;
    xs.push_back(x);
    ws.update(rng.uniform(0.0, 3.0), x);
  }
  FrozenTailStats fz = ws.freeze();
  for (int q = 0; q < 50; ++q) {
    double lo = rng.uniform(-5.0, 5.0);
    double hi = rng.uniform(-5.0, 5.0);
    if (lo > hi) std::swap(lo, hi);
    std::uint64_t oc = 0, co = 0;
    double above = kInf, below = -kInf;
    for (double x : xs) {
      if (x > lo && x <= hi) ++oc;
      if (x >= lo && x < hi) ++co;
      if (x > hi && x < above) above = x;
      if (x < hi && x > below) below = x;
    }
    CHECK(ws.count_open_closed(lo, hi) == oc);
    CHECK(ws.count_closed_open(lo, hi) == co);
    CHECK(fz.count_open_closed(lo, hi) == oc);
    CHECK(fz.count_closed_open(lo, hi) == co);
    CHECK(ws.next_above(hi) == above);
    CHECK(ws.prev_below(hi) == below);
    CHECK(fz.next_above(hi) == above);
    CHECK(fz.prev_below(hi) == below);
  }

  // Empty freeze stays well-defined.
  WeightedStreamStats empty;
  FrozenTailStats fe = empty.freeze();
  CHECK(fe.time() == 0);
  CHECK(fe.head_leq(0.0).sum_y == 0.0);
  CHECK(fe.tail_gt(0.0).zero_y_count == 0);
}

TEST_CASE("weighted stats snapshot round trip") {
  testutil::Rng rng(505);
  const auto pts = random_weighted_stream(rng, 250);
  WeightedStreamStats ws;
  for (const auto& p : pts) ws.update(p.w, p.x);

  std::ostringstream out;
  ws.serialize(out);
  const std::string bytes = out.str();

  std::istringstream in(bytes);
  WeightedStreamStats back = WeightedStreamStats::deserialize(in);
  CHECK(back.total() == ws.total());
  CHECK(back.total_weight() == ws.total_weight());
  CHECK(back.total_weight_sq() == ws.total_weight_sq());
  CHECK(back.sorted_values() == ws.sorted_values());

  std::ostringstream out2;
  back.serialize(out2);
  CHECK(out2.str() == bytes);

  // The frozen views agree field-by-field.
  FrozenTailStats fz1 = ws.freeze();
  FrozenTailStats fz2 = back.freeze();
  for (double v : fz1.values()) {
    const auto a = fz1.head_leq(v);
    const auto b = fz2.head_leq(v);
    CHECK(a.side_count == b.side_count);
    CHECK(a.sum_y == b.sum_y);
    CHECK(a.sum_y_sq == b.sum_y_sq);
    CHECK(a.zero_y_count == b.zero_y_count);
    for (double lam : {0.3, 0.7}) {
      CHECK(a.sum_log_one_plus(lam, 0.5) == b.sum_log_one_plus(lam, 0.5));
    }
  }

  // Kind confusion and truncation are rejected.
  {
    std::istringstream s(bytes);
    CHECK_THROWS_AS(ValueCounts::deserialize(s), std::runtime_error);
  }
  for (std::size_t cut :
       {bytes.size() - 5, bytes.size() / 2, std::size_t{10}}) {
    std::istringstream s(bytes.substr(0, cut));
    CHECK_THROWS_AS(WeightedStreamStats::deserialize(s), std::runtime_error);
  }
}
