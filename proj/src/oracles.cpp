#include "cdfband/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cdfband/kernels.hpp"

namespace cdfband {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_threshold(double delta) { return -std::log(delta); }

// Fixed-bracket bisection on [0,1] for a rejection predicate that is true
// below the root and false above it.  Probes are data-independent dyadics, so
// the returned certified-rejected end is exactly monotone in the predicate
// (hence in the budget delta) -- that exact monotonicity is what makes band
// early termination sound.  27 halvings reach the 1e-8 stopping width.
template <typename Reject>
double unit_bisect(Reject&& reject) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60 && hi - lo > 1e-8; ++i) {
    const double mid = 0.5 * (lo + hi);
    (reject(mid) ? lo : hi) = mid;
  }
  return lo;
}

void check_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0)
    throw std::invalid_argument("tau must be positive and finite");
}

void check_prior(double prior_b) {
  if (!std::isfinite(prior_b) || prior_b <= 0.0)
    throw std::invalid_argument("prior parameter must be positive and finite");
}

void check_counts_query(std::uint64_t total, const OracleQuery& q) {
  q.validate();
  if (total != q.t)
    throw std::invalid_argument("query t does not match the statistics total");
}

double clipped_mean(std::uint64_t t, double sum_y) {
  return t == 0 ? 0.0 : std::min(1.0, sum_y / static_cast<double>(t));
}

}  // namespace

void OracleQuery::validate() const {
  if (std::isnan(rho)) throw std::invalid_argument("query rho must not be NaN");
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("query delta must be positive");
  if (t == 0) throw std::invalid_argument("query t must be at least 1");
}

void BetGrid::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("bet grid must be nonempty");
  if (lambdas.size() != weights.size())
    throw std::invalid_argument("bet grid lambdas/weights size mismatch");
  double mass = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double l = lambdas[j];
    if (!std::isfinite(l) || l <= 0.0 || l >= 1.0)
      throw std::invalid_argument("bet grid lambdas must lie in (0,1)");
    if (j > 0 && l >= lambdas[j - 1])
      throw std::invalid_argument("bet grid lambdas must be decreasing");
    if (!std::isfinite(weights[j]) || weights[j] <= 0.0)
      throw std::invalid_argument("bet grid weights must be positive");
    mass += weights[j];
  }
  if (mass > 1.0 + 1e-12)
    throw std::invalid_argument("bet grid weights must sum to at most 1");
}

BetGrid BetGrid::geometric(std::size_t levels) {
  if (levels == 0) throw std::invalid_argument("bet grid needs at least one level");
  BetGrid grid;
  grid.lambdas.reserve(levels);
  grid.weights.reserve(levels);
  for (std::size_t j = 0; j < levels; ++j) {
    const double jj = static_cast<double>(j + 1);
    grid.lambdas.push_back(std::ldexp(1.0, -static_cast<int>(j) - 1));
    grid.weights.push_back(6.0 / (kPi * kPi * jj * jj));
  }
  return grid;
}

namespace wealth {

double bernoulli_log_wealth(std::uint64_t c, std::uint64_t t, double m,
                            double prior_b) {
  if (t == 0) throw std::invalid_argument("wealth needs t >= 1");
  if (c > t) throw std::invalid_argument("success count exceeds t");
  check_prior(prior_b);
  if (!(m > 0.0) || !(m < 1.0))
    throw std::domain_error("candidate mean must lie in (0,1)");
  const double cd = static_cast<double>(c);
  const double fd = static_cast<double>(t - c);
  const double front = -(cd * std::log(m) + fd * std::log1p(-m));
  const double numer =
      log_inc_beta(m, 1.0, prior_b * m + cd, prior_b * (1.0 - m) + fd);
  const double denom = log_inc_beta(m, 1.0, prior_b * m, prior_b * (1.0 - m));
  return front + numer - denom;
}

double bernoulli_lower_from_counts(std::uint64_t c, std::uint64_t t,
                                   double delta, double prior_b) {
  if (t == 0) throw std::invalid_argument("lower bound needs t >= 1");
  if (c > t) throw std::invalid_argument("success count exceeds t");
  check_prior(prior_b);
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  if (delta >= 1.0) return 0.0;
  if (c == 0) return 0.0;  // wealth tends to 1 near 0: nothing rejected
  const double thr = log_threshold(delta);
  // The wealth diverges as m -> 0 when c > 0 (reject) and tends to at most 1
  // as m -> 1 (never reject), so the unit bracket endpoints are correct.
  const double root = unit_bisect(
      [&](double m) { return bernoulli_log_wealth(c, t, m, prior_b) >= thr; });
  return std::min(root, static_cast<double>(c) / static_cast<double>(t));
}

double subgaussian_boundary(std::uint64_t t, double p, double tau,
                            double delta) {
  if (t == 0) throw std::invalid_argument("boundary needs t >= 1");
  check_tau(tau);
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  if (!std::isfinite(p)) throw std::invalid_argument("p must be finite");
  const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
  const double base = static_cast<double>(t) * kearns_saul(pc) + tau;
  return std::sqrt(2.0 * base *
                   std::log(0.5 / delta * std::sqrt(base / tau) + 1.0));
}

double subgaussian_upper_from_counts(std::uint64_t c, std::uint64_t t,
                                     double tau, double delta) {
  if (t == 0) throw std::invalid_argument("upper bound needs t >= 1");
  if (c > t) throw std::invalid_argument("success count exceeds t");
  check_tau(tau);
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  if (delta >= 1.0) return 1.0;
  const double td = static_cast<double>(t);
  const double qhat = static_cast<double>(c) / td;
  const auto gap = [&](double p) {
    return p - qhat - subgaussian_boundary(t, p, tau, delta) / td;
  };
  if (gap(1.0) <= 0.0) return 1.0;  // no crossing: trivial bound
  // The gap is negative at qhat and positive at 1 but may cross more than
  // once; scan downward so the bracket holds the largest crossing, then
  // bisect and return the certified-positive end (conservative).
  const int n = 512;
  double lo = qhat;
  double hi = 1.0;
  bool found = false;
  for (int i = 1; i <= n; ++i) {
    const double p =
        (i == n) ? qhat : 1.0 - (1.0 - qhat) * static_cast<double>(i) / n;
    if (gap(p) <= 0.0) {
      lo = p;
      hi = 1.0 - (1.0 - qhat) * static_cast<double>(i - 1) / n;
      found = true;
      break;
    }
  }
  if (!found) return 1.0;  // unreachable: gap(qhat) < 0 by construction
  for (int i = 0; i < 80 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) <= 0.0 ? lo : hi) = mid;
  }
  return std::min(hi, 1.0);
}

EmpBernParts empbern_parts(std::uint64_t t, double sum_y, double sum_y_sq) {
  EmpBernParts parts;
  parts.ystar = clipped_mean(t, sum_y);
  parts.ssq = sum_y_sq - 2.0 * parts.ystar * sum_y +
              static_cast<double>(t) * parts.ystar * parts.ystar;
  if (parts.ssq < 0.0) parts.ssq = 0.0;
  parts.reg = 16.0 + 4.0 * std::sqrt(2.0) * std::sqrt(8.0 + parts.ssq);
  parts.v = parts.reg + parts.ssq;
  return parts;
}

double empbern_log_wealth(std::uint64_t t, double sum_y, double sum_y_sq,
                          double tau, double m) {
  if (t == 0) throw std::invalid_argument("wealth needs t >= 1");
  check_tau(tau);
  if (!std::isfinite(m)) throw std::invalid_argument("m must be finite");
  const EmpBernParts parts = empbern_parts(t, sum_y, sum_y_sq);
  const double s = sum_y - static_cast<double>(t) * m;
  const double x = s + parts.v + tau;
  const double log_c =
      tau * std::log(tau) - tau - log_lower_inc_gamma(tau, tau);
  // For x < 0 the confluent series satisfies 1F1(1, b, x) >= e^x, so e^x is a
  // conservative stand-in that keeps the wealth monotone and continuous.
  const double tail =
      x >= 0.0 ? log_kummer_1f1_row1(parts.v + tau + 1.0, x) : x;
  return log_c - std::log(tau + parts.v) + tail;
}

double empbern_lower_from_moments(std::uint64_t t, double sum_y,
                                  double sum_y_sq, double tau, double delta) {
  if (t == 0) throw std::invalid_argument("lower bound needs t >= 1");
  check_tau(tau);
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  if (delta >= 1.0) return 0.0;
  const double thr = log_threshold(delta);
  const auto reject = [&](double m) {
    return empbern_log_wealth(t, sum_y, sum_y_sq, tau, m) >= thr;
  };
  if (!reject(0.0)) return 0.0;
  const double root = reject(1.0) ? 1.0 : unit_bisect(reject);
  return std::min(root, clipped_mean(t, sum_y));
}

double ddrm_per_lambda_log_wealth(const FrozenTailStats::SideView& side,
                                  double lambda, double m) {
  if (side.t == 0) throw std::invalid_argument("wealth needs t >= 1");
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("lambda must lie in (0,1)");
  if (!std::isfinite(m)) throw std::invalid_argument("m must be finite");
  const double td = static_cast<double>(side.t);
  const double ystar = clipped_mean(side.t, side.sum_y);
  const double capped = std::min(td, side.sum_y);
  const double slack = std::max(0.0, side.sum_y - td * ystar);
  const double sumlog = side.sum_log_one_plus(lambda, ystar);
  const double sumh = std::max(0.0, lambda * slack - sumlog);
  const double r = lambda / (1.0 - lambda);
  const double reg = 4.0 * r * r + 4.0 * r * std::sqrt(sumh);
  return lambda * (capped - td * m) + sumlog - reg;
}

DdrmWealth::DdrmWealth(const FrozenTailStats::SideView& side,
                       const BetGrid& grid)
    : side_(side), grid_(grid) {
  const double td = static_cast<double>(side.t);
  ystar_ = clipped_mean(side.t, side.sum_y);
  capped_sum_ = std::min(td, side.sum_y);
  slack_ = std::max(0.0, side.sum_y - td * ystar_);
  log_weights_.reserve(grid.weights.size());
  for (double w : grid.weights) log_weights_.push_back(std::log(w));
  suffix_mass_.assign(grid.weights.size() + 1, 0.0);
  for (std::size_t j = grid.weights.size(); j-- > 0;)
    suffix_mass_[j] = suffix_mass_[j + 1] + grid.weights[j];
}

void DdrmWealth::ensure_level(std::size_t j) const {
  while (consts_.size() <= j) {
    const std::size_t k = consts_.size();
    const double lambda = grid_.lambdas[k];
    const double sumlog = side_.sum_log_one_plus(lambda, ystar_);
    const double sumh = std::max(0.0, lambda * slack_ - sumlog);
    const double r = lambda / (1.0 - lambda);
    const double reg = 4.0 * r * r + 4.0 * r * std::sqrt(sumh);
    consts_.push_back(sumlog - reg);
  }
}

double DdrmWealth::per_lambda(std::size_t j, double m) const {
  const double td = static_cast<double>(side_.t);
  return grid_.lambdas[j] * (capped_sum_ - td * m) + consts_[j];
}

bool DdrmWealth::rejects(double m, double log_threshold) const {
  const double td = static_cast<double>(side_.t);
  // Per-bet upper bound for untried lambdas: the chord bound
  // sum log(1 + lambda (Y - ystar)) <= lambda (sum Y - t ystar) gives
  // log-wealth <= lambda * g with g below; regret only lowers it.
  const double g = (capped_sum_ - td * m) + slack_;
  double partial = kNegInf;
  const std::size_t levels = grid_.lambdas.size();
  for (std::size_t j = 0; j < levels; ++j) {
    ensure_level(j);
    partial = log_add_exp(partial, log_weights_[j] + per_lambda(j, m));
    if (partial >= log_threshold) return true;
    if (j + 1 < levels) {
      const double tail = std::log(suffix_mass_[j + 1]) +
                          std::max(0.0, grid_.lambdas[j + 1] * g);
      if (log_add_exp(partial, tail) < log_threshold) return false;
    }
  }
  return partial >= log_threshold;
}

double DdrmWealth::log_wealth(double m) const {
  double total = kNegInf;
  for (std::size_t j = 0; j < grid_.lambdas.size(); ++j) {
    ensure_level(j);
    total = log_add_exp(total, log_weights_[j] + per_lambda(j, m));
  }
  return total;
}

double ddrm_lower_from_view(const FrozenTailStats::SideView& side,
                            const BetGrid& grid, double delta) {
  if (side.t == 0) throw std::invalid_argument("lower bound needs t >= 1");
  grid.validate();
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  if (delta >= 1.0) return 0.0;
  const double thr = log_threshold(delta);
  const DdrmWealth wealth(side, grid);
  const auto reject = [&](double m) { return wealth.rejects(m, thr); };
  if (!reject(0.0)) return 0.0;
  const double root = reject(1.0) ? 1.0 : unit_bisect(reject);
  return std::min(root, clipped_mean(side.t, side.sum_y));
}

double empbern_lower_from_view(const FrozenTailStats::SideView& side,
                               double tau, double delta) {
  return empbern_lower_from_moments(side.t, side.sum_y, side.sum_y_sq, tau,
                                    delta);
}

}  // namespace wealth

double bernoulli_lower(const ValueCounts& counts, const OracleQuery& q,
                       double prior_b) {
  check_counts_query(counts.total(), q);
  return wealth::bernoulli_lower_from_counts(counts.count_le(q.rho), q.t,
                                             q.delta, prior_b);
}

double bernoulli_upper(const ValueCounts& counts, const OracleQuery& q,
                       double prior_b) {
  check_counts_query(counts.total(), q);
  const std::uint64_t tail = q.t - counts.count_le(q.rho);
  return 1.0 -
         wealth::bernoulli_lower_from_counts(tail, q.t, q.delta, prior_b);
}

double subgaussian_upper(const ValueCounts& counts, const OracleQuery& q,
                         double tau) {
  check_counts_query(counts.total(), q);
  return wealth::subgaussian_upper_from_counts(counts.count_le(q.rho), q.t,
                                               tau, q.delta);
}

double subgaussian_lower(const ValueCounts& counts, const OracleQuery& q,
                         double tau) {
  check_counts_query(counts.total(), q);
  const std::uint64_t tail = q.t - counts.count_le(q.rho);
  return 1.0 -
         wealth::subgaussian_upper_from_counts(tail, q.t, tau, q.delta);
}

double empbern_lower(const FrozenTailStats& frozen, const OracleQuery& q,
                     double tau) {
  check_counts_query(frozen.time(), q);
  return wealth::empbern_lower_from_view(frozen.head_leq(q.rho), tau, q.delta);
}

double empbern_upper(const FrozenTailStats& frozen, const OracleQuery& q,
                     double tau) {
  check_counts_query(frozen.time(), q);
  const double tail_lower =
      wealth::empbern_lower_from_view(frozen.tail_gt(q.rho), tau, q.delta);
  const double qw = clipped_mean(q.t, frozen.head_leq(q.rho).sum_y);
  return std::min(1.0, std::max(1.0 - tail_lower, qw));
}

double empbern_stitched_boundary(double v_process, std::uint64_t t, double tau,
                                 double delta) {
  if (!(v_process >= 0.0) || !std::isfinite(v_process))
    throw std::invalid_argument("variance process must be nonnegative");
  if (t == 0) throw std::invalid_argument("boundary needs t >= 1");
  check_tau(tau);
  if (!(delta > 0.0) || std::isnan(delta))
    throw std::invalid_argument("delta must be positive");
  const double td = static_cast<double>(t);
  const double tv = tau + v_process;
  const double log_c =
      tau * std::log(tau) - tau - log_lower_inc_gamma(tau, tau);
  // Stirling-corrected inversion of the conjugate-mixture wealth; clamping
  // the log factor at zero only widens the radius.
  const double log_phi = 0.5 * std::log(tv / (2.0 * kPi)) -
                         1.0 / (12.0 * tv + 1.0) + std::log1p(1.0 / delta) -
                         log_c;
  const double lp = std::max(0.0, log_phi);
  const double u = std::sqrt(2.0 * (tv / td / td) * lp) + lp / td;
  return std::max(std::exp(log_c) / td, u);
}

double ddrm_lower(const FrozenTailStats& frozen, const OracleQuery& q,
                  const BetGrid& grid) {
  check_counts_query(frozen.time(), q);
  return wealth::ddrm_lower_from_view(frozen.head_leq(q.rho), grid, q.delta);
}

double ddrm_upper(const FrozenTailStats& frozen, const OracleQuery& q,
                  const BetGrid& grid) {
  check_counts_query(frozen.time(), q);
  const double tail_lower =
      wealth::ddrm_lower_from_view(frozen.tail_gt(q.rho), grid, q.delta);
  const double qw = clipped_mean(q.t, frozen.head_leq(q.rho).sum_y);
  return std::min(1.0, std::max(1.0 - tail_lower, qw));
}

const char* to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::bernoulli: return "bernoulli";
    case OracleKind::subgaussian: return "subgaussian";
    case OracleKind::empirical_bernstein: return "empbern";
    case OracleKind::ddrm: return "ddrm";
  }
  return "unknown";
}

bool oracle_kind_from_string(const std::string& name, OracleKind* out) {
  if (name == "bernoulli") *out = OracleKind::bernoulli;
  else if (name == "subgaussian") *out = OracleKind::subgaussian;
  else if (name == "empbern") *out = OracleKind::empirical_bernstein;
  else if (name == "ddrm") *out = OracleKind::ddrm;
  else return false;
  return true;
}

FrozenOracle::FrozenOracle(OracleKind kind, FrozenTailStats frozen,
                           OracleParams params)
    : kind_(kind), frozen_(std::move(frozen)), params_(std::move(params)) {
  check_tau(params_.tau);
  check_prior(params_.prior_b);
  params_.grid.validate();
}

double FrozenOracle::compute(double rho, double delta, bool lower_side) const {
  const std::uint64_t t = frozen_.time();
  switch (kind_) {
    case OracleKind::bernoulli: {
      if (lower_side)
        return wealth::bernoulli_lower_from_counts(
            frozen_.head_leq(rho).side_count, t, delta, params_.prior_b);
      return 1.0 - wealth::bernoulli_lower_from_counts(
                       frozen_.tail_gt(rho).side_count, t, delta,
                       params_.prior_b);
    }
    case OracleKind::subgaussian: {
      if (!lower_side)
        return wealth::subgaussian_upper_from_counts(
            frozen_.head_leq(rho).side_count, t, params_.tau, delta);
      return 1.0 - wealth::subgaussian_upper_from_counts(
                       frozen_.tail_gt(rho).side_count, t, params_.tau, delta);
    }
    case OracleKind::empirical_bernstein: {
      if (lower_side)
        return wealth::empbern_lower_from_view(frozen_.head_leq(rho),
                                               params_.tau, delta);
      const double tail_lower = wealth::empbern_lower_from_view(
          frozen_.tail_gt(rho), params_.tau, delta);
      const double qw = clipped_mean(t, frozen_.head_leq(rho).sum_y);
      return std::min(1.0, std::max(1.0 - tail_lower, qw));
    }
    case OracleKind::ddrm: {
      if (lower_side)
        return wealth::ddrm_lower_from_view(frozen_.head_leq(rho),
                                            params_.grid, delta);
      const double tail_lower = wealth::ddrm_lower_from_view(
          frozen_.tail_gt(rho), params_.grid, delta);
      const double qw = clipped_mean(t, frozen_.head_leq(rho).sum_y);
      return std::min(1.0, std::max(1.0 - tail_lower, qw));
    }
  }
  throw std::logic_error("unknown oracle kind");
}

double FrozenOracle::lower(double rho, double delta) const {
  OracleQuery q{rho, delta, frozen_.time()};
  q.validate();
  const auto& vals = frozen_.values();
  const std::uint64_t cut =
      std::upper_bound(vals.begin(), vals.end(), rho) - vals.begin();
  const auto key = std::make_tuple(cut, 0, delta);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double value = compute(rho, delta, true);
  cache_.emplace(key, value);
  return value;
}

double FrozenOracle::upper(double rho, double delta) const {
  OracleQuery q{rho, delta, frozen_.time()};
  q.validate();
  const auto& vals = frozen_.values();
  const std::uint64_t cut =
      std::upper_bound(vals.begin(), vals.end(), rho) - vals.begin();
  const auto key = std::make_tuple(cut, 1, delta);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double value = compute(rho, delta, false);
  cache_.emplace(key, value);
  return value;
}

bool FrozenOracle::lower_excludes(double rho, double delta,
                                  double candidate) const {
  OracleQuery q{rho, delta, frozen_.time()};
  q.validate();
  if (std::isnan(candidate))
    throw std::invalid_argument("candidate must not be NaN");
  if (delta >= 1.0) return candidate < 0.0;
  if (candidate < 0.0) return true;
  if (candidate >= 1.0) return false;
  const std::uint64_t t = frozen_.time();
  const double thr = log_threshold(delta);
  switch (kind_) {
    case OracleKind::bernoulli: {
      const std::uint64_t c = frozen_.head_leq(rho).side_count;
      if (c == 0) return false;
      if (candidate == 0.0) return true;  // wealth diverges at 0 when c > 0
      return wealth::bernoulli_log_wealth(c, t, candidate, params_.prior_b) >=
             thr;
    }
    case OracleKind::subgaussian: {
      // Complement upper at 1 - candidate; positive gap is necessary for a
      // violation, so this may overcount (never undercount) exclusions.
      const std::uint64_t tail = frozen_.tail_gt(rho).side_count;
      const double qhat = static_cast<double>(tail) / static_cast<double>(t);
      const double p = 1.0 - candidate;
      return p - qhat -
                 wealth::subgaussian_boundary(t, p, params_.tau, delta) /
                     static_cast<double>(t) >
             0.0;
    }
    case OracleKind::empirical_bernstein: {
      const auto head = frozen_.head_leq(rho);
      return wealth::empbern_log_wealth(t, head.sum_y, head.sum_y_sq,
                                        params_.tau, candidate) >= thr;
    }
    case OracleKind::ddrm: {
      const auto head = frozen_.head_leq(rho);
      const wealth::DdrmWealth w(head, params_.grid);
      return w.rejects(candidate, thr);
    }
  }
  throw std::logic_error("unknown oracle kind");
}

bool FrozenOracle::upper_excludes(double rho, double delta,
                                  double candidate) const {
  OracleQuery q{rho, delta, frozen_.time()};
  q.validate();
  if (std::isnan(candidate))
    throw std::invalid_argument("candidate must not be NaN");
  if (delta >= 1.0) return candidate > 1.0;
  if (candidate > 1.0) return true;
  if (candidate <= 0.0) return false;
  const std::uint64_t t = frozen_.time();
  const double thr = log_threshold(delta);
  const double complement = 1.0 - candidate;
  switch (kind_) {
    case OracleKind::bernoulli: {
      const std::uint64_t c = frozen_.tail_gt(rho).side_count;
      if (c == 0) return false;
      if (complement <= 0.0) return true;
      return wealth::bernoulli_log_wealth(c, t, complement, params_.prior_b) >=
             thr;
    }
    case OracleKind::subgaussian: {
      const std::uint64_t head = frozen_.head_leq(rho).side_count;
      const double qhat = static_cast<double>(head) / static_cast<double>(t);
      return candidate - qhat -
                 wealth::subgaussian_boundary(t, candidate, params_.tau,
                                              delta) /
                     static_cast<double>(t) >
             0.0;
    }
    case OracleKind::empirical_bernstein: {
      const auto tail = frozen_.tail_gt(rho);
      return wealth::empbern_log_wealth(t, tail.sum_y, tail.sum_y_sq,
                                        params_.tau, complement) >= thr;
    }
    case OracleKind::ddrm: {
      const auto tail = frozen_.tail_gt(rho);
      const wealth::DdrmWealth w(tail, params_.grid);
      return w.rejects(complement, thr);
    }
  }
  throw std::logic_error("unknown oracle kind");
}

double FrozenOracle::weight_drift() const {
  const std::uint64_t t = frozen_.time();
  if (t == 0) return 0.0;
  return (frozen_.total_weight() - static_cast<double>(t)) /
         static_cast<double>(t);
}

}  // namespace cdfband
