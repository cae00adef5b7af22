#pragma once

// Pointwise anytime-valid confidence bounds ("oracles") for the running
// average conditional mean of Y_s = W_s 1{X_s <= rho}: four interchangeable
// strategies (Beta-Binomial, curved sub-Gaussian, empirical Bernstein, and a
// heavy-tail-safe mixture over geometric bets).  Each gives, for a fixed probe
// rho and budget delta, bounds valid uniformly over time with probability
// 1 - delta.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cdfband/stream_stats.hpp"

namespace cdfband {

struct OracleQuery {
  double rho = 0.0;
  double delta = 0.05;
  std::uint64_t t = 0;

  // Throws std::invalid_argument on NaN rho, delta <= 0, or t == 0.
  // delta >= 1 is allowed and yields the trivial bound.
  void validate() const;
};

// Countable collection of bets in (0,1) with a sub-probability weight vector.
// Any such mixture of per-bet test supermartingales is again a test
// supermartingale, so truncating the weight mass never harms coverage.
struct BetGrid {
  std::vector<double> lambdas;  // strictly decreasing, in (0, 1)
  std::vector<double> weights;  // positive, summing to <= 1

  void validate() const;  // throws std::invalid_argument

  // lambda_j = 2^{-(j+1)}, weight_j = (6/pi^2) / (j+1)^2, j = 0..levels-1.
  static BetGrid geometric(std::size_t levels = 65);
};

// Reporting-only telemetry attached to emitted bounds.
struct WidthDiagnostics {
  double weight_drift = 0.0;    // t^{-1} sum (W_s - 1)
  double variance_proxy = 0.0;  // Bernoulli variance proxy at the bound
  int depth_used = 0;           // grid depth at which the band accepted it
};

// --- spec-level operations ----------------------------------------------------

// Lower confidence bound from the Beta-Binomial mixture wealth (prior
// parameter b), bisected to 1e-8 and clamped to [0, empirical fraction].
double bernoulli_lower(const ValueCounts& counts, const OracleQuery& q,
                       double prior_b = 1.0);
// Upper bound via the complement counts: 1 - lower bound on P(X > rho).
double bernoulli_upper(const ValueCounts& counts, const OracleQuery& q,
                       double prior_b = 1.0);

// Largest fixed point of p - qhat = M(t; p, tau, delta)/t for the curved
// sub-Gaussian boundary M; conservative (largest crossing) when multiple.
double subgaussian_upper(const ValueCounts& counts, const OracleQuery& q,
                         double tau = 1.0);
double subgaussian_lower(const ValueCounts& counts, const OracleQuery& q,
                         double tau = 1.0);

// Empirical-Bernstein mixture wealth bounds on the weighted head process.
double empbern_lower(const FrozenTailStats& frozen, const OracleQuery& q,
                     double tau = 1.0);
double empbern_upper(const FrozenTailStats& frozen, const OracleQuery& q,
                     double tau = 1.0);

// Closed-form stitched radius dominating the exact empirical-Bernstein
// mixture inversion: max(C(tau)/t, u(V; tau, delta)).
double empbern_stitched_boundary(double v_process, std::uint64_t t, double tau,
                                 double delta);

// Heavy-tail-safe bounds: mixture over the bet grid of per-bet log-wealth
// lower bounds assembled from the frozen geometric buckets.
double ddrm_lower(const FrozenTailStats& frozen, const OracleQuery& q,
                  const BetGrid& grid);
double ddrm_upper(const FrozenTailStats& frozen, const OracleQuery& q,
                  const BetGrid& grid);

// --- wealth-level cores (used by the bound functions, the coverage harness,
// --- and the test suites' brute-force comparisons) -----------------------------

namespace wealth {

// log of the Beta-Binomial mixture wealth at candidate mean m in (0, 1),
// given c = #{X <= rho} successes out of t.
double bernoulli_log_wealth(std::uint64_t c, std::uint64_t t, double m,
                            double prior_b = 1.0);
double bernoulli_lower_from_counts(std::uint64_t c, std::uint64_t t,
                                   double delta, double prior_b = 1.0);

// Curved sub-Gaussian crossing boundary M(t; p, tau, delta).
double subgaussian_boundary(std::uint64_t t, double p, double tau,
                            double delta);
double subgaussian_upper_from_counts(std::uint64_t c, std::uint64_t t,
                                     double tau, double delta);

struct EmpBernParts {
  double ystar = 0.0;  // clipped running mean of Y
  double ssq = 0.0;    // sum (Y - ystar)^2
  double reg = 0.0;    // regret inflation 16 + 4 sqrt(2) sqrt(8 + ssq)
  double v = 0.0;      // inflated variance process reg + ssq
};
EmpBernParts empbern_parts(std::uint64_t t, double sum_y, double sum_y_sq);

double empbern_log_wealth(std::uint64_t t, double sum_y, double sum_y_sq,
                          double tau, double m);
double empbern_lower_from_moments(std::uint64_t t, double sum_y,
                                  double sum_y_sq, double tau, double delta);

// Per-bet log-wealth lower bound at candidate m, evaluated from a frozen
// side view (bucketed log terms, exact regret arithmetic).
double ddrm_per_lambda_log_wealth(const FrozenTailStats::SideView& side,
                                  double lambda, double m);

// Mixture evaluation helper: per-bet constants are computed lazily and the
// sum over bets stops as soon as the comparison against a log threshold is
// decided (the untried weight mass is provably bounded).
class DdrmWealth {
 public:
  DdrmWealth(const FrozenTailStats::SideView& side, const BetGrid& grid);

  // Is log mixture wealth(m) >= log_threshold?  Undecidable-within-grid
  // resolves to the full finite-grid value (the dropped tail mass only makes
  // the mixture smaller, which is the conservative direction).
  bool rejects(double m, double log_threshold) const;

  // Full finite-grid log mixture wealth lower bound at m.
  double log_wealth(double m) const;

 private:
  double per_lambda(std::size_t j, double m) const;
  void ensure_level(std::size_t j) const;

  const FrozenTailStats::SideView& side_;
  const BetGrid& grid_;
  double ystar_ = 0.0;
  double capped_sum_ = 0.0;  // min(t, sum Y)
  double slack_ = 0.0;       // sum Y - t * ystar  (>= 0)
  std::vector<double> log_weights_;
  std::vector<double> suffix_mass_;
  mutable std::vector<double> consts_;  // bucketed log-sum minus regret, per bet
};

double ddrm_lower_from_view(const FrozenTailStats::SideView& side,
                            const BetGrid& grid, double delta);
double empbern_lower_from_view(const FrozenTailStats::SideView& side,
                               double tau, double delta);

}  // namespace wealth

// --- band-facing interface ------------------------------------------------------

enum class OracleKind {
  bernoulli,
  subgaussian,
  empirical_bernstein,
  ddrm,
};

const char* to_string(OracleKind kind);
bool oracle_kind_from_string(const std::string& name, OracleKind* out);

struct OracleParams {
  double tau = 1.0;
  double prior_b = 1.0;
  BetGrid grid = BetGrid::geometric();
};

// What the band algorithms need from an oracle: pointwise bounds plus exact
// sample-presence queries for early termination and origin shifting.
class PointwiseOracle {
 public:
  virtual ~PointwiseOracle() = default;

  virtual OracleKind kind() const = 0;
  virtual double lower(double rho, double delta) const = 0;
  virtual double upper(double rho, double delta) const = 0;

  virtual std::uint64_t time() const = 0;
  virtual std::uint64_t count_open_closed(double lo, double hi) const = 0;
  virtual std::uint64_t count_closed_open(double lo, double hi) const = 0;
  virtual double next_sample_above(double v) const = 0;
  virtual double prev_sample_below(double v) const = 0;

  // Wealth-level exclusion predicates for the Monte-Carlo coverage harness:
  // lower_excludes certifies estimand > candidate, upper_excludes certifies
  // estimand < candidate.  A true return implies the corresponding bound
  // violates the candidate up to root-finding quantization; for the curved
  // sub-Gaussian strategy the predicate may overcount (never undercount)
  // exclusions, which is the conservative direction for coverage audits.
  virtual bool lower_excludes(double rho, double delta,
                              double candidate) const = 0;
  virtual bool upper_excludes(double rho, double delta,
                              double candidate) const = 0;
};

// Oracle over a frozen snapshot.  Bound evaluations are memoized per
// (distinct-value cut, delta); instances are cheap to copy-construct from a
// shared snapshot but a single instance must not be mutated concurrently.
class FrozenOracle : public PointwiseOracle {
 public:
  FrozenOracle(OracleKind kind, FrozenTailStats frozen,
               OracleParams params = {});

  double lower(double rho, double delta) const override;
  double upper(double rho, double delta) const override;
  std::uint64_t time() const override { return frozen_.time(); }
  std::uint64_t count_open_closed(double lo, double hi) const override {
    return frozen_.count_open_closed(lo, hi);
  }
  std::uint64_t count_closed_open(double lo, double hi) const override {
    return frozen_.count_closed_open(lo, hi);
  }
  double next_sample_above(double v) const override {
    return frozen_.next_above(v);
  }
  double prev_sample_below(double v) const override {
    return frozen_.prev_below(v);
  }
  bool lower_excludes(double rho, double delta,
                      double candidate) const override;
  bool upper_excludes(double rho, double delta,
                      double candidate) const override;

  OracleKind kind() const override { return kind_; }
  const FrozenTailStats& frozen() const { return frozen_; }
  const OracleParams& params() const { return params_; }
  double weight_drift() const;  // t^{-1} sum (W_s - 1)

 private:
  double compute(double rho, double delta, bool lower_side) const;

  OracleKind kind_;
  FrozenTailStats frozen_;
  OracleParams params_;
  // (distinct-value cut, side, delta) -> bound
  mutable std::map<std::tuple<std::uint64_t, int, double>, double> cache_;
};

}  // namespace cdfband
