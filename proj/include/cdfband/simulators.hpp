#pragma once

// Synthetic data-generating processes with exactly tracked ground truth: each
// generator emits a (weight, value) stream and maintains the running average
// of the conditional weighted CDFs it actually sampled from, so coverage can
// be audited against the true estimand rather than an empirical proxy.  Also
// home to the time-uniform DKW baseline and the Monte-Carlo coverage
// harnesses.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cdfband/bands.hpp"
#include "cdfband/oracles.hpp"

namespace cdfband {

// Counter-based generator: output_i = finalizer(key + i * golden) where key
// hashes (seed, stream).  The finalizer is a 64-bit bijection, so distinct
// streams under the same seed produce non-overlapping sequences unless the
// key hash collides; per-seed parallel use never shares state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();      // open interval (0, 1)
  double normal();       // inverse-CDF transform of uniform()
  double exponential();  // mean 1
  double gamma(double shape);  // unit scale; shape > 0
  double beta(double a, double b);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Standard normal quantile function (Wichura's PPND16 rational
// approximations), accurate to ~1e-15 relative over p in (0, 1).
double inverse_normal_cdf(double p);

enum class WeightLaw {
  exp_one,             // Exp(1): mean 1, light tail
  pareto_three_halves  // Pareto(3/2) with scale 1/3: mean 1, infinite variance
};

const char* to_string(WeightLaw law);
bool weight_law_from_string(const std::string& name, WeightLaw* out);

// Inverse-CDF draw from the weight law (both laws have mean exactly 1).
double weight_law_sample(WeightLaw law, CounterRng& rng);

enum class GeneratorKind {
  iid_beta,         // X ~ Beta(a, b), W = 1
  iid_lognormal,    // log X ~ N(mu, sigma^2), W = 1
  iid_gaussian,     // X ~ N(mu, sigma^2), W = 1
  iid_uniform_eps,  // X ~ U[0, eps], W = 1
  polya,            // reinforcing urn: conditional Beta moving with history
  iw_polya,         // two urns keyed by weight class, W in {0, w_max}
  iid_iw            // X ~ Beta(a, b) with independent weights from a law
};

const char* to_string(GeneratorKind kind);
bool generator_kind_from_string(const std::string& name, GeneratorKind* out);

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::iid_beta;
  double beta_a = 6.0;  // iid_beta, iid_iw
  double beta_b = 3.0;
  double mu = 0.0;  // iid_lognormal, iid_gaussian
  double sigma = 1.0;
  double eps = 1.0;             // iid_uniform_eps support [0, eps]
  double polya_exponent = 1.0;  // urn step size gamma_t = scale * t^exponent
  double polya_scale = 1.0;     // 0 freezes the urn at Beta(2, 2)
  double w_max = 10.0;          // iw_polya weight level; P(W = w_max) = 1/w_max
  WeightLaw law = WeightLaw::exp_one;  // iid_iw weight law
  std::uint64_t seed = 1;
  std::uint64_t horizon = 1000;

  // Throws std::invalid_argument: shapes/sigma must be positive and finite,
  // eps in (0, 1], w_max >= 1, polya_scale >= 0, horizon >= 1.
  void validate() const;
};

// Reporting-only smoothness of the conditional laws with respect to the
// generator's reference measure (uniform on [0,1] for unit-interval kinds,
// Lebesgue otherwise): xi_t = xi1 * t^{-decay} lower-bounds the reciprocal
// of the conditional density sup.  Never consumed by the estimators.
struct SmoothnessMetadata {
  double xi1 = 1.0;
  double decay = 0.0;
  bool exact = false;  // true when xi_t is exact, not just a bound

  double at(std::uint64_t t) const;
};

// Running average over steps s <= t of v -> E_{s-1}[W_s 1{X_s <= v}].  For
// iid kinds this is the fixed marginal CDF; for the urn kinds the per-step
// Beta parameters are stored, so the average is evaluable anywhere.  An
// attached probe grid is additionally maintained incrementally (O(grid) per
// step), making checkpoint audits O(1) per probe instead of O(t).
class TruthTracker {
 public:
  std::uint64_t time() const { return t_; }

  // Average conditional CDF at v over the steps taken so far.  Urn kinds
  // require at least one step; iid kinds return the marginal at any time.
  double operator()(double v) const;

  // Attaching mid-stream catches up from the stored per-step parameters.
  void attach_grid(std::vector<double> grid);
  const std::vector<double>& grid() const { return grid_; }
  double at_grid(std::size_t i) const;

 private:
  friend class Generator;

  void init(const GeneratorConfig& config);
  void tick();                          // iid kinds: advance time only
  void push_urn(double a, double b);    // urn kinds: record one step
  double marginal_cdf(double v) const;  // iid closed form

  GeneratorConfig config_{};
  bool urn_mode_ = false;
  std::uint64_t t_ = 0;
  std::vector<std::pair<double, double>> urn_;  // per-step Beta parameters
  std::vector<double> grid_;
  std::vector<double> grid_sums_;  // running sums of conditional CDFs at grid_
};

class Generator {
 public:
  // Validates the config; value and weight draws use separate RNG streams.
  explicit Generator(const GeneratorConfig& config);

  // Advances one step and returns {weight, value}.  The tracker absorbs the
  // conditional CDF the step was drawn from before the draw itself.
  std::pair<double, double> step();

  std::uint64_t time() const { return t_; }
  const GeneratorConfig& config() const { return config_; }
  const TruthTracker& truth() const { return truth_; }
  TruthTracker& truth() { return truth_; }
  SmoothnessMetadata smoothness() const;

 private:
  GeneratorConfig config_;
  CounterRng value_rng_;
  CounterRng weight_rng_;
  TruthTracker truth_;
  std::uint64_t t_ = 0;
  // Urn state: per weight class counts of past draws above / at-or-below 1/2.
  // Unweighted kinds use class 1 only.
  double above_[2] = {0.0, 0.0};
  double at_or_below_[2] = {0.0, 0.0};
};

// Band domain matching the generator's support.
Domain natural_domain(GeneratorKind kind);

// Radius of the time-uniform DKW baseline at time t: the per-time budget is
// delta_t = 6 alpha / (pi^2 t^2) (summing to alpha over t >= 1) and the
// radius is sqrt(log(2/delta_t) / (2t)) around the empirical CDF.
double dkw_radius(std::uint64_t t, double alpha);

// --- Monte-Carlo coverage harnesses --------------------------------------------

// Absolute slack granted when comparing a tracked truth against a bound:
// absorbs root-finding quantization without masking real violations.
inline constexpr double kCoverageGrace = 1e-9;

struct CoverageFailure {
  std::uint64_t seed_index = 0;
  std::uint64_t t = 0;
  double value = 0.0;
  double truth = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct CoverageConfig {
  GeneratorConfig generator{};  // seed i uses generator.seed + i
  double alpha = 0.05;
  OracleKind oracle = OracleKind::bernoulli;
  OracleParams params{};
  Domain domain = Domain::unit;
  SideOptions side{};
  std::vector<double> probes;              // strictly increasing band values
  std::vector<std::uint64_t> check_times;  // strictly increasing, <= horizon
  std::uint64_t num_seeds = 100;

  void validate() const;  // throws std::invalid_argument
};

struct CoverageReport {
  std::uint64_t num_seeds = 0;
  std::uint64_t failures = 0;  // seeds with at least one violating (t, v)
  std::uint64_t checks_per_seed = 0;
  std::vector<CoverageFailure> examples;  // first few violations, for triage
  // Per seed, the worst signed violation margin max(lower - truth,
  // truth - upper) over every audited (t, v); negative values measure slack.
  std::vector<double> worst_margins;

  double failure_fraction() const;
  // Wilson score interval for the failure probability at z standard errors.
  std::pair<double, double> wilson_interval(double z = 3.0) const;
};

// Full band audit: per seed, stream to the horizon, build the band curve at
// every check time, and compare against the tracked truth at every probe.
CoverageReport coverage_mc(const CoverageConfig& config);

struct PointwiseCoverageConfig {
  GeneratorConfig generator{};
  double rho = 0.5;  // fixed probe
  double delta = 0.1;
  OracleKind oracle = OracleKind::bernoulli;
  OracleParams params{};
  std::uint64_t num_seeds = 100;

  void validate() const;  // throws std::invalid_argument
};

struct PointwiseCoverageReport {
  std::uint64_t num_seeds = 0;
  std::uint64_t failures = 0;  // seeds where truth escapes [L_t, U_t] at any t
  std::vector<double> final_widths;  // U - L at the horizon, one per seed

  double failure_fraction() const;
  double median_final_width() const;
};

// Pointwise audit at a single probe, checked at every step via the oracle
// exclusion predicates evaluated on incrementally maintained side statistics
// (no per-step freeze), so the whole horizon is tested in O(T) amortized.
PointwiseCoverageReport pointwise_coverage_mc(
    const PointwiseCoverageConfig& config);

}  // namespace cdfband
