#include "cdfband/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cdfband/kernels.hpp"

namespace cdfband {

namespace {

constexpr std::uint64_t kGamma64 = 0x9E3779B97F4A7C15ull;
constexpr double kTwoPi = 6.283185307179586476925;

// 64-bit finalizer (a bijection): the avalanche stage of SplitMix64.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Beta(a, b) CDF extended to the whole line by clamping.
double beta_cdf01(double v, double a, double b) {
  if (!(v > 0.0)) return 0.0;
  if (v >= 1.0) return 1.0;
  return reg_inc_beta(v, a, b);
}

double polynomial(const double* c, int degree, double r) {
  double acc = c[degree];
  for (int i = degree - 1; i >= 0; --i) acc = acc * r + c[i];
  return acc;
}

}  // namespace

// --- counter-based RNG ----------------------------------------------------------

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ kGamma64) ^
           mix64(mix64(stream) + 0xD1342543DE82EF95ull)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + kGamma64 * counter_);
}

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() { return inverse_normal_cdf(uniform()); }

double CounterRng::exponential() { return -std::log1p(-uniform()); }

double CounterRng::gamma(double shape) {
  if (!std::isfinite(shape) || shape <= 0.0)
    throw std::invalid_argument("gamma shape must be positive and finite");
  if (shape < 1.0) {
    // Boosted draw: Gamma(a) = Gamma(a + 1) * U^{1/a}.
    const double boost = std::pow(uniform(), 1.0 / shape);
    return gamma(shape + 1.0) * boost;
  }
  // Marsaglia-Tsang squeeze: d (1 + c N)^3 with a log acceptance test.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    const double base = 1.0 + c * x;
    if (base <= 0.0) continue;
    const double v = base * base * base;
    const double u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double CounterRng::beta(double a, double b) {
  for (;;) {
    const double g1 = gamma(a);
    const double g2 = gamma(b);
    const double s = g1 + g2;
    if (s > 0.0) return g1 / s;
  }
}

// Wichura's PPND16 rational approximations for the standard normal quantile.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("inverse_normal_cdf requires p in (0, 1)");
  static constexpr double kA[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static constexpr double kB[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static constexpr double kC[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double kD[8] = {
      1.0,                      2.05319162663775882187e0,
      1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double kE[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double kF[8] = {
      1.0,                      5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * polynomial(kA, 7, r) / polynomial(kB, 7, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = polynomial(kC, 7, r) / polynomial(kD, 7, r);
  } else {
    r -= 5.0;
    value = polynomial(kE, 7, r) / polynomial(kF, 7, r);
  }
  return q < 0.0 ? -value : value;
}

// --- weight laws ----------------------------------------------------------------

const char* to_string(WeightLaw law) {
  switch (law) {
    case WeightLaw::exp_one:
      return "exp1";
    case WeightLaw::pareto_three_halves:
      return "pareto32";
  }
  return "?";
}

bool weight_law_from_string(const std::string& name, WeightLaw* out) {
  if (name == "exp1") {
    *out = WeightLaw::exp_one;
    return true;
  }
  if (name == "pareto32") {
    *out = WeightLaw::pareto_three_halves;
    return true;
  }
  return false;
}

double weight_law_sample(WeightLaw law, CounterRng& rng) {
  switch (law) {
    case WeightLaw::exp_one:
      return rng.exponential();
    case WeightLaw::pareto_three_halves:
      // Scale 1/3 and shape 3/2 give mean (3/2)(1/3)/(1/2) = 1.
      return (1.0 / 3.0) * std::pow(1.0 - rng.uniform(), -2.0 / 3.0);
  }
  throw std::logic_error("unknown weight law");
}

// --- generator configuration -----------------------------------------------------

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::iid_beta:
      return "iid-beta";
    case GeneratorKind::iid_lognormal:
      return "iid-lognormal";
    case GeneratorKind::iid_gaussian:
      return "iid-gaussian";
    case GeneratorKind::iid_uniform_eps:
      return "iid-uniform-eps";
    case GeneratorKind::polya:
      return "polya";
    case GeneratorKind::iw_polya:
      return "iw-polya";
    case GeneratorKind::iid_iw:
      return "iid-iw";
  }
  return "?";
}

bool generator_kind_from_string(const std::string& name, GeneratorKind* out) {
  static const std::pair<const char*, GeneratorKind> table[] = {
      {"iid-beta", GeneratorKind::iid_beta},
      {"iid-lognormal", GeneratorKind::iid_lognormal},
      {"iid-gaussian", GeneratorKind::iid_gaussian},
      {"iid-uniform-eps", GeneratorKind::iid_uniform_eps},
      {"polya", GeneratorKind::polya},
      {"iw-polya", GeneratorKind::iw_polya},
      {"iid-iw", GeneratorKind::iid_iw}};
  for (const auto& [key, kind] : table) {
    if (name == key) {
      *out = kind;
      return true;
    }
  }
  return false;
}

void GeneratorConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(beta_a) || !positive(beta_b))
    throw std::invalid_argument("beta shapes must be positive and finite");
  if (!std::isfinite(mu))
    throw std::invalid_argument("mu must be finite");
  if (!positive(sigma))
    throw std::invalid_argument("sigma must be positive and finite");
  if (!(eps > 0.0) || !(eps <= 1.0))
    throw std::invalid_argument("eps must lie in (0, 1]");
  if (!std::isfinite(polya_exponent))
    throw std::invalid_argument("polya exponent must be finite");
  if (!std::isfinite(polya_scale) || polya_scale < 0.0)
    throw std::invalid_argument("polya scale must be nonnegative and finite");
  if (!std::isfinite(w_max) || w_max < 1.0)
    throw std::invalid_argument("w_max must be at least 1");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
}

double SmoothnessMetadata::at(std::uint64_t t) const {
  if (t == 0) throw std::invalid_argument("time must be positive");
  return xi1 * std::pow(static_cast<double>(t), -decay);
}

// --- truth tracker ----------------------------------------------------------------

void TruthTracker::init(const GeneratorConfig& config) {
  config_ = config;
  urn_mode_ = config.kind == GeneratorKind::polya ||
              config.kind == GeneratorKind::iw_polya;
  t_ = 0;
  urn_.clear();
  grid_.clear();
  grid_sums_.clear();
}

void TruthTracker::tick() { ++t_; }

void TruthTracker::push_urn(double a, double b) {
  urn_.emplace_back(a, b);
  ++t_;
  for (std::size_t i = 0; i < grid_.size(); ++i)
    grid_sums_[i] += beta_cdf01(grid_[i], a, b);
}

double TruthTracker::marginal_cdf(double v) const {
  switch (config_.kind) {
    case GeneratorKind::iid_beta:
    case GeneratorKind::iid_iw:
      return beta_cdf01(v, config_.beta_a, config_.beta_b);
    case GeneratorKind::iid_lognormal:
      if (!(v > 0.0)) return 0.0;
      return normal_cdf((std::log(v) - config_.mu) / config_.sigma);
    case GeneratorKind::iid_gaussian:
      return normal_cdf((v - config_.mu) / config_.sigma);
    case GeneratorKind::iid_uniform_eps:
      return std::clamp(v / config_.eps, 0.0, 1.0);
    default:
      throw std::logic_error("no closed-form marginal for an urn kind");
  }
}

double TruthTracker::operator()(double v) const {
  if (std::isnan(v)) throw std::invalid_argument("v must not be NaN");
  if (!urn_mode_) return marginal_cdf(v);
  if (t_ == 0) throw std::logic_error("urn tracker has no steps yet");
  double sum = 0.0;
  for (const auto& [a, b] : urn_) sum += beta_cdf01(v, a, b);
  return sum / static_cast<double>(t_);
}

void TruthTracker::attach_grid(std::vector<double> grid) {
  for (double v : grid)
    if (std::isnan(v))
      throw std::invalid_argument("grid values must not be NaN");
  grid_ = std::move(grid);
  grid_sums_.assign(grid_.size(), 0.0);
  if (!urn_mode_) return;
  for (const auto& [a, b] : urn_)
    for (std::size_t i = 0; i < grid_.size(); ++i)
      grid_sums_[i] += beta_cdf01(grid_[i], a, b);
}

double TruthTracker::at_grid(std::size_t i) const {
  if (i >= grid_.size()) throw std::out_of_range("probe grid index");
  if (!urn_mode_) return marginal_cdf(grid_[i]);
  if (t_ == 0) throw std::logic_error("urn tracker has no steps yet");
  return grid_sums_[i] / static_cast<double>(t_);
}

// --- generator ---------------------------------------------------------------------

Generator::Generator(const GeneratorConfig& config)
    : config_(config), value_rng_(config.seed, 0), weight_rng_(config.seed, 1) {
  config_.validate();
  truth_.init(config_);
}

std::pair<double, double> Generator::step() {
  const double s = static_cast<double>(t_ + 1);
  double w = 1.0;
  double x = 0.0;
  switch (config_.kind) {
    case GeneratorKind::iid_beta:
      truth_.tick();
      x = value_rng_.beta(config_.beta_a, config_.beta_b);
      break;
    case GeneratorKind::iid_lognormal:
      truth_.tick();
      x = std::exp(config_.mu + config_.sigma * value_rng_.normal());
      break;
    case GeneratorKind::iid_gaussian:
      truth_.tick();
      x = config_.mu + config_.sigma * value_rng_.normal();
      break;
    case GeneratorKind::iid_uniform_eps:
      truth_.tick();
      x = config_.eps * value_rng_.uniform();
      break;
    case GeneratorKind::iid_iw:
      truth_.tick();
      w = weight_law_sample(config_.law, weight_rng_);
      x = value_rng_.beta(config_.beta_a, config_.beta_b);
      break;
    case GeneratorKind::polya: {
      const double step_size =
          config_.polya_scale * std::pow(s, config_.polya_exponent);
      const double a = 2.0 + step_size * above_[1];
      const double b = 2.0 + step_size * at_or_below_[1];
      truth_.push_urn(a, b);
      x = value_rng_.beta(a, b);
      if (x > 0.5) {
        above_[1] += 1.0;
      } else {
        at_or_below_[1] += 1.0;
      }
      break;
    }
    case GeneratorKind::iw_polya: {
      const double step_size =
          config_.polya_scale * std::pow(s, config_.polya_exponent);
      const int cls = weight_rng_.uniform() < 1.0 / config_.w_max ? 1 : 0;
      w = cls == 1 ? config_.w_max : 0.0;
      // The weighted estimand integrates W against the conditional law, so
      // only the positive-weight urn enters the tracked truth.
      truth_.push_urn(2.0 + step_size * above_[1],
                      2.0 + step_size * at_or_below_[1]);
      const double a = 2.0 + step_size * above_[cls];
      const double b = 2.0 + step_size * at_or_below_[cls];
      x = value_rng_.beta(a, b);
      if (x > 0.5) {
        above_[cls] += 1.0;
      } else {
        at_or_below_[cls] += 1.0;
      }
      break;
    }
  }
  ++t_;
  return {w, x};
}

SmoothnessMetadata Generator::smoothness() const {
  SmoothnessMetadata meta;
  switch (config_.kind) {
    case GeneratorKind::iid_uniform_eps:
      meta = {config_.eps, 0.0, true};
      break;
    case GeneratorKind::iid_gaussian:
      meta = {config_.sigma * std::sqrt(kTwoPi), 0.0, true};
      break;
    case GeneratorKind::iid_lognormal:
      meta = {config_.sigma * std::sqrt(kTwoPi) *
                  std::exp(config_.mu - 0.5 * config_.sigma * config_.sigma),
              0.0, true};
      break;
    case GeneratorKind::iid_beta:
    case GeneratorKind::iid_iw: {
      const double a = config_.beta_a;
      const double b = config_.beta_b;
      if (a < 1.0 || b < 1.0) {
        meta = {0.0, 0.0, false};  // density unbounded near an endpoint
      } else if (a + b == 2.0) {
        meta = {1.0, 0.0, true};  // uniform
      } else {
        const double m = (a - 1.0) / (a + b - 2.0);
        double log_peak =
            -(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
        if (a > 1.0) log_peak += (a - 1.0) * std::log(m);
        if (b > 1.0) log_peak += (b - 1.0) * std::log1p(-m);
        meta = {std::exp(-log_peak), 0.0, true};
      }
      break;
    }
    case GeneratorKind::polya:
    case GeneratorKind::iw_polya:
      if (config_.polya_scale == 0.0) {
        meta = {2.0 / 3.0, 0.0, true};  // frozen at Beta(2, 2)
      } else {
        meta = {2.0 / 3.0, 1.0 + config_.polya_exponent, false};
      }
      break;
  }
  return meta;
}

Domain natural_domain(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::iid_lognormal:
    case GeneratorKind::iid_gaussian:
      return Domain::real_line;
    default:
      return Domain::unit;
  }
}

double dkw_radius(std::uint64_t t, double alpha) {
  if (t == 0) throw std::invalid_argument("time must be positive");
  if (std::isnan(alpha) || alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1)");
  const double td = static_cast<double>(t);
  const double pi_sq = 9.869604401089358618834;
  const double delta_t = 6.0 * alpha / (pi_sq * td * td);
  return std::sqrt(std::log(2.0 / delta_t) / (2.0 * td));
}

// --- band coverage harness ----------------------------------------------------------

namespace {

// Numerical grace for truth-vs-bound comparisons: the bounds and the tracker
// are both kernel-accurate to ~1e-10, and the bands hold with real slack, so
// anything inside this margin is roundoff rather than miscoverage.
void require_strictly_increasing(const std::vector<double>& xs,
                                 const char* what) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]))
      throw std::invalid_argument(std::string(what) + " must be finite");
    if (i > 0 && !(xs[i - 1] < xs[i]))
      throw std::invalid_argument(std::string(what) +
                                  " must be strictly increasing");
  }
}

}  // namespace

void CoverageConfig::validate() const {
  generator.validate();
  if (std::isnan(alpha) || alpha <= 0.0)
    throw std::invalid_argument("alpha must be positive");
  if (probes.empty()) throw std::invalid_argument("probe grid required");
  require_strictly_increasing(probes, "probes");
  if (check_times.empty()) throw std::invalid_argument("check times required");
  for (std::size_t i = 0; i < check_times.size(); ++i) {
    if (check_times[i] == 0)
      throw std::invalid_argument("check times must be positive");
    if (i > 0 && !(check_times[i - 1] < check_times[i]))
      throw std::invalid_argument("check times must be strictly increasing");
  }
  if (check_times.back() > generator.horizon)
    throw std::invalid_argument("check times must not exceed the horizon");
  if (num_seeds == 0) throw std::invalid_argument("need at least one seed");
}

double CoverageReport::failure_fraction() const {
  if (num_seeds == 0) return 0.0;
  return static_cast<double>(failures) / static_cast<double>(num_seeds);
}

std::pair<double, double> CoverageReport::wilson_interval(double z) const {
  if (num_seeds == 0) return {0.0, 1.0};
  const double n = static_cast<double>(num_seeds);
  const double p = failure_fraction();
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double halfwidth =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - halfwidth),
          std::min(1.0, center + halfwidth)};
}

CoverageReport coverage_mc(const CoverageConfig& config) {
  config.validate();
  CoverageReport report;
  report.num_seeds = config.num_seeds;
  report.checks_per_seed = config.check_times.size() * config.probes.size();
  for (std::uint64_t i = 0; i < config.num_seeds; ++i) {
    GeneratorConfig gc = config.generator;
    gc.seed = config.generator.seed + i;
    Generator gen(gc);
    gen.truth().attach_grid(config.probes);
    WeightedStreamStats stats;
    bool failed = false;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t next_check = 0;
    for (std::uint64_t t = 1;
         t <= gc.horizon && next_check < config.check_times.size(); ++t) {
      const auto step = gen.step();
      stats.update(step.first, step.second);
      if (t != config.check_times[next_check]) continue;
      ++next_check;
      const FrozenOracle oracle(config.oracle, stats.freeze(), config.params);
      const auto curve = band_curve(config.probes, config.alpha, oracle,
                                    config.domain, config.side);
      for (std::size_t p = 0; p < curve.size(); ++p) {
        const double truth = gen.truth().at_grid(p);
        const double margin =
            std::max(curve[p].lower - truth, truth - curve[p].upper);
        worst = std::max(worst, margin);
        if (margin > kCoverageGrace && !failed) {
          failed = true;
          ++report.failures;
          if (report.examples.size() < 16)
            report.examples.push_back({i, t, curve[p].value, truth,
                                       curve[p].lower, curve[p].upper});
        }
      }
    }
    report.worst_margins.push_back(worst);
  }
  return report;
}

// --- pointwise coverage harness -------------------------------------------------------

void PointwiseCoverageConfig::validate() const {
  generator.validate();
  if (!std::isfinite(rho)) throw std::invalid_argument("rho must be finite");
  if (std::isnan(delta) || delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("delta must lie in (0, 1)");
  if (num_seeds == 0) throw std::invalid_argument("need at least one seed");
}

double PointwiseCoverageReport::failure_fraction() const {
  if (num_seeds == 0) return 0.0;
  return static_cast<double>(failures) / static_cast<double>(num_seeds);
}

double PointwiseCoverageReport::median_final_width() const {
  if (final_widths.empty())
    throw std::logic_error("no widths recorded");
  std::vector<double> widths = final_widths;
  const std::size_t mid = widths.size() / 2;
  std::nth_element(widths.begin(), widths.begin() + mid, widths.end());
  return widths[mid];
}

namespace {

// One side's incrementally maintained statistics at a fixed cut, mirroring
// what FrozenTailStats::SideView reports for that cut after a freeze.
struct RunningSide {
  std::uint64_t side_count = 0;
  double sum_y = 0.0;
  double sum_y_sq = 0.0;
  LogApproxBuckets buckets;

  void add(double y, bool on_side) {
    if (on_side) ++side_count;
    sum_y += y;
    sum_y_sq += y * y;
    buckets.add(y);
  }

  FrozenTailStats::SideView view(std::uint64_t t,
                                 std::vector<std::int64_t>* keys,
                                 std::vector<BucketCell>* cells) const {
    keys->clear();
    cells->clear();
    for (const auto& [key, cell] : buckets.cells()) {
      keys->push_back(key);
      cells->push_back(cell);
    }
    FrozenTailStats::SideView side;
    side.t = t;
    side.side_count = side_count;
    side.zero_y_count = buckets.zero_count();
    side.sum_y = sum_y;
    side.sum_y_sq = sum_y_sq;
    side.granularity = buckets.granularity();
    side.keys = {keys->data(), keys->size()};
    side.cells = {cells->data(), cells->size()};
    return side;
  }
};

}  // namespace

PointwiseCoverageReport pointwise_coverage_mc(
    const PointwiseCoverageConfig& config) {
  config.validate();
  PointwiseCoverageReport report;
  report.num_seeds = config.num_seeds;
  report.final_widths.reserve(config.num_seeds);
  const double threshold = std::log(1.0 / config.delta);
  const double rho = config.rho;
  const bool needs_buckets = config.oracle == OracleKind::ddrm;
  std::vector<std::int64_t> keys;
  std::vector<BucketCell> cells;
  for (std::uint64_t i = 0; i < config.num_seeds; ++i) {
    GeneratorConfig gc = config.generator;
    gc.seed = config.generator.seed + i;
    Generator gen(gc);
    gen.truth().attach_grid({rho});
    WeightedStreamStats stats;
    RunningSide head;
    RunningSide tail;
    bool failed = false;
    for (std::uint64_t t = 1; t <= gc.horizon; ++t) {
      const auto step = gen.step();
      const double w = step.first;
      const double x = step.second;
      stats.update(w, x);
      const bool in_head = x <= rho;
      const double y_head = in_head ? w : 0.0;
      const double y_tail = in_head ? 0.0 : w;
      if (needs_buckets) {
        head.add(y_head, in_head);
        tail.add(y_tail, !in_head);
      } else {
        if (in_head) ++head.side_count; else ++tail.side_count;
        head.sum_y += y_head;
        head.sum_y_sq += y_head * y_head;
        tail.sum_y += y_tail;
        tail.sum_y_sq += y_tail * y_tail;
      }
      if (failed) continue;
      const double truth = gen.truth().at_grid(0);
      // Exclusion predicates, transliterated from the frozen oracle but fed
      // by the running side statistics so every step is tested in O(1).
      const double td = static_cast<double>(t);
      bool lower_violation = false;
      if (truth < 1.0) {
        switch (config.oracle) {
          case OracleKind::bernoulli:
            if (head.side_count > 0) {
              lower_violation =
                  truth == 0.0 ||
                  wealth::bernoulli_log_wealth(head.side_count, t, truth,
                                               config.params.prior_b) >=
                      threshold;
            }
            break;
          case OracleKind::subgaussian: {
            const double qhat =
                static_cast<double>(tail.side_count) / td;
            const double p = 1.0 - truth;
            lower_violation =
                p - qhat -
                    wealth::subgaussian_boundary(t, p, config.params.tau,
                                                 config.delta) /
                        td >
                0.0;
            break;
          }
          case OracleKind::empirical_bernstein:
            lower_violation =
                wealth::empbern_log_wealth(t, head.sum_y, head.sum_y_sq,
                                           config.params.tau, truth) >=
                threshold;
            break;
          case OracleKind::ddrm: {
            const auto head_view = head.view(t, &keys, &cells);
            const wealth::DdrmWealth head_wealth(head_view,
                                                 config.params.grid);
            lower_violation = head_wealth.rejects(truth, threshold);
            break;
          }
        }
      }
      bool upper_violation = false;
      if (!lower_violation && truth > 0.0) {
        const double complement = 1.0 - truth;
        switch (config.oracle) {
          case OracleKind::bernoulli:
            if (tail.side_count > 0) {
              upper_violation =
                  complement <= 0.0 ||
                  wealth::bernoulli_log_wealth(tail.side_count, t, complement,
                                               config.params.prior_b) >=
                      threshold;
            }
            break;
          case OracleKind::subgaussian: {
            const double qhat =
                static_cast<double>(head.side_count) / td;
            upper_violation =
                truth - qhat -
                    wealth::subgaussian_boundary(t, truth, config.params.tau,
                                                 config.delta) /
                        td >
                0.0;
            break;
          }
          case OracleKind::empirical_bernstein:
            upper_violation =
                wealth::empbern_log_wealth(t, tail.sum_y, tail.sum_y_sq,
                                           config.params.tau, complement) >=
                threshold;
            break;
          case OracleKind::ddrm: {
            const auto tail_view = tail.view(t, &keys, &cells);
            const wealth::DdrmWealth tail_wealth(tail_view,
                                                 config.params.grid);
            upper_violation = tail_wealth.rejects(complement, threshold);
            break;
          }
        }
      }
      if (lower_violation || upper_violation) {
        failed = true;
        ++report.failures;
      }
    }
    const FrozenOracle oracle(config.oracle, stats.freeze(), config.params);
    report.final_widths.push_back(oracle.upper(rho, config.delta) -
                                  oracle.lower(rho, config.delta));
  }
  return report;
}

}  // namespace cdfband
