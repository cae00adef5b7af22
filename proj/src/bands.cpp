#include "cdfband/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cdfband {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
// Once |v| * eta^d reaches 2^53 the grid spacing is below the representable
// resolution at v; stopping there keeps every probe and lattice index exact.
constexpr double kMaxExact = 9007199254740992.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_side_args(double v, double alpha, const PointwiseOracle& oracle,
                     const SideOptions& opts) {
  opts.schedule.validate();
  if (opts.extra_depths < 0)
    throw std::invalid_argument("band: extra_depths must be >= 0");
  if (std::isnan(v)) throw std::invalid_argument("band: probe value is NaN");
  if (std::isnan(alpha) || alpha <= 0.0)
    throw std::invalid_argument("band: alpha must be positive");
  if (oracle.time() == 0) throw std::invalid_argument("band: empty stream");
}

// Shared stopping-rule bookkeeping: record the first depth with an empty gap
// and keep going for the requested number of extra depths.
struct StopRule {
  int extra = 0;
  bool stop(SideReport* rep, int depth, bool gap_empty) {
    if (!gap_empty) return false;
    if (rep->depth_terminated == 0) rep->depth_terminated = depth;
    if (extra == 0) return true;
    --extra;
    return false;
  }
};

}  // namespace

void DepthSchedule::validate() const {
  if (eta < 2) throw std::invalid_argument("DepthSchedule: eta must be >= 2");
  if (max_depth < 1)
    throw std::invalid_argument("DepthSchedule: max_depth must be >= 1");
}

double DepthSchedule::cells(int depth) const {
  return std::pow(static_cast<double>(eta), depth);
}

double DepthSchedule::spacing(int depth) const {
  return std::pow(static_cast<double>(eta), -depth);
}

double DepthSchedule::unit_budget(double alpha, int depth) const {
  const double c = cells(depth);
  return alpha / (c * c);
}

double DepthSchedule::line_budget(double alpha, int depth, double k) const {
  const double a = 1.0 + std::abs(k);
  return alpha * std::ldexp(1.0, -depth) * (3.0 / ((kPi * kPi - 3.0) * a * a));
}

double upper_unit(double v, double alpha, const PointwiseOracle& oracle,
                  const SideOptions& opts, SideReport* report) {
  check_side_args(v, alpha, oracle, opts);
  SideReport rep;
  double u = 1.0;
  if (v > 1.0 || alpha >= 1.0) {
    if (report) *report = rep;
    return u;
  }
  v = std::max(0.0, v);
  const double eta = opts.schedule.eta;
  double scale = 1.0;
  StopRule rule{opts.extra_depths};
  for (int d = 1; d <= opts.schedule.max_depth; ++d) {
    scale *= eta;
    if (!(v * scale < kMaxExact)) break;  // grid finer than fp resolution at v
    rep.depth_reached = d;
    double rho = std::ceil(v * scale) / scale;
    rho = std::clamp(rho, v, 1.0);
    const double delta = alpha / (scale * scale);
    if (delta > 0.0) {
      const double cand = oracle.upper(rho, delta);
      ++rep.queries;
      rep.budget_spent += delta;
      if (cand < u) {
        u = cand;
        rep.depth_used = d;
      }
    }
    if (rule.stop(&rep, d, oracle.count_open_closed(v, rho) == 0)) break;
  }
  if (report) *report = rep;
  return u;
}

double lower_unit(double v, double alpha, const PointwiseOracle& oracle,
                  const SideOptions& opts, SideReport* report) {
  check_side_args(v, alpha, oracle, opts);
  SideReport rep;
  double l = 0.0;
  if (v < 0.0 || alpha >= 1.0) {
    if (report) *report = rep;
    return l;
  }
  v = std::min(v, 1.0);
  const double eta = opts.schedule.eta;
  double scale = 1.0;
  StopRule rule{opts.extra_depths};
  for (int d = 1; d <= opts.schedule.max_depth; ++d) {
    scale *= eta;
    if (!(v * scale < kMaxExact)) break;
    rep.depth_reached = d;
    double rho = std::floor(v * scale) / scale;
    rho = std::clamp(rho, 0.0, v);
    const double delta = alpha / (scale * scale);
    if (delta > 0.0) {
      const double cand = oracle.lower(rho, delta);
      ++rep.queries;
      rep.budget_spent += delta;
      if (cand > l) {
        l = cand;
        rep.depth_used = d;
      }
    }
    if (rule.stop(&rep, d, oracle.count_closed_open(rho, v) == 0)) break;
  }
  if (report) *report = rep;
  return l;
}

double upper_real_line(double v, double alpha, const PointwiseOracle& oracle,
                       const SideOptions& opts, SideReport* report) {
  check_side_args(v, alpha, oracle, opts);
  SideReport rep;
  double u = 1.0;
  if (alpha >= 1.0) {
    if (report) *report = rep;
    return u;
  }
  const double eta = opts.schedule.eta;
  double scale = 1.0;
  StopRule rule{opts.extra_depths};
  for (int d = 1; d <= opts.schedule.max_depth; ++d) {
    scale *= eta;
    if (!(std::abs(v) * scale < kMaxExact)) break;
    rep.depth_reached = d;
    double k = std::ceil(v * scale);
    if (k < 0.0) {
      // Shift toward the origin while the counts in (v, probe] are unchanged,
      // i.e. stop strictly short of the first sample above the raw probe.
      const double above = oracle.next_sample_above(k / scale);
      if (above > 0.0) {
        k = 0.0;
      } else {
        const double shifted = std::min(0.0, std::ceil(above * scale) - 1.0);
        k = std::max(k, shifted);
      }
    }
    const double rho = std::max(k / scale, v);
    const double delta = opts.schedule.line_budget(alpha, d, k);
    if (delta > 0.0) {
      const double cand = oracle.upper(rho, delta);
      ++rep.queries;
      rep.budget_spent += delta;
      if (cand < u) {
        u = cand;
        rep.depth_used = d;
      }
    }
    if (rule.stop(&rep, d, oracle.count_open_closed(v, rho) == 0)) break;
  }
  if (report) *report = rep;
  return u;
}

double lower_real_line(double v, double alpha, const PointwiseOracle& oracle,
                       const SideOptions& opts, SideReport* report) {
  check_side_args(v, alpha, oracle, opts);
  SideReport rep;
  double l = 0.0;
  if (alpha >= 1.0) {
    if (report) *report = rep;
    return l;
  }
  const double eta = opts.schedule.eta;
  double scale = 1.0;
  StopRule rule{opts.extra_depths};
  for (int d = 1; d <= opts.schedule.max_depth; ++d) {
    scale *= eta;
    if (!(std::abs(v) * scale < kMaxExact)) break;
    rep.depth_reached = d;
    double k = std::floor(v * scale);
    if (k > 0.0) {
      // Mirror shift: stop strictly short of the last sample below the raw
      // probe so the counts in [probe, v) are unchanged.
      const double below = oracle.prev_sample_below(k / scale);
      if (below < 0.0) {
        k = 0.0;
      } else {
        const double shifted = std::max(0.0, std::floor(below * scale) + 1.0);
        k = std::min(k, shifted);
      }
    }
    const double rho = std::min(k / scale, v);
    const double delta = opts.schedule.line_budget(alpha, d, k);
    if (delta > 0.0) {
      const double cand = oracle.lower(rho, delta);
      ++rep.queries;
      rep.budget_spent += delta;
      if (cand > l) {
        l = cand;
        rep.depth_used = d;
      }
    }
    if (rule.stop(&rep, d, oracle.count_closed_open(rho, v) == 0)) break;
  }
  if (report) *report = rep;
  return l;
}

BandPoint band_point(double v, double alpha, const PointwiseOracle& oracle,
                     Domain domain, const SideOptions& opts) {
  check_side_args(v, alpha, oracle, opts);
  BandPoint point;
  point.value = v;
  point.kind = oracle.kind();
  if (alpha >= 1.0) return point;  // vacuous level: trivial band
  const double half = 0.5 * alpha;
  SideReport up, lo;
  if (domain == Domain::unit) {
    point.upper = upper_unit(v, half, oracle, opts, &up);
    point.lower = lower_unit(v, half, oracle, opts, &lo);
  } else {
    point.upper = upper_real_line(v, half, oracle, opts, &up);
    point.lower = lower_real_line(v, half, oracle, opts, &lo);
  }
  point.depth = std::max(up.depth_terminated, lo.depth_terminated);
  return point;
}

void AtomSpec::validate() const {
  double sum = 0.0;
  double prev = kInf;
  for (const Atom& atom : atoms) {
    if (std::isnan(atom.value))
      throw std::invalid_argument("AtomSpec: atom value is NaN");
    if (!(atom.mass > 0.0))
      throw std::invalid_argument("AtomSpec: atom mass must be positive");
    if (atom.mass > prev)
      throw std::invalid_argument("AtomSpec: atoms must be sorted by nonincreasing mass");
    prev = atom.mass;
    sum += atom.mass;
  }
  if (sum > 1.0 + 1e-12)
    throw std::invalid_argument("AtomSpec: atom masses must sum to at most 1");
}

double AtomSpec::total_mass() const {
  double sum = 0.0;
  for (const Atom& atom : atoms) sum += atom.mass;
  return std::min(sum, 1.0);
}

BandPoint band_with_atoms(double v, double alpha, const PointwiseOracle& oracle,
                          const AtomSpec& atoms, const SideOptions& opts,
                          AtomBandReport* report) {
  check_side_args(v, alpha, oracle, opts);
  atoms.validate();
  AtomBandReport rep;
  BandPoint point;
  point.value = v;
  point.kind = oracle.kind();
  if (alpha >= 1.0) {
    if (report) *report = rep;
    return point;
  }
  const double half = 0.5 * alpha;
  const double continuous = atoms.continuous_mass() * half;

  double u = 1.0;
  if (continuous > 0.0) u = upper_unit(v, continuous, oracle, opts, &rep.upper_side);
  // Atoms at or above v bound the estimand from above; scan them in
  // nonincreasing-mass order and stop once no counts separate v from the last
  // atom (farther or lighter atoms cannot tighten past that point).
  for (const Atom& atom : atoms.atoms) {
    if (atom.value < v) continue;
    const double delta = atom.mass * half;
    u = std::min(u, oracle.upper(atom.value, delta));
    ++rep.upper_atom_queries;
    rep.budget_spent += delta;
    if (oracle.count_open_closed(v, atom.value) == 0) break;
  }

  double l = 0.0;
  if (continuous > 0.0) l = lower_unit(v, continuous, oracle, opts, &rep.lower_side);
  for (const Atom& atom : atoms.atoms) {
    if (atom.value > v) continue;
    const double delta = atom.mass * half;
    l = std::max(l, oracle.lower(atom.value, delta));
    ++rep.lower_atom_queries;
    rep.budget_spent += delta;
    if (oracle.count_closed_open(atom.value, v) == 0) break;
  }

  rep.budget_spent += rep.upper_side.budget_spent + rep.lower_side.budget_spent;
  point.upper = u;
  point.lower = l;
  point.depth =
      std::max(rep.upper_side.depth_terminated, rep.lower_side.depth_terminated);
  if (report) *report = rep;
  return point;
}

std::vector<BandPoint> monotonize(std::vector<BandPoint> points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].value < points[i - 1].value)
      throw std::invalid_argument("monotonize: points must be sorted by value");
  }
  for (std::size_t i = points.size(); i-- > 1;) {
    points[i - 1].upper = std::min(points[i - 1].upper, points[i].upper);
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    points[i].lower = std::max(points[i].lower, points[i - 1].lower);
  }
  return points;
}

std::vector<BandPoint> band_curve(const std::vector<double>& grid, double alpha,
                                  const PointwiseOracle& oracle, Domain domain,
                                  const SideOptions& opts) {
  std::vector<BandPoint> points;
  points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && grid[i] < grid[i - 1])
      throw std::invalid_argument("band_curve: grid must be sorted");
    points.push_back(band_point(grid[i], alpha, oracle, domain, opts));
  }
  return monotonize(std::move(points));
}

}  // namespace cdfband
