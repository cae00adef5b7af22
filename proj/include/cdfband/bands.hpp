#pragma once

// Simultaneously time- and value-uniform CDF bands.  A pointwise oracle gives
// an anytime-valid confidence bound at one fixed probe; these routines spread
// a total error budget over a countable family of grid probes (dyadic depths
// on the unit interval, or an integer lattice per depth on the real line) and
// take the running envelope over the probes actually consulted.  Early
// termination is sound: past the stopping depth the remaining probes share the
// same distinct-value cut and strictly smaller budgets, so they cannot tighten
// the envelope.

#include <cstdint>
#include <vector>

#include "cdfband/oracles.hpp"

namespace cdfband {

// Grid refinement policy.  Depth d uses spacing eta^-d; max_depth is a hard
// stop that is unreachable in practice because the floating-point saturation
// guard exits once the spacing drops below the probe's representable
// resolution.
struct DepthSchedule {
  int eta = 2;
  int max_depth = 1200;

  void validate() const;          // eta >= 2, max_depth >= 1
  double cells(int depth) const;  // eta^depth
  double spacing(int depth) const;
  // Per-probe budget on the unit interval: alpha / eta^(2 depth); the family
  // total over all depths and cells is alpha exactly when eta = 2.
  double unit_budget(double alpha, int depth) const;
  // Per-probe budget on the real line for lattice index k:
  // (alpha / 2^depth) * 3 / ((pi^2 - 3) (1 + |k|)^2); sums to alpha over
  // depth >= 1, k in Z.
  double line_budget(double alpha, int depth, double k) const;
};

struct SideOptions {
  DepthSchedule schedule{};
  // Keep refining this many depths past the stopping rule (diagnostics; the
  // envelope provably cannot change).
  int extra_depths = 0;
};

// Ledger for one band-side evaluation.
struct SideReport {
  int depth_terminated = 0;  // depth at which the stopping rule fired (0 = none)
  int depth_used = 0;        // depth whose oracle value is the envelope
  int depth_reached = 0;     // deepest grid level entered
  int queries = 0;           // oracle evaluations performed
  double budget_spent = 0.0; // sum of delta over performed evaluations
};

struct BandPoint {
  double value = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  int depth = 0;  // deepest grid level consulted across both sides
  OracleKind kind = OracleKind::bernoulli;
};

// One half of the reference measure's discrete part: an atom location and its
// probability mass.
struct Atom {
  double value = 0.0;
  double mass = 0.0;
};

// Discrete atoms sorted by nonincreasing mass; the continuous remainder gets
// 1 - sum(mass) of the budget.
struct AtomSpec {
  std::vector<Atom> atoms;

  void validate() const;
  double total_mass() const;
  double continuous_mass() const { return 1.0 - total_mass(); }
};

struct AtomBandReport {
  SideReport upper_side;
  SideReport lower_side;
  int upper_atom_queries = 0;
  int lower_atom_queries = 0;
  double budget_spent = 0.0;  // across both sides, continuous and atoms
};

// Unit-interval bounds (Algorithm: ceil/floor dyadic refinement with per-cell
// budget alpha / eta^(2d)).  upper returns 1 for v > 1 and clamps v to [0,1];
// lower returns 0 for v < 0.  alpha >= 1 yields the trivial bound.
double upper_unit(double v, double alpha, const PointwiseOracle& oracle,
                  const SideOptions& opts = {}, SideReport* report = nullptr);
double lower_unit(double v, double alpha, const PointwiseOracle& oracle,
                  const SideOptions& opts = {}, SideReport* report = nullptr);

// Real-line bounds over the lattice {k eta^-d}: budget decays in both depth
// and |k|, and the probe is shifted toward the origin whenever that leaves
// the empirical counts between v and the probe unchanged.
double upper_real_line(double v, double alpha, const PointwiseOracle& oracle,
                       const SideOptions& opts = {},
                       SideReport* report = nullptr);
double lower_real_line(double v, double alpha, const PointwiseOracle& oracle,
                       const SideOptions& opts = {},
                       SideReport* report = nullptr);

enum class Domain { unit, real_line };

// Two-sided point at joint level 1 - alpha (alpha/2 per side).
BandPoint band_point(double v, double alpha, const PointwiseOracle& oracle,
                     Domain domain = Domain::unit, const SideOptions& opts = {});

// Two-sided unit-interval point with discrete atoms: the continuous part runs
// at (1 - sum mass) of the side budget and each atom on the bounding side of v
// contributes a pointwise query at mass * side budget, scanned in
// nonincreasing-mass order until no empirical counts remain between v and the
// last atom.
BandPoint band_with_atoms(double v, double alpha, const PointwiseOracle& oracle,
                          const AtomSpec& atoms, const SideOptions& opts = {},
                          AtomBandReport* report = nullptr);

// Monotone repair: suffix-min on uppers, prefix-max on lowers.  Never widens
// any point; input must be sorted by value.
std::vector<BandPoint> monotonize(std::vector<BandPoint> points);

// Evaluates both sides at every grid value against one frozen snapshot and
// monotonizes.  Half of alpha is spent on each side family, so the curve is
// simultaneously valid at level 1 - alpha over all times and values.
std::vector<BandPoint> band_curve(const std::vector<double>& grid, double alpha,
                                  const PointwiseOracle& oracle,
                                  Domain domain = Domain::unit,
                                  const SideOptions& opts = {});

}  // namespace cdfband
