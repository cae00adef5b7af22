#pragma once

// Shared helpers for the test suites: an independent adaptive quadrature, a
// tiny deterministic RNG, and a naive log-sum-exp, all deliberately written
// from scratch so they can serve as oracles for the library implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace testutil {

// SplitMix64; independent of the library RNG on purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_step(F&& f, double a, double b, double fa, double fm,
                     double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

// log of integral_a^b exp(logf(t)) dt, with the dominant exponent scaled out
// so that sharply peaked integrands (large-parameter gamma/beta kernels) stay
// in double range.  The peak is located by a coarse scan, and the integral is
// split at the scan argmax: with the maximum at an endpoint of each piece the
// adaptive refinement cannot step over a spike narrower than the scan grid.
template <typename LogF>
double log_integrate(LogF&& logf, double a, double b, double tol = 1e-13) {
  constexpr int kScan = 512;
  double m = -std::numeric_limits<double>::infinity();
  double peak = a;
  for (int i = 0; i <= kScan; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / kScan;
    const double v = logf(t);
    if (v > m) {
      m = v;
      peak = t;
    }
  }
  if (!std::isfinite(m)) return m;
  auto f = [&](double t) {
    const double v = logf(t) - m;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  double total = 0.0;
  if (peak > a) total += integrate(f, a, peak, 0.5 * tol);
  if (peak < b) total += integrate(f, peak, b, 0.5 * tol);
  return m + std::log(total);
}

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace testutil
