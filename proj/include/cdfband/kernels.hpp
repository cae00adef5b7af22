#pragma once

// Special-function and convex-transform kernels used by the confidence-sequence
// oracles.  Everything wealth-related is computed in log space so that mixture
// wealths far beyond double range remain representable.

namespace cdfband {

// Accuracy contract shared by the iterative kernels (series, continued
// fractions, root-finding).
struct ToleranceConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iter = 10000;

  void validate() const;  // throws std::invalid_argument on a bad config
};

// log(e^a + e^b), tolerant of -inf arguments.
double log_add_exp(double a, double b);

// log(e^a - e^b) for a >= b; -inf when the difference underflows.
double log_sub_exp(double a, double b);

// log h(lambda, z) where h(lambda, z) = (1-z)e^{-lambda z} + z e^{lambda(1-z)}
// is the moment-generating function of a centered Bernoulli(z) at bet lambda.
double log_h(double lambda, double z);

// psi_e(lambda) = -lambda - log(1 - lambda); nonnegative and convex on [0, 1).
double psi_e(double lambda);

// Kearns-Saul (1998) Bernoulli variance proxy
//   K(p) = (2p - 1) / (2 log(p / (1 - p))),
// extended by continuity to K(1/2) = 1/4.  Symmetric about 1/2, range (0, 1/4].
double kearns_saul(double p);

// Lower branch of Lambert W: the solution w <= -1 of w e^w = x on
// x in [-1/e, 0).  Initial bracket from Chatzigeorgiou (2013),
//   -1 - sqrt(2u) - u <= W_{-1}(-e^{-u-1}) <= -1 - sqrt(2u) - (2/3)u,
// refined by safeguarded Newton iteration on w + log(-w) = log(-x).
double lambert_w_m1(double x, const ToleranceConfig& tol = {});

// log Gamma(a, x), the unregularized upper incomplete gamma function.
// Continued fraction for x > a + 1, series complement otherwise.
double log_upper_inc_gamma(double a, double x, const ToleranceConfig& tol = {});

// log gamma(a, x), the unregularized lower incomplete gamma function.
double log_lower_inc_gamma(double a, double x, const ToleranceConfig& tol = {});

// log 1F1(1, b, x) for b > 1, x >= 0.  Ascending series sum_n x^n / (b)_n for
// x <= b; for x > b the identity (DLMF 13.6.5 with a = b - 1)
//   1F1(1, a+1, x) = e^x a x^{-a} (Gamma(a) - Gamma(a, x))
// is evaluated in log space.
double log_kummer_1f1_row1(double b, double x, const ToleranceConfig& tol = {});

// log of the unnormalized incomplete beta integral
//   integral_{lo}^{hi} p^{a-1} (1-p)^{b-1} dp,  0 <= lo <= hi <= 1.
// Returns -inf when the interval mass underflows.
double log_inc_beta(double lo, double hi, double a, double b,
                    const ToleranceConfig& tol = {});

// Regularized incomplete beta I_x(a, b) (the Beta(a, b) CDF), clamped to [0,1].
double reg_inc_beta(double x, double a, double b,
                    const ToleranceConfig& tol = {});

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace cdfband
