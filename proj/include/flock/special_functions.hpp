#pragma once

namespace flock {

/// Standard normal cumulative distribution function.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_cdf_complement(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise;
/// both iterated to ~1e-15 relative accuracy.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

}  // namespace flock
