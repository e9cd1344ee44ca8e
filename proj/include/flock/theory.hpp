#pragma once

#include <string>

#include "flock/core.hpp"
#include "flock/noise.hpp"

namespace flock {

enum class Mode { Discrete, Continuous };

// The continuous decay statement comes in two strengths: the headline rate
// k K / U0^alpha and the rate k K / (2 U0^alpha) that the convergence
// machinery actually delivers. Derived is the safe default for bound
// checking; Paper reproduces the headline numbers.
enum class RateVariant { Paper, Derived };

// The Gaussian tail can be integrated to sqrt(eps / (2 sigma)) (the literal
// form) or to eps^2 / (2 sigma^2) (the chi-square CDF of ||H/sigma||^2 at
// eps). Both are exposed; Standard is the default for empirical comparison.
enum class ChiVariant { Paper, Standard };

enum class AlphaRegime { Below1, Equal1, Above1 };

struct ModelParams {
  int k = 2;           // number of agents
  double K = 1.0;      // interaction strength
  double alpha = 0.0;  // distance-decay exponent
  double h = 0.0;      // discrete time step (ignored in continuous mode)
  double nu = 0.0;     // alignment threshold

  void validate(Mode mode) const;
};

// Functionals of the initial state that drive every bound:
//   vel_coef      a  = (2 sqrt(2) / kK) ||v_perp(0)||
//   pos_coef      b  = 1 + sqrt(2) ||x_perp(0)||
//   dispersion_ceiling U0: ceiling on 1 + sqrt(2) ||x_perp(t)||
//   dispersion_bound   B0 = (U0 - 1) / sqrt(2): position-dissimilarity bound
//   noise_tolerance    H0 = 2^(-alpha-1) kK / U0^alpha
struct InitialQuantities {
  double vel_coef = 0.0;
  double pos_coef = 0.0;
  double dispersion_ceiling = 0.0;
  double dispersion_bound = 0.0;
  double noise_tolerance = 0.0;
  AlphaRegime regime = AlphaRegime::Below1;
};

InitialQuantities initial_quantities(const AgentVector& x0, const AgentVector& v0,
                                     const ModelParams& p);

/// Same computation from the two dissimilarity norms directly.
InitialQuantities initial_quantities_from_norms(double x_dis, double v_dis,
                                                const ModelParams& p);

/// Largest admissible step size
///   min{ 1 / (2 (k-1) sqrt(k) K),
///        (1 / (2 sqrt(2) ||v(0)||)) (kK / (2 H0))^(1/alpha) };
/// callers must use h strictly below it. For alpha = 0 only the first term
/// applies.
double max_step_size(const InitialQuantities& q, const ModelParams& p, double v0_norm);

struct HypothesisReport {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string description;
};

/// Regime gate of the convergence theorems. alpha < 1 is unconditional;
/// alpha = 1 requires a < 1; alpha > 1 requires
/// (1/(alpha a))^(1/(alpha-1)) (alpha-1)/alpha > b [+ 2 kK h a in discrete
/// mode]. RateVariant::Paper selects the (alpha/a)^(1/(alpha-1)) variant of
/// the continuous gate.
HypothesisReport hypothesis_check(const InitialQuantities& q, const ModelParams& p,
                                  Mode mode, RateVariant variant = RateVariant::Derived);

/// Guaranteed alignment horizon: (2 U0^alpha / (h kK)) ln(||v(0)||/nu)
/// steps in discrete mode, ln(||v(0)||/nu) / rate in continuous mode with
/// the rate picked by the variant. Requires nu < v0_norm.
double alignment_horizon(const InitialQuantities& q, const ModelParams& p, double v0_norm,
                         Mode mode, RateVariant variant = RateVariant::Derived);

/// Discrete per-step contraction factor 1 - h kK / (2 U0^alpha), asserted
/// inside (0, 1); continuous decay rate per variant.
double contraction_factor(const InitialQuantities& q, const ModelParams& p, Mode mode,
                          RateVariant variant = RateVariant::Derived);

// Probability lower bounds can sit extremely close to 0 or 1, so every
// bound carries its log and its complement computed without cancellation.
struct ProbBound {
  double value = 0.0;      // clamped to [0, 1]
  double log_value = 0.0;  // log of value (-inf when value underflows)
  double deficit = 0.0;    // 1 - value, stable near 1
};

/// Ball-noise bound (H0 nu / r)^(3k T0); 1 when r <= H0 nu.
ProbBound prob_bound_uniform(const InitialQuantities& q, const ModelParams& p, double r,
                             double T0_steps);

/// P(||H_perp|| <= eps) for Gaussian noise: regularized incomplete gamma
/// of order (3k-3)/2 at the variant-dependent integration limit.
double chi_tail(double eps, double sigma, int k, ChiVariant variant = ChiVariant::Standard);

/// Gaussian-noise bound chi_tail(H0 nu, sigma, k)^T0.
ProbBound prob_bound_gaussian(const InitialQuantities& q, const ModelParams& p, double sigma,
                              double T0_steps, ChiVariant variant = ChiVariant::Standard);

/// Tail bound for the running maximum of one noise coordinate over [0, T]:
///   P(max |e| >= x) <= 2 [ (T sigma ||psi_dot|| / (delta sqrt(2 pi)))
///                          phi(x/sigma) + 1 - Phi(x/sigma) ],
/// clamped to [0, 1].
double davies_bound(double x, double sigma, double T, double delta, const KernelSpec& kernel);

/// Continuous-noise bound
///   { 2 Phi(u) - (2 T0 sigma ||psi_dot|| / (delta sqrt(2 pi))) phi(u) - 1 }^(3k),
/// u = nu H0 / (sigma sqrt(3k)); reported as 0 when the brace is
/// nonpositive.
ProbBound prob_bound_continuous(const InitialQuantities& q, const ModelParams& p,
                                double sigma, double delta, const KernelSpec& kernel,
                                double T0);

/// Unique positive root of z^s - c1 z^q - c2 (c1, c2 > 0, s > q > 0),
/// located by bisection to 1e-12 relative. Always satisfies
/// z <= max{(2 c1)^(1/(s-q)), (2 c2)^(1/s)}.
double positive_root(double c1, double c2, double s, double q_exp);

}  // namespace flock
