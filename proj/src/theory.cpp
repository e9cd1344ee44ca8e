#include "flock/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flock/errors.hpp"
#include "flock/graph.hpp"
#include "flock/special_functions.hpp"

namespace flock {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void ModelParams::validate(Mode mode) const {
  if (k < 2) throw std::invalid_argument("ModelParams: k must be >= 2");
  if (!(K > 0.0)) throw std::invalid_argument("ModelParams: K must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("ModelParams: alpha must be nonnegative");
  if (!(nu > 0.0)) throw std::invalid_argument("ModelParams: nu must be positive");
  if (mode == Mode::Discrete && !(h > 0.0))
    throw std::invalid_argument("ModelParams: h must be positive in discrete mode");
}

InitialQuantities initial_quantities_from_norms(double x_dis, double v_dis,
                                                const ModelParams& p) {
  if (x_dis < 0.0 || v_dis < 0.0)
    throw std::invalid_argument("initial_quantities: dissimilarities must be nonnegative");
  const double kK = p.k * p.K;

  InitialQuantities q;
  q.vel_coef = 2.0 * kSqrt2 / kK * v_dis;
  q.pos_coef = 1.0 + kSqrt2 * x_dis;

  if (p.alpha < 1.0) {
    q.regime = AlphaRegime::Below1;
    q.dispersion_ceiling = std::max(std::pow(2.0 * q.vel_coef, 1.0 / (1.0 - p.alpha)),
                                    2.0 * q.pos_coef);
  } else if (p.alpha == 1.0) {
    q.regime = AlphaRegime::Equal1;
    if (q.vel_coef >= 1.0) {
      std::ostringstream msg;
      msg << "initial_quantities: alpha = 1 requires the velocity dissimilarity below "
          << kK / (2.0 * kSqrt2) << " (got " << v_dis << ")";
      throw hypothesis_error(msg.str());
    }
    q.dispersion_ceiling = q.pos_coef / (1.0 - q.vel_coef);
  } else {
    q.regime = AlphaRegime::Above1;
    q.dispersion_ceiling = p.alpha / (p.alpha - 1.0) * q.pos_coef;
  }

  q.dispersion_bound = (q.dispersion_ceiling - 1.0) / kSqrt2;
  q.noise_tolerance =
      std::pow(2.0, -p.alpha - 1.0) * kK / std::pow(q.dispersion_ceiling, p.alpha);
  return q;
}

InitialQuantities initial_quantities(const AgentVector& x0, const AgentVector& v0,
                                     const ModelParams& p) {
  if (x0.size() != v0.size())
    throw std::invalid_argument("initial_quantities: positions/velocities size mismatch");
  if (static_cast<int>(x0.size()) != p.k)
    throw std::invalid_argument("initial_quantities: state size does not match k");
  return initial_quantities_from_norms(dissimilarity(x0), dissimilarity(v0), p);
}

double max_step_size(const InitialQuantities& q, const ModelParams& p, double v0_norm) {
  const double first = 1.0 / laplacian_norm_bound(p.k, p.K);
  if (p.alpha == 0.0 || v0_norm <= 0.0) return first;
  const double second = 1.0 / (2.0 * kSqrt2 * v0_norm) *
                        std::pow(p.k * p.K / (2.0 * q.noise_tolerance), 1.0 / p.alpha);
  return std::min(first, second);
}

HypothesisReport hypothesis_check(const InitialQuantities& q, const ModelParams& p, Mode mode,
                                  RateVariant variant) {
  HypothesisReport rep;
  switch (q.regime) {
    case AlphaRegime::Below1:
      rep.satisfied = true;
      rep.lhs = rep.rhs = std::numeric_limits<double>::quiet_NaN();
      rep.description = "alpha < 1: unconditional";
      return rep;
    case AlphaRegime::Equal1:
      rep.lhs = q.vel_coef;
      rep.rhs = 1.0;
      rep.satisfied = rep.lhs < rep.rhs;
      rep.description = "alpha = 1: requires 2 sqrt(2) ||v(0)|| / (kK) < 1";
      return rep;
    case AlphaRegime::Above1: {
      const double a = q.vel_coef;
      double lhs;
      if (a == 0.0) {
        lhs = kInf;
      } else if (mode == Mode::Continuous && variant == RateVariant::Paper) {
        lhs = std::pow(p.alpha / a, 1.0 / (p.alpha - 1.0)) * (p.alpha - 1.0) / p.alpha;
      } else {
        lhs = std::pow(1.0 / (p.alpha * a), 1.0 / (p.alpha - 1.0)) * (p.alpha - 1.0) / p.alpha;
      }
      double rhs = q.pos_coef;
      if (mode == Mode::Discrete) rhs += 2.0 * p.k * p.K * p.h * a;
      rep.lhs = lhs;
      rep.rhs = rhs;
      rep.satisfied = lhs > rhs;
      rep.description = mode == Mode::Discrete
                            ? "alpha > 1: critical-point value must exceed b + 2 kK h a"
                            : "alpha > 1: critical-point value must exceed b";
      return rep;
    }
  }
  throw std::logic_error("hypothesis_check: unreachable");
}

double alignment_horizon(const InitialQuantities& q, const ModelParams& p, double v0_norm,
                         Mode mode, RateVariant variant) {
  if (!(p.nu < v0_norm))
    throw std::invalid_argument("alignment_horizon: requires nu < ||v(0)||");
  const double log_ratio = std::log(v0_norm / p.nu);
  const double ualpha = std::pow(q.dispersion_ceiling, p.alpha);
  if (mode == Mode::Discrete) return 2.0 * ualpha / (p.h * p.k * p.K) * log_ratio;
  const double rate = contraction_factor(q, p, Mode::Continuous, variant);
  return log_ratio / rate;
}

double contraction_factor(const InitialQuantities& q, const ModelParams& p, Mode mode,
                          RateVariant variant) {
  const double ualpha = std::pow(q.dispersion_ceiling, p.alpha);
  if (mode == Mode::Continuous) {
    const double rate = p.k * p.K / ualpha;
    return variant == RateVariant::Paper ? rate : 0.5 * rate;
  }
  const double factor = 1.0 - p.h * p.k * p.K / (2.0 * ualpha);
  if (!(factor > 0.0 && factor < 1.0)) {
    std::ostringstream msg;
    msg << "contraction_factor: 1 - h kK / (2 U0^alpha) = " << factor
        << " falls outside (0, 1); reduce the step size";
    throw hypothesis_error(msg.str());
  }
  return factor;
}

namespace {

ProbBound bound_from_log(double log_value) {
  ProbBound b;
  if (log_value > 0.0) log_value = 0.0;
  b.log_value = log_value;
  b.value = std::exp(log_value);
  b.deficit = -std::expm1(log_value);
  return b;
}

}  // namespace

ProbBound prob_bound_uniform(const InitialQuantities& q, const ModelParams& p, double r,
                             double T0_steps) {
  if (!(r > 0.0)) throw std::invalid_argument("prob_bound_uniform: r must be positive");
  if (T0_steps < 0.0)
    throw std::invalid_argument("prob_bound_uniform: horizon must be nonnegative");
  const double eps = q.noise_tolerance * p.nu;
  if (r <= eps || T0_steps == 0.0) return bound_from_log(0.0);
  return bound_from_log(3.0 * p.k * T0_steps * std::log(eps / r));
}

double chi_tail(double eps, double sigma, int k, ChiVariant variant) {
  if (eps < 0.0) throw std::invalid_argument("chi_tail: eps must be nonnegative");
  if (!(sigma > 0.0)) throw std::invalid_argument("chi_tail: sigma must be positive");
  if (k < 2) throw std::invalid_argument("chi_tail: k must be >= 2");
  const double order = (3.0 * k - 3.0) / 2.0;
  const double x = variant == ChiVariant::Paper ? std::sqrt(eps / (2.0 * sigma))
                                                : eps * eps / (2.0 * sigma * sigma);
  return gamma_p(order, x);
}

ProbBound prob_bound_gaussian(const InitialQuantities& q, const ModelParams& p, double sigma,
                              double T0_steps, ChiVariant variant) {
  if (!(sigma > 0.0)) throw std::invalid_argument("prob_bound_gaussian: sigma must be positive");
  if (T0_steps < 0.0)
    throw std::invalid_argument("prob_bound_gaussian: horizon must be nonnegative");
  if (T0_steps == 0.0) return bound_from_log(0.0);
  const double eps = q.noise_tolerance * p.nu;
  const double order = (3.0 * p.k - 3.0) / 2.0;
  const double x = variant == ChiVariant::Paper ? std::sqrt(eps / (2.0 * sigma))
                                                : eps * eps / (2.0 * sigma * sigma);
  // log(P) through log1p(-Q) stays accurate when P is within roundoff of 1.
  const double tail = gamma_q(order, x);
  return bound_from_log(T0_steps * std::log1p(-tail));
}

double davies_bound(double x, double sigma, double T, double delta,
                    const KernelSpec& kernel) {
  if (!(x >= 0.0) || !(sigma > 0.0) || !(T > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("davies_bound: arguments must be positive");
  const double u = x / sigma;
  const double crossings = T * sigma * kernel.psi_dot_l2 / (delta * kSqrt2Pi);
  const double b = 2.0 * (crossings * normal_pdf(u) + normal_cdf_complement(u));
  return std::clamp(b, 0.0, 1.0);
}

ProbBound prob_bound_continuous(const InitialQuantities& q, const ModelParams& p,
                                double sigma, double delta, const KernelSpec& kernel,
                                double T0) {
  if (!(sigma > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("prob_bound_continuous: sigma and delta must be positive");
  if (T0 < 0.0) throw std::invalid_argument("prob_bound_continuous: horizon must be nonnegative");
  const double u = p.nu * q.noise_tolerance / (sigma * std::sqrt(3.0 * p.k));
  // brace = 2 Phi(u) - c phi(u) - 1; its complement 2(1-Phi) + c phi is the
  // numerically safe side when u is large.
  const double c = 2.0 * T0 * sigma * kernel.psi_dot_l2 / (delta * kSqrt2Pi);
  const double brace_deficit = 2.0 * normal_cdf_complement(u) + c * normal_pdf(u);
  if (brace_deficit >= 1.0) {
    ProbBound b;
    b.value = 0.0;
    b.log_value = -kInf;
    b.deficit = 1.0;
    return b;
  }
  return bound_from_log(3.0 * p.k * std::log1p(-brace_deficit));
}

double positive_root(double c1, double c2, double s, double q_exp) {
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("positive_root: coefficients must be positive");
  if (!(s > q_exp) || !(q_exp > 0.0))
    throw std::invalid_argument("positive_root: requires s > q > 0");

  const auto F = [&](double z) { return std::pow(z, s) - c1 * std::pow(z, q_exp) - c2; };
  double hi = std::max(std::pow(2.0 * c1, 1.0 / (s - q_exp)), std::pow(2.0 * c2, 1.0 / s)) + 1.0;
  double lo = 0.0;
  if (!(F(hi) >= 0.0)) throw numerical_error("positive_root: bracketing bound failed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace flock
