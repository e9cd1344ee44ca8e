#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "flock/core.hpp"
#include "flock/rng.hpp"

namespace flock {

// A mollifier: nonnegative, C^1, supported in [-1/2, 1/2], unit mass.
// Carries its L2 norms since they enter every variance formula.
struct KernelSpec {
  std::function<double(double)> psi;      // kernel value
  std::function<double(double)> psi_dot;  // kernel derivative
  std::function<double(double)> psi_cdf;  // integral of psi over (-inf, u]
  double psi_l2 = 0.0;                    // L2 norm of psi
  double psi_dot_l2 = 0.0;                // L2 norm of psi_dot
  bool unit_mass = false;

  /// Raised-cosine kernel 2 cos^2(pi x) on [-1/2, 1/2]. Closed-form
  /// derivative, CDF, and norms (||psi||^2 = 3/2, ||psi_dot||^2 = 2 pi^2).
  static KernelSpec raised_cosine();

  /// Builds a spec from psi and its derivative; norms and CDF are computed
  /// by quadrature. Throws if psi fails the mollifier requirements.
  static KernelSpec from_functions(std::function<double(double)> psi,
                                   std::function<double(double)> psi_dot);

  /// Checks unit mass (1e-10 by quadrature), nonnegativity, and vanishing
  /// at the support boundary.
  void validate() const;
};

KernelSpec default_kernel();

enum class NoiseKind { None, UniformBall, GaussianIID, SmoothedWiener };

struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double r = 0.0;       // ball radius
  double sigma = 0.0;   // per-coordinate standard deviation
  double delta = 0.0;   // decorrelation window of the smoothed process
  double dt_w = 0.0;    // Wiener grid step (0 selects delta / 128)
  KernelSpec kernel;

  static NoiseModel none();
  static NoiseModel uniform_ball(double r);
  static NoiseModel gaussian(double sigma);
  static NoiseModel smoothed_wiener(double sigma, double delta, double dt_w = 0.0,
                                    KernelSpec kernel = default_kernel());

  double grid_step() const;  // resolved dt_w
};

/// Uniform point in the closed ball of radius r in R^dim (Gaussian
/// direction, radius r * U^(1/dim)).
std::vector<double> sample_uniform_ball(int dim, double r, Rng& rng);

/// dim independent N(0, sigma^2) draws.
std::vector<double> sample_gaussian_iid(int dim, double sigma, Rng& rng);

// One scalar coordinate of the smoothed-Wiener noise: a frozen grid of
// Wiener increments over [-delta/2, T + delta/2] plus the kernel, so the
// process and its derivative can be evaluated at any t in [0, T].
// Immutable after construction; safe to read from many threads.
class SmoothedWienerPath {
 public:
  SmoothedWienerPath(double T, double delta, double dt_w, double sigma,
                     KernelSpec kernel, Rng& rng_main, Rng& rng_pre);

  /// Noise value e(t): sigma sqrt(delta) / ||psi|| times the discretized
  /// stochastic integral sum_j psi_delta(t - s_j) dW_j. Stationary with
  /// Var(e) = sigma^2.
  double eval(double t) const;

  /// Raw mollified derivative X(t) = sum_j psi_delta(t - s_j) dW_j,
  /// Var(X) = ||psi||^2 / delta.
  double eval_unscaled(double t) const;

  /// Exact time derivative of eval.
  double eval_deriv(double t) const;

  /// Smoothed Wiener path value whose exact derivative is eval_unscaled.
  double smoothed(double t) const;

  /// Reconstructed Wiener path at t (grid-linear), anchored at W(0) = 0.
  double wiener(double t) const;

  double t_max() const { return t_max_; }
  double delta() const { return delta_; }
  double sigma() const { return sigma_; }
  double grid_step() const { return dt_w_; }
  const std::vector<double>& increments() const { return dw_; }
  double grid_time(std::size_t j) const;

 private:
  double delta_ = 0.0;
  double sigma_ = 0.0;
  double dt_w_ = 0.0;
  double t_max_ = 0.0;
  double s0_ = 0.0;        // first grid time (= -n_pre * dt_w)
  std::size_t n_pre_ = 0;  // cells before t = 0
  KernelSpec kernel_;
  std::vector<double> dw_;  // increment over [s_j, s_{j+1})
  std::vector<double> w_;   // path values at grid times, w_[n_pre_] = 0

  void check_time(double t) const;
  std::pair<std::size_t, std::size_t> support_cells(double t) const;
};

/// Builds one noise coordinate. The pre-history (t < 0) increments come
/// from an independent stream. Requires dt_w <= delta / 64.
SmoothedWienerPath build_wiener_path(double T, double delta, double dt_w, double sigma,
                                     const KernelSpec& kernel, Rng& rng_main,
                                     Rng& rng_pre);

/// Builds the 3k coordinate paths of one trial; path 3*i + l drives
/// coordinate l of agent i.
std::vector<SmoothedWienerPath> build_noise_paths(const NoiseModel& model, int k, double T,
                                                  std::uint64_t master_seed,
                                                  std::uint64_t trial);

/// Assembles the full noise vector at time t. None gives zeros; discrete
/// models draw from rng; SmoothedWiener reads the 3k supplied paths.
AgentVector sample_noise_vector(const NoiseModel& model, int k, double t,
                                const std::vector<SmoothedWienerPath>& paths, Rng& rng);

/// Dumps one path on a dt grid: columns t, W, Wdelta, Xdelta.
void write_path_csv(const SmoothedWienerPath& path, double dt, std::ostream& os);

}  // namespace flock
