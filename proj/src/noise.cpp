#include "flock/noise.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "flock/errors.hpp"

namespace flock {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  // n must be even.
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

KernelSpec KernelSpec::raised_cosine() {
  KernelSpec k;
  k.psi = [](double x) {
    if (x <= -0.5 || x >= 0.5) return 0.0;
    const double c = std::cos(kPi * x);
    return 2.0 * c * c;
  };
  k.psi_dot = [](double x) {
    if (x <= -0.5 || x >= 0.5) return 0.0;
    return -2.0 * kPi * std::sin(2.0 * kPi * x);
  };
  k.psi_cdf = [](double u) {
    if (u <= -0.5) return 0.0;
    if (u >= 0.5) return 1.0;
    return u + 0.5 + std::sin(2.0 * kPi * u) / (2.0 * kPi);
  };
  k.psi_l2 = std::sqrt(1.5);
  k.psi_dot_l2 = kPi * std::sqrt(2.0);
  k.unit_mass = true;
  k.validate();
  return k;
}

KernelSpec KernelSpec::from_functions(std::function<double(double)> psi,
                                      std::function<double(double)> psi_dot) {
  KernelSpec k;
  k.psi = std::move(psi);
  k.psi_dot = std::move(psi_dot);
  const auto& p = k.psi;
  k.psi_l2 = std::sqrt(simpson([&p](double x) { return p(x) * p(x); }, -0.5, 0.5, 4096));
  const auto& pd = k.psi_dot;
  k.psi_dot_l2 =
      std::sqrt(simpson([&pd](double x) { return pd(x) * pd(x); }, -0.5, 0.5, 4096));
  k.psi_cdf = [p](double u) {
    if (u <= -0.5) return 0.0;
    if (u >= 0.5) return 1.0;
    return simpson(p, -0.5, u, 2048);
  };
  k.unit_mass = true;
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!psi || !psi_dot || !psi_cdf) throw std::invalid_argument("KernelSpec: missing functions");
  const double mass = simpson(psi, -0.5, 0.5, 4096);
  if (std::fabs(mass - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "KernelSpec: kernel mass " << mass << " differs from 1 beyond 1e-10";
    throw std::invalid_argument(msg.str());
  }
  for (int i = 0; i <= 256; ++i) {
    const double x = -0.5 + i / 256.0;
    if (psi(x) < 0.0) throw std::invalid_argument("KernelSpec: kernel takes negative values");
  }
  if (std::fabs(psi(-0.5)) > 1e-12 || std::fabs(psi(0.5)) > 1e-12)
    throw std::invalid_argument("KernelSpec: kernel must vanish at the support boundary");
}

KernelSpec default_kernel() { return KernelSpec::raised_cosine(); }

NoiseModel NoiseModel::none() { return NoiseModel{}; }

NoiseModel NoiseModel::uniform_ball(double r) {
  if (!(r > 0.0)) throw std::invalid_argument("NoiseModel: ball radius must be positive");
  NoiseModel m;
  m.kind = NoiseKind::UniformBall;
  m.r = r;
  return m;
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel: sigma must be positive");
  NoiseModel m;
  m.kind = NoiseKind::GaussianIID;
  m.sigma = sigma;
  return m;
}

NoiseModel NoiseModel::smoothed_wiener(double sigma, double delta, double dt_w,
                                       KernelSpec kernel) {
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel: sigma must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("NoiseModel: delta must be positive");
  if (dt_w < 0.0) throw std::invalid_argument("NoiseModel: dt_w must be nonnegative");
  NoiseModel m;
  m.kind = NoiseKind::SmoothedWiener;
  m.sigma = sigma;
  m.delta = delta;
  m.dt_w = dt_w;
  m.kernel = std::move(kernel);
  return m;
}

double NoiseModel::grid_step() const { return dt_w > 0.0 ? dt_w : delta / 128.0; }

std::vector<double> sample_uniform_ball(int dim, double r, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("sample_uniform_ball: dim must be >= 1");
  if (r < 0.0) throw std::invalid_argument("sample_uniform_ball: radius must be >= 0");
  std::vector<double> v(static_cast<std::size_t>(dim));
  if (r == 0.0) return v;
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& vi : v) {
      vi = rng.normal();
      n2 += vi * vi;
    }
  } while (n2 == 0.0);
  const double radius = r * std::pow(rng.uniform01(), 1.0 / dim);
  const double scale = radius / std::sqrt(n2);
  for (double& vi : v) vi *= scale;
  return v;
}

std::vector<double> sample_gaussian_iid(int dim, double sigma, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("sample_gaussian_iid: dim must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("sample_gaussian_iid: sigma must be positive");
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (double& vi : v) vi = sigma * rng.normal();
  return v;
}

SmoothedWienerPath::SmoothedWienerPath(double T, double delta, double dt_w, double sigma,
                                       KernelSpec kernel, Rng& rng_main, Rng& rng_pre)
    : delta_(delta), sigma_(sigma), dt_w_(dt_w), t_max_(T), kernel_(std::move(kernel)) {
  if (!(T > 0.0)) throw std::invalid_argument("SmoothedWienerPath: T must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("SmoothedWienerPath: delta must be positive");
  if (!(dt_w > 0.0) || dt_w > delta / 64.0 * (1.0 + 1e-12))
    throw std::invalid_argument("SmoothedWienerPath: grid step must satisfy dt_w <= delta/64");

  n_pre_ = static_cast<std::size_t>(std::ceil(0.5 * delta / dt_w - 1e-9));
  s0_ = -static_cast<double>(n_pre_) * dt_w;
  const std::size_t n_post =
      static_cast<std::size_t>(std::ceil((T + 0.5 * delta) / dt_w + 1e-9)) + 1;
  const std::size_t n_cells = n_pre_ + n_post;

  dw_.resize(n_cells);
  const double sd = std::sqrt(dt_w);
  // Increments over t < 0 come from the independent pre-history stream.
  for (std::size_t j = 0; j < n_pre_; ++j) dw_[j] = sd * rng_pre.normal();
  for (std::size_t j = n_pre_; j < n_cells; ++j) dw_[j] = sd * rng_main.normal();

  w_.resize(n_cells + 1);
  w_[n_pre_] = 0.0;
  for (std::size_t j = n_pre_; j < n_cells; ++j) w_[j + 1] = w_[j] + dw_[j];
  for (std::size_t j = n_pre_; j-- > 0;) w_[j] = w_[j + 1] - dw_[j];
}

double SmoothedWienerPath::grid_time(std::size_t j) const {
  return s0_ + static_cast<double>(j) * dt_w_;
}

void SmoothedWienerPath::check_time(double t) const {
  if (t < 0.0 || t > t_max_ * (1.0 + 1e-12) + 1e-15) {
    std::ostringstream msg;
    msg << "SmoothedWienerPath: time " << t << " outside [0, " << t_max_ << "]";
    throw std::invalid_argument(msg.str());
  }
}

std::pair<std::size_t, std::size_t> SmoothedWienerPath::support_cells(double t) const {
  const double lo = (t - 0.5 * delta_ - s0_) / dt_w_;
  const double hi = (t + 0.5 * delta_ - s0_) / dt_w_;
  std::size_t jlo = lo <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(lo - 1e-9));
  std::size_t jhi = static_cast<std::size_t>(std::floor(hi + 1e-9));
  if (jhi >= dw_.size()) jhi = dw_.size() - 1;
  return {jlo, jhi};
}

double SmoothedWienerPath::eval_unscaled(double t) const {
  check_time(t);
  const auto [jlo, jhi] = support_cells(t);
  double s = 0.0;
  for (std::size_t j = jlo; j <= jhi; ++j)
    s += kernel_.psi((t - grid_time(j)) / delta_) * dw_[j];
  return s / delta_;
}

double SmoothedWienerPath::eval(double t) const {
  return sigma_ * std::sqrt(delta_) / kernel_.psi_l2 * eval_unscaled(t);
}

double SmoothedWienerPath::eval_deriv(double t) const {
  check_time(t);
  const auto [jlo, jhi] = support_cells(t);
  double s = 0.0;
  for (std::size_t j = jlo; j <= jhi; ++j)
    s += kernel_.psi_dot((t - grid_time(j)) / delta_) * dw_[j];
  return sigma_ * std::sqrt(delta_) / kernel_.psi_l2 * s / (delta_ * delta_);
}

double SmoothedWienerPath::smoothed(double t) const {
  check_time(t);
  const auto [jlo, jhi] = support_cells(t);
  // Cells fully left of the kernel window carry weight 1, so the sum
  // telescopes to the path value at the window start plus partial weights.
  double s = w_[jlo];
  for (std::size_t j = jlo; j <= jhi; ++j)
    s += kernel_.psi_cdf((t - grid_time(j)) / delta_) * dw_[j];
  return s;
}

double SmoothedWienerPath::wiener(double t) const {
  if (t < s0_ || t > grid_time(dw_.size()))
    throw std::invalid_argument("SmoothedWienerPath: time outside the stored grid");
  const double u = (t - s0_) / dt_w_;
  const std::size_t j = std::min(static_cast<std::size_t>(u), dw_.size() - 1);
  const double frac = u - static_cast<double>(j);
  return w_[j] + frac * dw_[j];
}

SmoothedWienerPath build_wiener_path(double T, double delta, double dt_w, double sigma,
                                     const KernelSpec& kernel, Rng& rng_main, Rng& rng_pre) {
  return SmoothedWienerPath(T, delta, dt_w, sigma, kernel, rng_main, rng_pre);
}

std::vector<SmoothedWienerPath> build_noise_paths(const NoiseModel& model, int k, double T,
                                                  std::uint64_t master_seed,
                                                  std::uint64_t trial) {
  if (model.kind != NoiseKind::SmoothedWiener)
    throw std::invalid_argument("build_noise_paths: noise model has no paths");
  std::vector<SmoothedWienerPath> paths;
  paths.reserve(static_cast<std::size_t>(3 * k));
  for (int c = 0; c < 3 * k; ++c) {
    Rng rng_main = derive_stream(master_seed, trial, 1 + static_cast<std::uint64_t>(c), 0);
    Rng rng_pre = derive_stream(master_seed, trial, 1 + static_cast<std::uint64_t>(c), 1);
    paths.push_back(build_wiener_path(T, model.delta, model.grid_step(), model.sigma,
                                      model.kernel, rng_main, rng_pre));
  }
  return paths;
}

AgentVector sample_noise_vector(const NoiseModel& model, int k, double t,
                                const std::vector<SmoothedWienerPath>& paths, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_noise_vector: k must be >= 1");
  AgentVector H(static_cast<std::size_t>(k));
  switch (model.kind) {
    case NoiseKind::None:
      return H;
    case NoiseKind::UniformBall: {
      const std::vector<double> flat = sample_uniform_ball(3 * k, model.r, rng);
      for (int i = 0; i < k; ++i)
        H[static_cast<std::size_t>(i)] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
      return H;
    }
    case NoiseKind::GaussianIID: {
      const std::vector<double> flat = sample_gaussian_iid(3 * k, model.sigma, rng);
      for (int i = 0; i < k; ++i)
        H[static_cast<std::size_t>(i)] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
      return H;
    }
    case NoiseKind::SmoothedWiener: {
      if (static_cast<int>(paths.size()) != 3 * k)
        throw std::invalid_argument("sample_noise_vector: expected 3k coordinate paths");
      for (int i = 0; i < k; ++i)
        H[static_cast<std::size_t>(i)] = {paths[3 * i].eval(t), paths[3 * i + 1].eval(t),
                                          paths[3 * i + 2].eval(t)};
      return H;
    }
  }
  throw std::invalid_argument("sample_noise_vector: unknown noise kind");
}

void write_path_csv(const SmoothedWienerPath& path, double dt, std::ostream& os) {
  os << "t,W,Wdelta,Xdelta\n";
  os.precision(17);
  for (double t = 0.0; t <= path.t_max() + 1e-12; t += dt)
    os << t << ',' << path.wiener(t) << ',' << path.smoothed(t) << ','
       << path.eval_unscaled(t) << '\n';
}

}  // namespace flock
