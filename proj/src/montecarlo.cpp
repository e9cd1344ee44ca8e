#include "flock/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "flock/errors.hpp"
#include "flock/graph.hpp"
#include "flock/special_functions.hpp"

namespace flock {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials,
                                          double confidence) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes outside [0, trials]");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("wilson_interval: confidence outside (0, 1)");

  const double z = normal_quantile(0.5 * (1.0 + confidence));
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Verdict compare_to_bound(const ExperimentSummary& summary) {
  Verdict v;
  if (!summary.bound) {
    v.kind = VerdictKind::NotApplicable;
    v.wilson_upper = summary.wilson_hi;
    v.bound = kNaN;
    v.margin = kNaN;
    return v;
  }
  v.bound = summary.bound->value;
  v.wilson_upper = summary.wilson_hi;
  v.margin = v.wilson_upper - v.bound;
  v.kind = v.margin >= 0.0 ? VerdictKind::Pass : VerdictKind::Fail;
  return v;
}

namespace {

struct HorizonInfo {
  double T0_raw = 0.0;   // theoretical horizon before rounding
  double horizon = 0.0;  // steps (discrete, ceiled) or time
};

HorizonInfo compute_horizon(const ExperimentSpec& spec, const InitialQuantities& q,
                            double v0_dis) {
  HorizonInfo h;
  if (spec.horizon_override > 0.0) {
    h.horizon = spec.mode == Mode::Discrete ? std::ceil(spec.horizon_override)
                                            : spec.horizon_override;
    h.T0_raw = h.horizon;
    return h;
  }
  if (v0_dis <= spec.params.nu) return h;  // aligned at the start
  h.T0_raw = alignment_horizon(q, spec.params, v0_dis, spec.mode, spec.variant);
  h.horizon = spec.mode == Mode::Discrete ? std::ceil(h.T0_raw) : h.T0_raw;
  return h;
}

TrialResult run_one_trial(const ExperimentSpec& spec, const HorizonInfo& horizon,
                          double noise_tolerance, double dt, std::int64_t trial) {
  TrialResult r;
  r.trial = trial;
  SimOptions opt;
  opt.nu = spec.params.nu;
  opt.stop_at_alignment = true;
  opt.record_stride = 0;
  opt.record_states = false;
  opt.trace_v_dis = spec.trace_v_dis;
  opt.noise_tolerance = noise_tolerance;

  try {
    if (spec.mode == Mode::Discrete) {
      opt.max_steps = static_cast<std::int64_t>(horizon.horizon);
      Rng rng = derive_stream(spec.seed, static_cast<std::uint64_t>(trial), 0, 0);
      SimResult sim = simulate_discrete(spec.initial, spec.params, spec.noise, opt, rng);
      r.aligned_at = sim.first_alignment;
      r.condition_violations = sim.condition_violations;
      r.v_dis_trace = std::move(sim.v_dis_trace);
    } else {
      std::vector<SmoothedWienerPath> paths;
      double T = horizon.horizon;
      if (T <= 0.0) T = dt;  // aligned at the start; still a valid window
      if (spec.noise.kind == NoiseKind::SmoothedWiener)
        paths = build_noise_paths(spec.noise, spec.params.k, T + dt, spec.seed,
                                  static_cast<std::uint64_t>(trial));
      SimResult sim =
          integrate_continuous(spec.initial, spec.params, paths, T, dt, opt);
      r.aligned_at = sim.first_alignment;
      r.condition_violations = sim.condition_violations;
      r.v_dis_trace = std::move(sim.v_dis_trace);
    }
  } catch (const numerical_error&) {
    r.numerical_failure = true;
  }
  return r;
}

double resolve_dt(const ExperimentSpec& spec) {
  if (spec.mode == Mode::Discrete) return 0.0;
  if (spec.dt > 0.0) return spec.dt;
  const double cap = 0.1 / laplacian_norm_bound(spec.params.k, spec.params.K);
  if (spec.noise.kind == NoiseKind::SmoothedWiener)
    return std::min(spec.noise.delta / 32.0, cap);
  return 0.25 * cap;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.params.validate(spec.mode);
  if (spec.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (spec.mode == Mode::Discrete && spec.noise.kind == NoiseKind::SmoothedWiener)
    throw std::invalid_argument("run_experiment: smoothed-Wiener noise needs continuous mode");
  if (spec.mode == Mode::Continuous &&
      (spec.noise.kind == NoiseKind::UniformBall || spec.noise.kind == NoiseKind::GaussianIID))
    throw std::invalid_argument("run_experiment: per-step noise needs discrete mode");

  ExperimentResult result;
  ExperimentSummary& sum = result.summary;
  sum.confidence = spec.confidence;

  const double v0_dis = dissimilarity(spec.initial.velocities);
  double noise_tolerance = kNaN;
  HorizonInfo horizon;
  try {
    sum.quantities = initial_quantities(spec.initial.positions, spec.initial.velocities,
                                        spec.params);
    sum.quantities_defined = true;
    noise_tolerance = sum.quantities.noise_tolerance;
    sum.hypothesis = hypothesis_check(sum.quantities, spec.params, spec.mode, spec.variant);
    if (spec.mode == Mode::Discrete)
      sum.step_size_ok =
          spec.params.h < max_step_size(sum.quantities, spec.params, v0_dis);
    sum.theorem_applicable = sum.hypothesis.satisfied && sum.step_size_ok;
    horizon = compute_horizon(spec, sum.quantities, v0_dis);
  } catch (const hypothesis_error& e) {
    sum.quantities_defined = false;
    sum.theorem_applicable = false;
    sum.hypothesis.satisfied = false;
    sum.hypothesis.description = e.what();
    if (spec.horizon_override > 0.0) {
      horizon.horizon = spec.mode == Mode::Discrete ? std::ceil(spec.horizon_override)
                                                    : spec.horizon_override;
      horizon.T0_raw = horizon.horizon;
    } else if (v0_dis > spec.params.nu) {
      throw config_error(
          "run_experiment: the alignment horizon is undefined here; set an explicit "
          "horizon to run anyway");
    }
  }
  sum.T0_raw = horizon.T0_raw;
  sum.horizon = horizon.horizon;

  // Theoretical lower bound for the configured noise.
  if (sum.quantities_defined) {
    const double T0_steps = spec.mode == Mode::Discrete ? horizon.horizon : 0.0;
    switch (spec.noise.kind) {
      case NoiseKind::None: {
        ProbBound b;
        b.value = 1.0;
        b.log_value = 0.0;
        b.deficit = 0.0;
        sum.bound = b;
        sum.bound_kind = "deterministic";
        break;
      }
      case NoiseKind::UniformBall:
        sum.bound = prob_bound_uniform(sum.quantities, spec.params, spec.noise.r, T0_steps);
        sum.bound_kind = "uniform";
        break;
      case NoiseKind::GaussianIID:
        sum.bound = prob_bound_gaussian(sum.quantities, spec.params, spec.noise.sigma,
                                        T0_steps, spec.chi_variant);
        sum.bound_kind = "gaussian";
        break;
      case NoiseKind::SmoothedWiener:
        sum.bound = prob_bound_continuous(sum.quantities, spec.params, spec.noise.sigma,
                                          spec.noise.delta, spec.noise.kernel,
                                          horizon.horizon);
        sum.bound_kind = "continuous";
        break;
    }
  }

  const double dt = resolve_dt(spec);
  result.trials.resize(static_cast<std::size_t>(spec.trials));
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= spec.trials) break;
      result.trials[static_cast<std::size_t>(i)] =
          run_one_trial(spec, horizon, noise_tolerance, dt, i);
    }
  };
  const int n_workers = std::max(1, spec.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Order-independent aggregation over the trial-indexed vector.
  std::vector<double> aligned;
  std::int64_t violating_trials = 0;
  for (const TrialResult& t : result.trials) {
    if (t.numerical_failure) {
      ++sum.numerical_failures;
      continue;
    }
    if (t.condition_violations > 0) ++violating_trials;
    if (t.aligned_at && *t.aligned_at <= horizon.horizon) {
      ++sum.successes;
      aligned.push_back(*t.aligned_at);
    }
  }
  sum.trials = spec.trials - sum.numerical_failures;
  if (sum.numerical_failures * 100 > spec.trials) {
    std::ostringstream msg;
    msg << "run_experiment: " << sum.numerical_failures << " of " << spec.trials
        << " trials failed numerically (more than 1%)";
    throw numerical_error(msg.str());
  }
  if (sum.trials < 1) throw numerical_error("run_experiment: no usable trials");

  sum.empirical_probability =
      static_cast<double>(sum.successes) / static_cast<double>(sum.trials);
  std::tie(sum.wilson_lo, sum.wilson_hi) =
      wilson_interval(sum.successes, sum.trials, spec.confidence);
  sum.violation_trial_rate =
      static_cast<double>(violating_trials) / static_cast<double>(sum.trials);

  if (!aligned.empty()) {
    double m = 0.0;
    for (double a : aligned) m += a;
    sum.mean_alignment = m / static_cast<double>(aligned.size());
    std::sort(aligned.begin(), aligned.end());
    const std::size_t n = aligned.size();
    sum.median_alignment =
        n % 2 == 1 ? aligned[n / 2] : 0.5 * (aligned[n / 2 - 1] + aligned[n / 2]);
  } else {
    sum.mean_alignment = kNaN;
    sum.median_alignment = kNaN;
  }

  sum.verdict = compare_to_bound(sum);
  // Without the theorem gates the bound promises nothing; keep the numbers
  // but withhold the PASS/FAIL judgement.
  if (!sum.theorem_applicable) sum.verdict.kind = VerdictKind::NotApplicable;
  return result;
}

void write_trials_csv(const std::vector<TrialResult>& trials, std::ostream& os) {
  os << "trial,aligned,condition_violations\n";
  os.precision(17);
  for (const TrialResult& t : trials) {
    os << t.trial << ',';
    if (t.aligned_at) os << *t.aligned_at;
    os << ',' << t.condition_violations << '\n';
  }
}

}  // namespace flock
