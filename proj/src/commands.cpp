#include "flock/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <vector>

#include "flock/errors.hpp"
#include "flock/graph.hpp"
#include "flock/rng.hpp"

namespace flock::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* regime_label(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::Below1: return "alpha<1";
    case AlphaRegime::Equal1: return "alpha=1";
    case AlphaRegime::Above1: return "alpha>1";
  }
  return "?";
}

json quantities_json(const InitialQuantities& q) {
  return {{"case", regime_label(q.regime)}, {"a", q.vel_coef},
          {"b", q.pos_coef},                {"U0", q.dispersion_ceiling},
          {"B0", q.dispersion_bound},       {"H0", q.noise_tolerance}};
}

json hypothesis_json(const HypothesisReport& h) {
  return {{"satisfied", h.satisfied},
          {"lhs", h.lhs},
          {"rhs", h.rhs},
          {"description", h.description}};
}

json bound_json(const ProbBound& b) {
  return {{"value", b.value}, {"log", b.log_value}, {"deficit", b.deficit}};
}

void write_report(const json& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "report.json");
  out << report.dump(2) << '\n';
}

const char* verdict_label(VerdictKind k) {
  switch (k) {
    case VerdictKind::Pass: return "PASS";
    case VerdictKind::Fail: return "FAIL";
    case VerdictKind::NotApplicable: return "NOT_APPLICABLE";
  }
  return "?";
}

}  // namespace

json report_skeleton(const char* command, const RunConfig& cfg) {
  json report;
  report["command"] = command;
  report["config"] = cfg.to_json();
  report["meta"] = {{"tool", "flocksim"}, {"version", kToolVersion}, {"rng", kRngVersion}};
  return report;
}

int cmd_theory(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  json report = report_skeleton("theory", cfg);
  const double x_dis = dissimilarity(cfg.initial.positions);
  const double v_dis = dissimilarity(cfg.initial.velocities);
  report["results"]["x_dissimilarity"] = x_dis;
  report["results"]["v_dissimilarity"] = v_dis;

  InitialQuantities q;
  try {
    q = initial_quantities(cfg.initial.positions, cfg.initial.velocities, cfg.params);
  } catch (const hypothesis_error& e) {
    report["results"]["error"] = e.what();
    write_report(report, out_dir);
    log << "hypothesis violated: " << e.what() << '\n';
    return kExitHypothesis;
  }

  json& res = report["results"];
  res.update(quantities_json(q));

  const double h_max = max_step_size(q, cfg.params, v_dis);
  res["h_max"] = h_max;

  const HypothesisReport hyp_c = hypothesis_check(q, cfg.params, Mode::Continuous, cfg.variant);
  json hyp = json::object();
  hyp["continuous"] = hypothesis_json(hyp_c);
  bool hyp_ok = hyp_c.satisfied;
  HypothesisReport hyp_d;
  const bool have_h = cfg.params.h > 0.0;
  if (have_h) {
    hyp_d = hypothesis_check(q, cfg.params, Mode::Discrete, cfg.variant);
    hyp["discrete"] = hypothesis_json(hyp_d);
    hyp["step_size_ok"] = cfg.params.h < h_max;
    if (cfg.mode == Mode::Discrete) hyp_ok = hyp_d.satisfied && cfg.params.h < h_max;
  }
  res["hypothesis"] = hyp;

  const bool aligned_start = v_dis <= cfg.params.nu;
  double T0_disc = 0.0, T0_cont = 0.0;
  if (!aligned_start) {
    if (have_h)
      T0_disc = alignment_horizon(q, cfg.params, v_dis, Mode::Discrete, cfg.variant);
    T0_cont = alignment_horizon(q, cfg.params, v_dis, Mode::Continuous, cfg.variant);
  }
  json t0 = json::object();
  if (have_h) {
    t0["discrete_steps"] = T0_disc;
    t0["discrete_ceil"] = std::ceil(T0_disc);
  }
  t0["continuous"] = T0_cont;
  res["T0"] = t0;

  json rate = json::object();
  if (have_h) {
    try {
      rate["discrete_factor"] = contraction_factor(q, cfg.params, Mode::Discrete);
    } catch (const hypothesis_error& e) {
      rate["discrete_factor_error"] = e.what();
    }
  }
  rate["continuous"] = contraction_factor(q, cfg.params, Mode::Continuous, cfg.variant);
  res["rate"] = rate;

  json bound;
  bound["variant"] = to_string(cfg.variant);
  bound["chi_variant"] = to_string(cfg.chi_variant);
  switch (cfg.noise.kind) {
    case NoiseKind::None: {
      ProbBound b{1.0, 0.0, 0.0};
      bound["kind"] = "deterministic";
      bound.update(bound_json(b));
      break;
    }
    case NoiseKind::UniformBall:
      bound["kind"] = "uniform";
      bound.update(bound_json(
          prob_bound_uniform(q, cfg.params, cfg.noise.r, std::ceil(T0_disc))));
      break;
    case NoiseKind::GaussianIID:
      bound["kind"] = "gaussian";
      bound.update(bound_json(prob_bound_gaussian(q, cfg.params, cfg.noise.sigma,
                                                  std::ceil(T0_disc), cfg.chi_variant)));
      break;
    case NoiseKind::SmoothedWiener:
      bound["kind"] = "continuous";
      bound.update(bound_json(prob_bound_continuous(
          q, cfg.params, cfg.noise.sigma, cfg.noise.delta, cfg.noise.kernel, T0_cont)));
      break;
  }
  res["bound"] = bound;

  write_report(report, out_dir);

  log << "case          " << regime_label(q.regime) << '\n'
      << "a             " << q.vel_coef << '\n'
      << "b             " << q.pos_coef << '\n'
      << "U0            " << q.dispersion_ceiling << '\n'
      << "B0            " << q.dispersion_bound << '\n'
      << "H0            " << q.noise_tolerance << '\n'
      << "h_max         " << h_max << '\n';
  if (have_h)
    log << "hyp discrete  " << (hyp_d.satisfied ? "satisfied" : "NOT satisfied") << '\n';
  log << "hyp continuous " << (hyp_c.satisfied ? "satisfied" : "NOT satisfied") << '\n';
  if (aligned_start) {
    log << "T0            0 (already aligned)\n";
  } else {
    if (have_h) log << "T0 discrete   " << T0_disc << " steps\n";
    log << "T0 continuous " << T0_cont << '\n';
  }
  log << "bound (" << bound["kind"].get<std::string>() << ")  "
      << bound["value"].get<double>() << '\n';
  if (!hyp_ok) log << "warning: convergence hypothesis not satisfied for this mode\n";
  return kExitOk;
}

namespace {

struct SimulateSetup {
  bool quantities_defined = false;
  InitialQuantities q;
  double horizon = 0.0;  // steps (discrete) or time
};

SimulateSetup simulate_setup(const RunConfig& cfg, double v_dis) {
  SimulateSetup s;
  try {
    s.q = initial_quantities(cfg.initial.positions, cfg.initial.velocities, cfg.params);
    s.quantities_defined = true;
  } catch (const hypothesis_error&) {
  }
  const double explicit_h =
      cfg.mode == Mode::Discrete ? static_cast<double>(cfg.max_steps) : cfg.T;
  if (explicit_h > 0.0) {
    s.horizon = explicit_h;
  } else if (v_dis <= cfg.params.nu) {
    s.horizon = 0.0;
  } else if (s.quantities_defined) {
    const double t0 = alignment_horizon(s.q, cfg.params, v_dis, cfg.mode, cfg.variant);
    s.horizon = cfg.mode == Mode::Discrete ? std::ceil(t0) : t0;
  } else {
    throw config_error(
        "simulate: no run length; set run.max_steps (discrete) or run.T (continuous)");
  }
  return s;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                 std::ostream& log) {
  json report = report_skeleton("simulate", cfg);
  const double v_dis0 = dissimilarity(cfg.initial.velocities);
  const SimulateSetup setup = simulate_setup(cfg, v_dis0);

  SimOptions opt;
  opt.nu = cfg.params.nu;
  opt.stop_at_alignment = false;  // keep the full window in the trajectory
  opt.record_stride = 1;
  opt.record_states = cfg.output.states_jsonl;
  opt.record_fiedler = cfg.record_fiedler;
  if (setup.quantities_defined) opt.noise_tolerance = setup.q.noise_tolerance;

  SimResult sim;
  try {
    if (cfg.mode == Mode::Discrete) {
      opt.max_steps = static_cast<std::int64_t>(setup.horizon);
      Rng rng = derive_stream(cfg.seed, 0, 0, 0);
      sim = simulate_discrete(cfg.initial, cfg.params, cfg.noise, opt, rng);
    } else {
      double T = setup.horizon;
      double dt = cfg.dt;
      const double cap = 0.1 / laplacian_norm_bound(cfg.params.k, cfg.params.K);
      if (dt <= 0.0)
        dt = cfg.noise.kind == NoiseKind::SmoothedWiener
                 ? std::min(cfg.noise.delta / 32.0, cap)
                 : 0.25 * cap;
      if (T <= 0.0) T = dt;
      std::vector<SmoothedWienerPath> paths;
      if (cfg.noise.kind == NoiseKind::SmoothedWiener)
        paths = build_noise_paths(cfg.noise, cfg.params.k, T + dt, cfg.seed, 0);
      sim = integrate_continuous(cfg.initial, cfg.params, paths, T, dt, opt);
    }
  } catch (const numerical_error& e) {
    report["results"]["error"] = e.what();
    write_report(report, out_dir);
    log << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  json& res = report["results"];
  res["horizon"] = setup.horizon;
  res["first_alignment"] = sim.first_alignment ? json(*sim.first_alignment) : json(nullptr);
  res["steps_taken"] = sim.steps_taken;
  res["condition_violations"] = sim.condition_violations;
  res["final"] = {{"v_dissimilarity", dissimilarity(sim.final_state.velocities)},
                  {"x_dissimilarity", dissimilarity(sim.final_state.positions)},
                  {"t", sim.final_state.time}};
  if (setup.quantities_defined) res["quantities"] = quantities_json(setup.q);
  write_report(report, out_dir);

  std::filesystem::create_directories(out_dir);
  if (cfg.output.trajectory_csv) {
    std::ofstream out(out_dir / "trajectory.csv");
    write_trajectory_csv(sim.trajectory, out);
  }
  if (cfg.output.states_jsonl) {
    std::ofstream out(out_dir / "states.jsonl");
    write_states_jsonl(sim.trajectory, out);
  }

  if (sim.first_alignment) {
    if (cfg.mode == Mode::Discrete)
      log << "aligned at step " << static_cast<std::int64_t>(*sim.first_alignment) << " (t = "
          << *sim.first_alignment * cfg.params.h << ")\n";
    else
      log << "aligned at t = " << *sim.first_alignment << '\n';
  } else {
    log << "no alignment within the horizon (" << setup.horizon
        << (cfg.mode == Mode::Discrete ? " steps)\n" : " time units)\n");
  }
  return kExitOk;
}

int cmd_montecarlo(const RunConfig& cfg, const std::filesystem::path& out_dir,
                   std::ostream& log) {
  json report = report_skeleton("montecarlo", cfg);
  ExperimentResult result;
  try {
    result = run_experiment(cfg.experiment_spec());
  } catch (const numerical_error& e) {
    report["results"]["error"] = e.what();
    write_report(report, out_dir);
    log << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  const ExperimentSummary& s = result.summary;
  json& res = report["results"];
  res["trials"] = s.trials;
  res["successes"] = s.successes;
  res["numerical_failures"] = s.numerical_failures;
  res["empirical_probability"] = s.empirical_probability;
  res["wilson"] = {{"lo", s.wilson_lo}, {"hi", s.wilson_hi}, {"confidence", s.confidence}};
  res["horizon"] = s.horizon;
  res["T0"] = s.T0_raw;
  res["quantities"] = s.quantities_defined ? quantities_json(s.quantities) : json(nullptr);
  res["hypothesis"] = hypothesis_json(s.hypothesis);
  res["step_size_ok"] = s.step_size_ok;
  res["theorem_applicable"] = s.theorem_applicable;
  res["bound"] = s.bound ? bound_json(*s.bound) : json(nullptr);
  res["bound_kind"] = s.bound_kind;
  res["alignment"] = {{"mean", s.mean_alignment}, {"median", s.median_alignment}};
  res["violation_trial_rate"] = s.violation_trial_rate;
  res["verdict"] = {{"kind", verdict_label(s.verdict.kind)},
                    {"margin", s.verdict.margin},
                    {"wilson_upper", s.verdict.wilson_upper},
                    {"bound", s.verdict.bound}};
  write_report(report, out_dir);

  if (cfg.output.trials_csv) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "trials.csv");
    write_trials_csv(result.trials, out);
  }

  log << "trials " << s.trials << ", successes " << s.successes << " (p = "
      << s.empirical_probability << ", wilson [" << s.wilson_lo << ", " << s.wilson_hi
      << "])\n";
  if (s.bound)
    log << "bound (" << s.bound_kind << ") " << s.bound->value << '\n';
  log << "verdict " << verdict_label(s.verdict.kind) << '\n';

  switch (s.verdict.kind) {
    case VerdictKind::Pass:
      return kExitOk;
    case VerdictKind::Fail:
      return kExitBoundFail;
    case VerdictKind::NotApplicable:
      log << "warning: convergence hypotheses unmet; bound comparison skipped\n";
      return kExitOk;
  }
  return kExitOk;
}

int cmd_noise_check(const RunConfig& cfg, const std::filesystem::path& out_dir,
                    std::ostream& log) {
  if (cfg.noise.kind != NoiseKind::SmoothedWiener)
    throw config_error("noise-check: requires noise.kind = smoothed_wiener");
  const double delta = cfg.noise.delta;
  const double T = cfg.T > 0.0 ? cfg.T : 1.0;
  if (T < 4.0 * delta) throw config_error("noise-check: run.T must be at least 4*delta");
  const std::int64_t n = cfg.trials;

  const double t1 = 0.1 * T, t2 = 0.5 * T, t3 = 0.9 * T;
  const double sigma = cfg.noise.sigma;
  const double dt_w = cfg.noise.grid_step();

  double sum_x = 0.0, sum_x2 = 0.0;
  double sum_e[3] = {0, 0, 0}, sum_e2[3] = {0, 0, 0};
  double sum_e4 = 0.0;
  double sum_lag = 0.0, sum_lag2 = 0.0, sum_cross = 0.0;

  for (std::int64_t i = 0; i < n; ++i) {
    Rng main = derive_stream(cfg.seed, static_cast<std::uint64_t>(i), 1, 0);
    Rng pre = derive_stream(cfg.seed, static_cast<std::uint64_t>(i), 1, 1);
    const SmoothedWienerPath path =
        build_wiener_path(T, delta, dt_w, sigma, cfg.noise.kernel, main, pre);
    const double x = path.eval_unscaled(t2);
    const double e1 = path.eval(t1);
    const double e2 = path.eval(t2);
    const double e3 = path.eval(t3);
    const double el = path.eval(t2 + delta);
    sum_x += x;
    sum_x2 += x * x;
    sum_e[0] += e1;
    sum_e[1] += e2;
    sum_e[2] += e3;
    sum_e2[0] += e1 * e1;
    sum_e2[1] += e2 * e2;
    sum_e2[2] += e3 * e3;
    sum_e4 += e2 * e2 * e2 * e2;
    sum_lag += el;
    sum_lag2 += el * el;
    sum_cross += e2 * el;
  }

  const double dn = static_cast<double>(n);
  const double var_x = sum_x2 / dn - (sum_x / dn) * (sum_x / dn);
  double var_e[3], se_e[3];
  for (int j = 0; j < 3; ++j) {
    var_e[j] = sum_e2[j] / dn - (sum_e[j] / dn) * (sum_e[j] / dn);
    se_e[j] = var_e[j] * std::sqrt(2.0 / dn);
  }
  const double var_lag = sum_lag2 / dn - (sum_lag / dn) * (sum_lag / dn);
  const double cov = sum_cross / dn - (sum_e[1] / dn) * (sum_lag / dn);
  const double corr = cov / std::sqrt(var_e[1] * var_lag);
  const double m2 = sum_e2[1] / dn;
  const double kurtosis = (sum_e4 / dn) / (m2 * m2);

  const KernelSpec kernel = cfg.noise.kernel;
  const double expected_var_x = kernel.psi_l2 * kernel.psi_l2 / delta;
  const double expected_var_e = sigma * sigma;

  const double se_corr = 1.0 / std::sqrt(dn);
  const double se_kurt = std::sqrt(24.0 / dn);
  const bool var_x_ok = std::fabs(var_x - expected_var_x) <= 0.03 * expected_var_x;
  const bool var_e_ok = std::fabs(var_e[1] - expected_var_e) <= 0.03 * expected_var_e;
  bool stationary_ok = true;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::fabs(var_e[a] - var_e[b]) >
          3.0 * std::sqrt(se_e[a] * se_e[a] + se_e[b] * se_e[b]))
        stationary_ok = false;
  const bool lag_ok = std::fabs(corr) <= 3.0 * se_corr;
  const bool kurtosis_ok = kurtosis >= 2.9 && kurtosis <= 3.1;

  json report = report_skeleton("noise-check", cfg);
  report["results"] = {
      {"paths", n},
      {"T", T},
      {"times", {t1, t2, t3}},
      {"var_X", {{"estimate", var_x}, {"expected", expected_var_x}, {"ok", var_x_ok}}},
      {"var_e",
       {{"estimates", {var_e[0], var_e[1], var_e[2]}},
        {"std_errors", {se_e[0], se_e[1], se_e[2]}},
        {"expected", expected_var_e},
        {"ok", var_e_ok}}},
      {"stationarity_ok", stationary_ok},
      {"lag_correlation",
       {{"estimate", corr}, {"std_error", se_corr}, {"lag", delta}, {"ok", lag_ok}}},
      {"kurtosis", {{"estimate", kurtosis}, {"std_error", se_kurt}, {"ok", kurtosis_ok}}},
  };
  write_report(report, out_dir);

  if (cfg.output.noise_csv) {
    std::filesystem::create_directories(out_dir);
    Rng main = derive_stream(cfg.seed, 0, 1, 0);
    Rng pre = derive_stream(cfg.seed, 0, 1, 1);
    const SmoothedWienerPath path =
        build_wiener_path(T, delta, dt_w, sigma, cfg.noise.kernel, main, pre);
    std::ofstream out(out_dir / "noise.csv");
    write_path_csv(path, delta / 32.0, out);
  }

  log << "Var(X) " << var_x << " vs " << expected_var_x << (var_x_ok ? " ok" : " OFF")
      << '\n'
      << "Var(e) " << var_e[1] << " vs " << expected_var_e << (var_e_ok ? " ok" : " OFF")
      << '\n'
      << "stationarity " << (stationary_ok ? "ok" : "OFF") << '\n'
      << "lag-delta correlation " << corr << (lag_ok ? " ok" : " OFF") << '\n'
      << "kurtosis " << kurtosis << (kurtosis_ok ? " ok" : " OFF") << '\n';
  return kExitOk;
}

}  // namespace flock::cli
