#include "flock/dynamics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "flock/errors.hpp"
#include "flock/graph.hpp"

namespace flock {

namespace {

void check_finite(const FlockState& s, std::int64_t step) {
  if (!all_finite(s.positions) || !all_finite(s.velocities)) {
    std::ostringstream msg;
    msg << "simulation produced a non-finite state at step " << step;
    throw numerical_error(msg.str());
  }
}

double recorded_fiedler(const AgentVector& x, const ModelParams& p, bool exact) {
  const AdjacencyMatrix A = adjacency(x, p.K, p.alpha);
  return exact ? fiedler_number(laplacian(A)) : fiedler_lower_bound(A);
}

void record_entry(Trajectory& traj, const SimOptions& opt, const FlockState& s,
                  const ModelParams& p, double v_dis, double x_dis, bool noise_ok,
                  std::int64_t step) {
  if (opt.record_stride <= 0) return;
  if (step % opt.record_stride != 0) return;
  TrajectoryEntry e;
  e.t = s.time;
  if (opt.record_states) e.state = s;
  e.v_dis = v_dis;
  e.x_dis = x_dis;
  e.fiedler = recorded_fiedler(s.positions, p, opt.record_fiedler);
  e.noise_ok = noise_ok;
  traj.entries.push_back(std::move(e));
}

}  // namespace

FlockState step_discrete(const FlockState& state, const ModelParams& p,
                         const AgentVector& H) {
  if (!(p.h > 0.0)) throw std::invalid_argument("step_discrete: h must be positive");
  if (state.positions.size() != state.velocities.size() ||
      H.size() != state.positions.size())
    throw std::invalid_argument("step_discrete: dimension mismatch");
  if (!all_finite(state.positions) || !all_finite(state.velocities))
    throw numerical_error("step_discrete: non-finite input state");

  const LaplacianMatrix L = laplacian(adjacency(state.positions, p.K, p.alpha));
  const AgentVector Lv = apply_laplacian(L, state.velocities);

  FlockState next;
  next.time = state.time + p.h;
  next.positions.resize(state.positions.size());
  next.velocities.resize(state.velocities.size());
  for (std::size_t i = 0; i < state.positions.size(); ++i) {
    next.positions[i] = state.positions[i] + p.h * state.velocities[i];
    next.velocities[i] = state.velocities[i] - p.h * Lv[i] + p.h * H[i];
  }
  return next;
}

bool noise_condition(const AgentVector& H, const AgentVector& v, double H0) {
  return dissimilarity(H) <= H0 * dissimilarity(v);
}

SimResult simulate_discrete(const FlockState& state0, const ModelParams& p,
                            const NoiseModel& model, const SimOptions& opt, Rng& rng) {
  p.validate(Mode::Discrete);
  if (!(opt.nu > 0.0)) throw std::invalid_argument("simulate_discrete: nu must be positive");
  if (model.kind == NoiseKind::SmoothedWiener)
    throw std::invalid_argument(
        "simulate_discrete: smoothed-Wiener noise drives the continuous system");

  const bool monitor = std::isfinite(opt.noise_tolerance);
  SimResult res;
  FlockState s = state0;
  s.time = 0.0;
  check_finite(s, 0);

  const std::vector<SmoothedWienerPath> no_paths;
  for (std::int64_t step = 0;; ++step) {
    const double v_dis = dissimilarity(s.velocities);
    const double x_dis = dissimilarity(s.positions);
    if (opt.trace_v_dis) res.v_dis_trace.push_back(v_dis);
    if (!res.first_alignment && v_dis <= opt.nu)
      res.first_alignment = static_cast<double>(step);

    const bool done =
        step >= opt.max_steps || (opt.stop_at_alignment && res.first_alignment);
    if (done) {
      record_entry(res.trajectory, opt, s, p, v_dis, x_dis, true, step);
      res.steps_taken = step;
      res.final_state = s;
      return res;
    }

    const AgentVector H = sample_noise_vector(model, p.k, s.time, no_paths, rng);
    const bool ok = !monitor || noise_condition(H, s.velocities, opt.noise_tolerance);
    if (!ok) ++res.condition_violations;
    record_entry(res.trajectory, opt, s, p, v_dis, x_dis, ok, step);

    s = step_discrete(s, p, H);
    check_finite(s, step + 1);
  }
}

SimResult integrate_continuous(const FlockState& state0, const ModelParams& p,
                               const std::vector<SmoothedWienerPath>& paths, double T,
                               double dt, const SimOptions& opt) {
  p.validate(Mode::Continuous);
  if (!(opt.nu > 0.0)) throw std::invalid_argument("integrate_continuous: nu must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("integrate_continuous: T must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_continuous: dt must be positive");
  const double stability_cap = 0.1 / laplacian_norm_bound(p.k, p.K);
  if (dt > stability_cap * (1.0 + 1e-12))
    throw std::invalid_argument("integrate_continuous: dt exceeds the stability cap");
  const bool noisy = !paths.empty();
  if (noisy) {
    if (static_cast<int>(paths.size()) != 3 * p.k)
      throw std::invalid_argument("integrate_continuous: expected 3k coordinate paths");
    const double delta = paths.front().delta();
    if (dt > delta / 16.0 * (1.0 + 1e-12))
      throw std::invalid_argument("integrate_continuous: dt must not exceed delta/16");
    if (paths.front().t_max() + 1e-12 < T)
      throw std::invalid_argument("integrate_continuous: paths do not cover [0, T]");
  }

  const auto noise_at = [&](double t) -> AgentVector {
    AgentVector H(static_cast<std::size_t>(p.k));
    if (!noisy) return H;
    for (int i = 0; i < p.k; ++i)
      H[static_cast<std::size_t>(i)] = {paths[3 * i].eval(t), paths[3 * i + 1].eval(t),
                                        paths[3 * i + 2].eval(t)};
    return H;
  };
  const auto velocity_rhs = [&](const AgentVector& x, const AgentVector& v,
                                const AgentVector& H) {
    const LaplacianMatrix L = laplacian(adjacency(x, p.K, p.alpha));
    AgentVector dv = apply_laplacian(L, v);
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = H[i] - dv[i];
    return dv;
  };

  const bool monitor = std::isfinite(opt.noise_tolerance);
  SimResult res;
  FlockState s = state0;
  s.time = 0.0;
  check_finite(s, 0);
  const std::int64_t n_steps = static_cast<std::int64_t>(std::ceil(T / dt - 1e-9));

  double prev_v_dis = dissimilarity(s.velocities);
  {
    const AgentVector H0v = noise_at(0.0);
    const bool ok = !monitor || noise_condition(H0v, s.velocities, opt.noise_tolerance);
    if (monitor && !ok) ++res.condition_violations;
    if (opt.trace_v_dis) res.v_dis_trace.push_back(prev_v_dis);
    if (prev_v_dis <= opt.nu) res.first_alignment = 0.0;
    record_entry(res.trajectory, opt, s, p, prev_v_dis, dissimilarity(s.positions), ok, 0);
  }

  for (std::int64_t step = 0; step < n_steps; ++step) {
    if (opt.stop_at_alignment && res.first_alignment) break;
    const double t = s.time;
    const double step_dt = std::min(dt, T - t);
    if (step_dt <= 0.0) break;

    const AgentVector H1 = noise_at(t);
    const AgentVector H2 = noise_at(t + 0.5 * step_dt);
    const AgentVector H4 = noise_at(t + step_dt);

    const AgentVector& x0 = s.positions;
    const AgentVector& v0 = s.velocities;
    const AgentVector k1x = v0;
    const AgentVector k1v = velocity_rhs(x0, v0, H1);
    const AgentVector x_a = x0 + 0.5 * step_dt * k1x;
    const AgentVector v_a = v0 + 0.5 * step_dt * k1v;
    const AgentVector k2x = v_a;
    const AgentVector k2v = velocity_rhs(x_a, v_a, H2);
    const AgentVector x_b = x0 + 0.5 * step_dt * k2x;
    const AgentVector v_b = v0 + 0.5 * step_dt * k2v;
    const AgentVector k3x = v_b;
    const AgentVector k3v = velocity_rhs(x_b, v_b, H2);
    const AgentVector x_c = x0 + step_dt * k3x;
    const AgentVector v_c = v0 + step_dt * k3v;
    const AgentVector k4x = v_c;
    const AgentVector k4v = velocity_rhs(x_c, v_c, H4);

    FlockState next;
    next.time = t + step_dt;
    next.positions.resize(x0.size());
    next.velocities.resize(v0.size());
    const double w = step_dt / 6.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      next.positions[i] = x0[i] + w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
      next.velocities[i] = v0[i] + w * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    check_finite(next, step + 1);

    const double v_dis = dissimilarity(next.velocities);
    const bool ok = !monitor || noise_condition(H4, next.velocities, opt.noise_tolerance);
    if (monitor && !ok) ++res.condition_violations;
    if (opt.trace_v_dis) res.v_dis_trace.push_back(v_dis);
    if (!res.first_alignment && v_dis <= opt.nu) {
      // Linear interpolation of ||v_perp|| across the bracketing step.
      double t_cross = next.time;
      if (prev_v_dis > opt.nu && prev_v_dis > v_dis)
        t_cross = t + step_dt * (prev_v_dis - opt.nu) / (prev_v_dis - v_dis);
      res.first_alignment = t_cross;
    }
    s = std::move(next);
    prev_v_dis = v_dis;
    record_entry(res.trajectory, opt, s, p, v_dis, dissimilarity(s.positions), ok, step + 1);
    res.steps_taken = step + 1;
  }

  res.final_state = s;
  return res;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,vdis,xdis,fiedler,noise_ok\n";
  os.precision(17);
  for (const TrajectoryEntry& e : traj.entries)
    os << e.t << ',' << e.v_dis << ',' << e.x_dis << ',' << e.fiedler << ','
       << (e.noise_ok ? 1 : 0) << '\n';
}

void write_states_jsonl(const Trajectory& traj, std::ostream& os) {
  os.precision(17);
  for (const TrajectoryEntry& e : traj.entries) {
    os << "{\"t\":" << e.t << ",\"x\":[";
    for (std::size_t i = 0; i < e.state.positions.size(); ++i) {
      const Vec3& v = e.state.positions[i];
      os << (i ? "," : "") << '[' << v.x << ',' << v.y << ',' << v.z << ']';
    }
    os << "],\"v\":[";
    for (std::size_t i = 0; i < e.state.velocities.size(); ++i) {
      const Vec3& v = e.state.velocities[i];
      os << (i ? "," : "") << '[' << v.x << ',' << v.y << ',' << v.z << ']';
    }
    os << "]}\n";
  }
}

}  // namespace flock
