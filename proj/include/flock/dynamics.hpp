#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "flock/core.hpp"
#include "flock/noise.hpp"
#include "flock/theory.hpp"

namespace flock {

struct TrajectoryEntry {
  double t = 0.0;
  FlockState state;     // populated only when states are recorded
  double v_dis = 0.0;   // velocity dissimilarity
  double x_dis = 0.0;   // position dissimilarity (dispersion)
  double fiedler = 0.0; // exact Fiedler number, or its k*mu lower bound
  bool noise_ok = true; // bounded-noise condition at this step
};

struct Trajectory {
  std::vector<TrajectoryEntry> entries;
};

struct SimOptions {
  std::int64_t max_steps = 0;   // discrete step budget
  double nu = 0.0;              // alignment threshold
  bool stop_at_alignment = true;
  int record_stride = 1;        // 0 disables trajectory recording
  bool record_states = true;    // keep full states in trajectory entries
  bool record_fiedler = false;  // exact eigenvalue instead of the k*mu bound
  bool trace_v_dis = false;     // keep the per-step dissimilarity trace
  // Threshold for the bounded-noise condition ||H_perp|| <= H0 ||v_perp||;
  // NaN disables monitoring.
  double noise_tolerance = std::numeric_limits<double>::quiet_NaN();
};

struct SimResult {
  Trajectory trajectory;
  // First step index (discrete) or interpolated time (continuous) at which
  // the velocity dissimilarity reached nu.
  std::optional<double> first_alignment;
  std::int64_t steps_taken = 0;
  std::int64_t condition_violations = 0;
  std::vector<double> v_dis_trace;
  FlockState final_state;
};

/// One update of the discrete system: positions advance by h v using the
/// current velocities; velocities contract through the Laplacian of the
/// current positions and pick up h H.
FlockState step_discrete(const FlockState& state, const ModelParams& p,
                         const AgentVector& H);

/// Iterates step_discrete with fresh noise each step. Alignment is checked
/// at every step including step 0.
SimResult simulate_discrete(const FlockState& state0, const ModelParams& p,
                            const NoiseModel& model, const SimOptions& opt, Rng& rng);

/// Classic fixed-step 4th-order integration of x' = v, v' = -L_x v + H(t)
/// with H evaluated from the frozen coordinate paths at the stage times.
/// Requires dt <= delta/16 (when noise is present) and
/// dt <= 0.1 / (2 (k-1) sqrt(k) K). The alignment time is located by linear
/// interpolation of ||v_perp|| between bracketing steps.
SimResult integrate_continuous(const FlockState& state0, const ModelParams& p,
                               const std::vector<SmoothedWienerPath>& paths, double T,
                               double dt, const SimOptions& opt);

/// Bounded-noise condition ||H_perp|| <= H0 ||v_perp|| (inclusive).
bool noise_condition(const AgentVector& H, const AgentVector& v, double H0);

/// Columns: t, vdis, xdis, fiedler, noise_ok.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// One JSON document per line with t, positions, velocities.
void write_states_jsonl(const Trajectory& traj, std::ostream& os);

}  // namespace flock
