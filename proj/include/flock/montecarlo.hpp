#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flock/dynamics.hpp"
#include "flock/noise.hpp"
#include "flock/theory.hpp"

namespace flock {

struct ExperimentSpec {
  ModelParams params;
  FlockState initial;  // shared by every trial
  Mode mode = Mode::Discrete;
  NoiseModel noise;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  RateVariant variant = RateVariant::Derived;
  ChiVariant chi_variant = ChiVariant::Standard;
  int workers = 1;
  double dt = 0.0;          // continuous step; 0 picks delta/32 (or cap/4 without noise)
  // Success horizon override (steps or time). 0 defers to the theoretical
  // horizon; required when that horizon is undefined.
  double horizon_override = 0.0;
  bool record_fiedler = false;
  bool trace_v_dis = false;
};

struct TrialResult {
  std::int64_t trial = 0;
  std::optional<double> aligned_at;  // step index or time
  std::int64_t condition_violations = 0;
  bool numerical_failure = false;
  std::vector<double> v_dis_trace;
};

enum class VerdictKind { Pass, Fail, NotApplicable };

struct Verdict {
  VerdictKind kind = VerdictKind::NotApplicable;
  double margin = 0.0;          // wilson upper endpoint minus bound
  double wilson_upper = 0.0;
  double bound = 0.0;
};

struct ExperimentSummary {
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  std::int64_t numerical_failures = 0;
  double empirical_probability = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double confidence = 0.95;

  bool quantities_defined = false;
  InitialQuantities quantities;
  HypothesisReport hypothesis;
  bool step_size_ok = true;        // discrete only
  bool theorem_applicable = false;

  double horizon = 0.0;            // success horizon: steps (discrete) or time
  double T0_raw = 0.0;             // un-ceiled theoretical horizon
  std::optional<ProbBound> bound;  // absent when not computable
  std::string bound_kind;

  double mean_alignment = 0.0;     // among successes; NaN when none
  double median_alignment = 0.0;
  double violation_trial_rate = 0.0;  // trials with >= 1 violation

  Verdict verdict;
};

struct ExperimentResult {
  ExperimentSummary summary;
  std::vector<TrialResult> trials;
};

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials,
                                          double confidence);

/// PASS when the Wilson upper endpoint reaches the theoretical lower bound;
/// the bound is violated only if the whole interval sits below it.
Verdict compare_to_bound(const ExperimentSummary& summary);

/// Runs `trials` independent simulations with per-trial derived streams.
/// A success is first alignment within the theoretical horizon (ceil of T0
/// in discrete mode). Results are identical for any worker count. Trials
/// that fail numerically are excluded from the proportion; more than 1% of
/// them aborts the experiment.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Columns: trial, aligned, condition_violations (aligned empty when the
/// trial missed the horizon).
void write_trials_csv(const std::vector<TrialResult>& trials, std::ostream& os);

}  // namespace flock
