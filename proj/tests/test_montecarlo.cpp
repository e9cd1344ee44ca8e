#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flock/errors.hpp"
#include "flock/montecarlo.hpp"

using namespace flock;

namespace {

FlockState coincident_start(int k, double v_dis) {
  FlockState s;
  s.positions.assign(static_cast<std::size_t>(k), Vec3{});
  s.velocities.assign(static_cast<std::size_t>(k), Vec3{});
  for (int i = 0; i < k; ++i) {
    const double angle = 2.0 * M_PI * i / k;
    s.velocities[static_cast<std::size_t>(i)] = {std::cos(angle), std::sin(angle), 0.0};
  }
  const double d = dissimilarity(s.velocities);
  for (Vec3& v : s.velocities) v *= v_dis / d;
  return s;
}

ExperimentSpec base_spec() {
  ExperimentSpec spec;
  spec.params.k = 5;
  spec.params.K = 1.0;
  spec.params.alpha = 2.0;
  spec.params.h = 0.01;
  spec.params.nu = 0.1;
  spec.initial = coincident_start(5, 1.0);
  spec.mode = Mode::Discrete;
  spec.noise = NoiseModel::none();
  spec.trials = 50;
  spec.seed = 20260810u;
  return spec;
}

}  // namespace

TEST_CASE("wilson interval") {
  SUBCASE("endpoints") {
    CHECK(wilson_interval(0, 20, 0.95).first == doctest::Approx(0.0));
    CHECK(wilson_interval(20, 20, 0.95).second == doctest::Approx(1.0));
  }
  SUBCASE("frozen textbook value") {
    const auto [lo, hi] = wilson_interval(50, 100, 0.95);
    CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(wilson_interval(5, 0, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(5, 4, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(1, 4, 1.0), std::invalid_argument);
  }
}

TEST_CASE("compare_to_bound verdicts") {
  ExperimentSummary s;
  s.wilson_lo = 0.2;
  s.wilson_hi = 0.3;
  SUBCASE("zero bound always passes") {
    ProbBound b;
    b.value = 0.0;
    s.bound = b;
    CHECK(compare_to_bound(s).kind == VerdictKind::Pass);
  }
  SUBCASE("interval below the bound fails with the gap as margin") {
    ProbBound b;
    b.value = 0.5;
    s.bound = b;
    const Verdict v = compare_to_bound(s);
    CHECK(v.kind == VerdictKind::Fail);
    CHECK(v.margin == doctest::Approx(-0.2));
  }
  SUBCASE("high empirical rate passes") {
    s.wilson_lo = 0.95;
    s.wilson_hi = 1.0;
    ProbBound b;
    b.value = 0.9;
    s.bound = b;
    CHECK(compare_to_bound(s).kind == VerdictKind::Pass);
  }
  SUBCASE("missing bound is not applicable") {
    s.bound.reset();
    CHECK(compare_to_bound(s).kind == VerdictKind::NotApplicable);
  }
}

TEST_CASE("noise-free experiment aligns every trial") {
  ExperimentSpec spec = base_spec();
  spec.trials = 25;
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.successes == 25);
  CHECK(r.summary.empirical_probability == 1.0);
  REQUIRE(r.summary.bound.has_value());
  CHECK(r.summary.bound->value == 1.0);
  CHECK(r.summary.numerical_failures == 0);
  // every trial aligned strictly inside the horizon
  for (const TrialResult& t : r.trials) {
    REQUIRE(t.aligned_at.has_value());
    CHECK(*t.aligned_at <= r.summary.horizon);
  }
}

TEST_CASE("clamp case: bounded noise below the tolerance always succeeds") {
  ExperimentSpec spec = base_spec();
  spec.trials = 50;
  const InitialQuantities q =
      initial_quantities(spec.initial.positions, spec.initial.velocities, spec.params);
  spec.noise = NoiseModel::uniform_ball(0.9 * q.noise_tolerance * spec.params.nu);
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.successes == 50);
  REQUIRE(r.summary.bound.has_value());
  CHECK(r.summary.bound->value == 1.0);
  CHECK(r.summary.violation_trial_rate == 0.0);
}

TEST_CASE("threshold above the initial dissimilarity aligns at step zero") {
  ExperimentSpec spec = base_spec();
  spec.params.nu = 2.0;
  spec.trials = 10;
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.successes == 10);
  for (const TrialResult& t : r.trials) CHECK(*t.aligned_at == 0.0);
  CHECK(r.summary.horizon == 0.0);
  CHECK(r.summary.mean_alignment == 0.0);
}

TEST_CASE("summaries are reproducible and worker-count independent") {
  ExperimentSpec spec = base_spec();
  spec.noise = NoiseModel::gaussian(0.01);
  spec.trials = 64;
  const ExperimentResult a = run_experiment(spec);
  const ExperimentResult b = run_experiment(spec);
  spec.workers = 4;
  const ExperimentResult c = run_experiment(spec);
  CHECK(a.summary.successes == b.summary.successes);
  CHECK(a.summary.successes == c.summary.successes);
  CHECK(a.summary.empirical_probability == c.summary.empirical_probability);
  CHECK(a.summary.mean_alignment == c.summary.mean_alignment);
  CHECK(a.summary.violation_trial_rate == c.summary.violation_trial_rate);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].aligned_at == c.trials[i].aligned_at);
    CHECK(a.trials[i].condition_violations == c.trials[i].condition_violations);
  }
}

TEST_CASE("relaxing the threshold never hurts the empirical probability much") {
  ExperimentSpec spec = base_spec();
  spec.noise = NoiseModel::gaussian(0.05);
  spec.trials = 200;
  const ExperimentResult tight = run_experiment(spec);
  ExperimentSpec easier = spec;
  easier.params.nu = 0.2;
  const ExperimentResult loose = run_experiment(easier);
  const double half_tight = 0.5 * (tight.summary.wilson_hi - tight.summary.wilson_lo);
  const double half_loose = 0.5 * (loose.summary.wilson_hi - loose.summary.wilson_lo);
  CHECK(loose.summary.empirical_probability >=
        tight.summary.empirical_probability - 2.0 * (half_tight + half_loose));
}

TEST_CASE("trials where the noise condition held throughout always succeed") {
  ExperimentSpec spec = base_spec();
  spec.params.k = 3;
  spec.params.h = 0.1;
  spec.params.nu = 0.05;
  spec.initial = coincident_start(3, 0.1);
  spec.noise = NoiseModel::gaussian(0.002);
  spec.trials = 400;
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.theorem_applicable);
  for (const TrialResult& t : r.trials) {
    if (t.numerical_failure) continue;
    if (t.condition_violations == 0) {
      REQUIRE(t.aligned_at.has_value());
      CHECK(*t.aligned_at <= r.summary.horizon);
    }
  }
}

TEST_CASE("gaussian bound comparison passes on a theorem-valid scenario") {
  ExperimentSpec spec = base_spec();
  spec.params.k = 3;
  spec.params.h = 0.1;
  spec.params.nu = 0.05;
  spec.initial = coincident_start(3, 0.1);
  spec.noise = NoiseModel::gaussian(0.00125);
  spec.trials = 300;
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.theorem_applicable);
  REQUIRE(r.summary.bound.has_value());
  CHECK(r.summary.bound->value > 0.5);
  CHECK(r.summary.verdict.kind == VerdictKind::Pass);
}

TEST_CASE("hypothesis-breaking scenarios are flagged but still run") {
  ExperimentSpec spec = base_spec();  // case (iii) gate fails at this speed
  spec.noise = NoiseModel::uniform_ball(0.9 * 0.15625 * spec.params.nu);
  spec.trials = 20;
  const ExperimentResult r = run_experiment(spec);
  CHECK_FALSE(r.summary.theorem_applicable);
  CHECK(r.summary.verdict.kind == VerdictKind::NotApplicable);
  CHECK(r.summary.successes == 20);
}

TEST_CASE("exploding runs abort the experiment") {
  ExperimentSpec spec = base_spec();
  spec.params.k = 2;
  spec.params.alpha = 0.0;  // distance-independent coupling keeps amplifying
  spec.params.h = 1e8;
  spec.initial = coincident_start(2, 1.0);
  spec.horizon_override = 1000.0;
  spec.trials = 10;
  CHECK_THROWS_AS(run_experiment(spec), numerical_error);
}

TEST_CASE("continuous no-noise experiment succeeds deterministically") {
  ExperimentSpec spec = base_spec();
  spec.mode = Mode::Continuous;
  spec.params.k = 3;
  spec.params.nu = 0.05;
  spec.initial = coincident_start(3, 0.1);
  spec.trials = 5;
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.summary.successes == 5);
  CHECK(r.summary.theorem_applicable);
  REQUIRE(r.summary.bound.has_value());
  CHECK(r.summary.bound->value == 1.0);
}

TEST_CASE("mode and noise kinds must agree") {
  ExperimentSpec spec = base_spec();
  spec.noise = NoiseModel::smoothed_wiener(1.0, 0.1);
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
  spec.mode = Mode::Continuous;
  spec.noise = NoiseModel::gaussian(0.1);
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}
