#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flock/dynamics.hpp"
#include "flock/errors.hpp"
#include "flock/graph.hpp"
#include "flock/rng.hpp"

using namespace flock;

namespace {

ModelParams params(int k, double K, double alpha, double h, double nu) {
  ModelParams p;
  p.k = k;
  p.K = K;
  p.alpha = alpha;
  p.h = h;
  p.nu = nu;
  return p;
}

// Coincident positions plus a zero-mean velocity pattern scaled to the
// requested dissimilarity.
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

}  // namespace

TEST_CASE("step_discrete: examples") {
  SUBCASE("common velocity only translates") {
    const ModelParams p = params(3, 1.0, 1.0, 0.1, 0.1);
    FlockState s;
    s.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const Vec3 u = {2.0, -1.0, 0.5};
    s.velocities = {u, u, u};
    const AgentVector H(3);
    const FlockState next = step_discrete(s, p, H);
    for (int i = 0; i < 3; ++i) {
      CHECK(norm(next.velocities[i] - u) == doctest::Approx(0.0));
      CHECK(norm(next.positions[i] - (s.positions[i] + 0.1 * u)) == doctest::Approx(0.0));
    }
  }
  SUBCASE("antisymmetric pair contracts by 1 - 2Kh") {
    const double K = 1.5, h = 0.05;
    const ModelParams p = params(2, K, 0.0, h, 0.1);
    FlockState s;
    s.positions = {{0, 0, 0}, {1, 0, 0}};
    s.velocities = {{1, 0, 0}, {-1, 0, 0}};
    const FlockState next = step_discrete(s, p, AgentVector(2));
    CHECK(next.velocities[0].x == doctest::Approx(1.0 - 2.0 * K * h));
    CHECK(next.velocities[1].x == doctest::Approx(-(1.0 - 2.0 * K * h)));
  }
  SUBCASE("vanishing coupling leaves drift plus noise") {
    const ModelParams p = params(2, 1e-14, 0.0, 0.1, 0.1);
    FlockState s;
    s.positions = {{0, 0, 0}, {1, 0, 0}};
    s.velocities = {{1, 0, 0}, {-1, 0, 0}};
    const AgentVector H = {{0.3, 0, 0}, {0, 0.3, 0}};
    const FlockState next = step_discrete(s, p, H);
    CHECK(next.velocities[0].x == doctest::Approx(1.0 + 0.1 * 0.3).epsilon(1e-9));
    CHECK(next.velocities[1].y == doctest::Approx(0.1 * 0.3).epsilon(1e-9));
  }
}

TEST_CASE("noise_condition: examples") {
  const AgentVector v = {{1, 0, 0}, {-1, 0, 0}};
  CHECK(noise_condition(AgentVector(2), v, 0.5));
  const AgentVector h = {{0.1, 0, 0}, {-0.1, 0, 0}};
  CHECK_FALSE(noise_condition(h, AgentVector(2), 0.5));
  // exact boundary is inclusive
  const double H0 = dissimilarity(h) / dissimilarity(v);
  CHECK(noise_condition(h, v, H0));
}

TEST_CASE("deterministic discrete run obeys the guaranteed envelope") {
  // alpha = 0.5 makes the regime gate unconditional; U0 = 2, H0 = 1,
  // per-step factor 1 - h sqrt(2).
  const ModelParams p = params(4, 1.0, 0.5, 0.05, 1e-6);
  const FlockState s0 = coincident_start(4, 1.0);
  const InitialQuantities q = initial_quantities(s0.positions, s0.velocities, p);
  CHECK(q.dispersion_ceiling == doctest::Approx(2.0));
  CHECK(q.noise_tolerance == doctest::Approx(1.0));
  CHECK(hypothesis_check(q, p, Mode::Discrete).satisfied);
  REQUIRE(p.h < max_step_size(q, p, 1.0));
  const double factor = contraction_factor(q, p, Mode::Discrete);

  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 200;
  opt.stop_at_alignment = false;
  opt.record_states = false;
  opt.noise_tolerance = q.noise_tolerance;
  Rng rng(1u);
  const SimResult res = simulate_discrete(s0, p, NoiseModel::none(), opt, rng);
  REQUIRE(res.trajectory.entries.size() == 201);
  double envelope = 1.0;
  for (std::size_t t = 0; t < res.trajectory.entries.size(); ++t) {
    CHECK(res.trajectory.entries[t].v_dis <= envelope + 1e-9);
    CHECK(res.trajectory.entries[t].x_dis <= q.dispersion_bound + 1e-9);
    envelope *= factor;
  }
  CHECK(res.condition_violations == 0);
}

TEST_CASE("alignment at step zero when the threshold is already met") {
  const ModelParams p = params(3, 1.0, 1.0, 0.01, 2.0);
  FlockState s0 = coincident_start(3, 1.0);
  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 100;
  Rng rng(2u);
  const SimResult res = simulate_discrete(s0, p, NoiseModel::none(), opt, rng);
  REQUIRE(res.first_alignment.has_value());
  CHECK(*res.first_alignment == 0.0);
  CHECK(res.steps_taken == 0);
}

TEST_CASE("zero-velocity start is aligned at step zero with frozen positions") {
  const ModelParams p = params(3, 1.0, 1.0, 0.01, 0.5);
  FlockState s0;
  s0.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  s0.velocities.assign(3, Vec3{});
  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 50;
  opt.stop_at_alignment = false;
  opt.record_states = true;
  Rng rng(12u);
  const SimResult res = simulate_discrete(s0, p, NoiseModel::none(), opt, rng);
  REQUIRE(res.first_alignment.has_value());
  CHECK(*res.first_alignment == 0.0);
  for (const TrajectoryEntry& e : res.trajectory.entries)
    for (int i = 0; i < 3; ++i)
      CHECK(norm(e.state.positions[i] - s0.positions[i]) == 0.0);
}

TEST_CASE("numerical blow-up is reported with a step index") {
  const ModelParams p = params(2, 1.0, 0.0, 1e8, 1e-9);
  FlockState s0 = coincident_start(2, 1.0);
  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 100000;
  opt.record_stride = 0;
  Rng rng(3u);
  CHECK_THROWS_AS(simulate_discrete(s0, p, NoiseModel::none(), opt, rng), numerical_error);
}

TEST_CASE("per-step contraction under bounded noise") {
  const ModelParams p = params(5, 1.0, 2.0, 0.01, 1e-9);
  const FlockState s0 = coincident_start(5, 1.0);
  const InitialQuantities q = initial_quantities(s0.positions, s0.velocities, p);
  REQUIRE(p.h < 1.0 / laplacian_norm_bound(p.k, p.K));

  for (int run = 0; run < 20; ++run) {
    SimOptions opt;
    opt.nu = p.nu;
    opt.max_steps = 100;
    opt.stop_at_alignment = false;
    opt.record_states = false;
    opt.record_fiedler = true;  // exact eigenvalue for the per-step factor
    opt.noise_tolerance = q.noise_tolerance;
    Rng rng = derive_stream(888u, run, 0, 0);
    const SimResult res =
        simulate_discrete(s0, p, NoiseModel::uniform_ball(0.01), opt, rng);
    const auto& e = res.trajectory.entries;
    REQUIRE(e.size() == 101);
    bool all_ok = true;
    for (std::size_t t = 0; t + 1 < e.size(); ++t) {
      if (!e[t].noise_ok) {
        all_ok = false;
        continue;
      }
      const double factor = 1.0 - p.h * e[t].fiedler + p.h * q.noise_tolerance;
      CHECK(e[t + 1].v_dis <= factor * e[t].v_dis + 1e-10);
    }
    // cumulative product bound along runs where the condition never failed
    if (all_ok) {
      double prod = 1.0;
      for (std::size_t t = 0; t + 1 < e.size(); ++t) {
        prod *= 1.0 - p.h * e[t].fiedler + p.h * q.noise_tolerance;
        CHECK(e[t + 1].v_dis <= e[0].v_dis * prod + 1e-10);
      }
    }
  }
}

TEST_CASE("continuous integration matches the two-agent closed form") {
  const double K = 1.0;
  const ModelParams p = params(2, K, 0.0, 0.0, 1e-9);
  FlockState s0;
  s0.positions = {{0, 0, 0}, {1, 0, 0}};
  s0.velocities = {{1, 0, 0}, {-1, 0, 0}};
  const double v0 = dissimilarity(s0.velocities);

  SimOptions opt;
  opt.nu = p.nu;
  opt.stop_at_alignment = false;
  opt.record_stride = 0;
  const std::vector<SmoothedWienerPath> no_paths;

  SUBCASE("absolute accuracy at dt = 1e-3") {
    const SimResult res = integrate_continuous(s0, p, no_paths, 1.0, 1e-3, opt);
    const double got = dissimilarity(res.final_state.velocities);
    const double expected = v0 * std::exp(-2.0 * K);
    CHECK(std::fabs(got - expected) <= 1e-6 * expected);
  }
  SUBCASE("fourth-order convergence under step halving") {
    const double expected = v0 * std::exp(-2.0 * K);
    const SimResult coarse = integrate_continuous(s0, p, no_paths, 1.0, 1.0 / 32.0, opt);
    const SimResult fine = integrate_continuous(s0, p, no_paths, 1.0, 1.0 / 64.0, opt);
    const double e1 = std::fabs(dissimilarity(coarse.final_state.velocities) - expected);
    const double e2 = std::fabs(dissimilarity(fine.final_state.velocities) - expected);
    const double ratio = e1 / e2;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
  SUBCASE("mean velocity is conserved without noise") {
    SimOptions rec = opt;
    rec.record_stride = 1;
    rec.record_states = true;
    const SimResult res = integrate_continuous(s0, p, no_paths, 1.0, 1e-2, rec);
    const Vec3 m0 = mean(s0.velocities);
    for (const TrajectoryEntry& e : res.trajectory.entries)
      CHECK(norm(mean(e.state.velocities) - m0) <= 1e-10);
  }
  SUBCASE("step-size preconditions") {
    CHECK_THROWS_AS(integrate_continuous(s0, p, no_paths, 1.0, 0.2, opt),
                    std::invalid_argument);
  }
}

TEST_CASE("continuous decay and position bounds under held noise condition") {
  const ModelParams p = params(3, 1.0, 2.0, 0.0, 1e-9);
  const FlockState s0 = coincident_start(3, 0.1);
  const InitialQuantities q = initial_quantities(s0.positions, s0.velocities, p);
  const NoiseModel model = NoiseModel::smoothed_wiener(1e-4, 0.1);
  const double T = 1.2;
  const double dt = 0.1 / 32.0;
  const std::vector<SmoothedWienerPath> paths = build_noise_paths(model, 3, T + dt, 777u, 0);

  SimOptions opt;
  opt.nu = p.nu;
  opt.stop_at_alignment = false;
  opt.record_states = false;
  opt.record_fiedler = true;
  opt.noise_tolerance = q.noise_tolerance;
  const SimResult res = integrate_continuous(s0, p, paths, T, dt, opt);
  const auto& e = res.trajectory.entries;
  REQUIRE(e.size() > 10);

  double phi_min = e.front().fiedler;
  bool held = e.front().noise_ok;
  const double v0 = e.front().v_dis;
  const double x0 = e.front().x_dis;
  for (std::size_t i = 1; i < e.size(); ++i) {
    held = held && e[i].noise_ok;
    if (!held) break;
    phi_min = std::min(phi_min, e[i].fiedler);
    const double gap = phi_min - q.noise_tolerance;
    REQUIRE(gap > 0.0);
    CHECK(e[i].v_dis <= v0 * std::exp(-e[i].t * gap) + 1e-8);
    CHECK(e[i].x_dis <= x0 + v0 / gap + 1e-8);
  }
}

TEST_CASE("adding a common velocity changes no recorded dissimilarity") {
  const ModelParams p = params(4, 1.0, 1.5, 0.02, 1e-9);
  const FlockState s0 = coincident_start(4, 1.0);
  FlockState boosted = s0;
  const Vec3 u = {0.7, -0.3, 1.1};
  for (Vec3& v : boosted.velocities) v += u;

  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 500;
  opt.stop_at_alignment = false;
  opt.record_states = false;
  Rng rng1 = derive_stream(4242u, 0, 0, 0);
  Rng rng2 = derive_stream(4242u, 0, 0, 0);
  const NoiseModel model = NoiseModel::gaussian(0.01);
  const SimResult a = simulate_discrete(s0, p, model, opt, rng1);
  const SimResult b = simulate_discrete(boosted, p, model, opt, rng2);
  REQUIRE(a.trajectory.entries.size() == b.trajectory.entries.size());
  for (std::size_t i = 0; i < a.trajectory.entries.size(); ++i) {
    CHECK(std::fabs(a.trajectory.entries[i].v_dis - b.trajectory.entries[i].v_dis) <= 1e-9);
    CHECK(std::fabs(a.trajectory.entries[i].x_dis - b.trajectory.entries[i].x_dis) <= 1e-9);
  }
}

TEST_CASE("determinism: equal seeds give bitwise-equal trajectories") {
  const ModelParams p = params(3, 1.0, 1.0, 0.02, 1e-9);
  const FlockState s0 = coincident_start(3, 0.2);
  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 300;
  opt.stop_at_alignment = false;
  opt.record_states = false;
  const NoiseModel model = NoiseModel::gaussian(0.05);
  Rng rng1 = derive_stream(31337u, 5, 0, 0);
  Rng rng2 = derive_stream(31337u, 5, 0, 0);
  const SimResult a = simulate_discrete(s0, p, model, opt, rng1);
  const SimResult b = simulate_discrete(s0, p, model, opt, rng2);
  REQUIRE(a.trajectory.entries.size() == b.trajectory.entries.size());
  for (std::size_t i = 0; i < a.trajectory.entries.size(); ++i) {
    CHECK(a.trajectory.entries[i].v_dis == b.trajectory.entries[i].v_dis);
    CHECK(a.trajectory.entries[i].x_dis == b.trajectory.entries[i].x_dis);
  }
}

TEST_CASE("trajectory entries stay consistent with the stored states") {
  const ModelParams p = params(3, 1.0, 2.0, 0.05, 1e-9);
  const FlockState s0 = coincident_start(3, 0.5);
  SimOptions opt;
  opt.nu = p.nu;
  opt.max_steps = 50;
  opt.stop_at_alignment = false;
  opt.record_states = true;
  Rng rng(9u);
  const SimResult res = simulate_discrete(s0, p, NoiseModel::gaussian(0.02), opt, rng);
  double prev_t = -1.0;
  for (const TrajectoryEntry& e : res.trajectory.entries) {
    CHECK(e.t > prev_t);
    prev_t = e.t;
    CHECK(std::fabs(e.v_dis - dissimilarity(e.state.velocities)) <= 1e-10);
    CHECK(std::fabs(e.x_dis - dissimilarity(e.state.positions)) <= 1e-10);
  }
}

TEST_CASE("continuous alignment time is interpolated between steps") {
  const ModelParams p = params(2, 1.0, 0.0, 0.0, 0.5);
  FlockState s0;
  s0.positions = {{0, 0, 0}, {1, 0, 0}};
  s0.velocities = {{1, 0, 0}, {-1, 0, 0}};
  SimOptions opt;
  opt.nu = p.nu;
  opt.record_stride = 0;
  const std::vector<SmoothedWienerPath> no_paths;
  const SimResult res = integrate_continuous(s0, p, no_paths, 2.0, 1e-2, opt);
  REQUIRE(res.first_alignment.has_value());
  // closed form: sqrt(2) e^{-2t} = 1/2  =>  t = ln(2 sqrt 2) / 2
  const double expected = std::log(2.0 * std::sqrt(2.0)) / 2.0;
  CHECK(*res.first_alignment == doctest::Approx(expected).epsilon(1e-3));
}
