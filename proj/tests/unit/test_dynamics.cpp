#include <cmath>

#include "doctest.h"
#include "vidprog/core/error.hpp"
#include "vidprog/core/rng.hpp"
#include "vidprog/dsl/interpreter.hpp"
#include "vidprog/dynamics/dynamics.hpp"
#include "vidprog/envsim/envsim.hpp"
#include "vidprog/perceive/perceive.hpp"

using namespace vidprog;
using namespace vidprog::dynamics;

namespace {

const DynamicsProgram& tmpl(EnvKind env, std::string_view id) {
  return builtin_templates().get(env, id);
}

State pair(double x1, double v1, double r1, double x2, double v2, double r2) {
  return State(ball_schema(EnvKind::phyworld_collision), {x1, 0.5, v1, r1, x2, 0.5, v2, r2});
}

}  // namespace

TEST_CASE("inertia step") {
  const auto& p = tmpl(EnvKind::phyworld_uniform, "uniform-inertia");
  const auto next = transition(p, State(ball_schema(EnvKind::phyworld_uniform), {0.2, 0.5, 0.02, 0.05}));
  CHECK(next[0] == doctest::Approx(0.22));
  CHECK(next[2] == 0.02);
  CHECK(next[1] == 0.5);
  CHECK(next[3] == 0.05);
}

TEST_CASE("collision template exchanges equal-mass velocities at contact") {
  const auto& p = tmpl(EnvKind::phyworld_collision, "elastic-collision-1d");
  const auto s = pair(0.4, 0.02, 0.05, 0.505, -0.02, 0.05);
  const auto next = transition(p, s);
  CHECK(next[2] == doctest::Approx(-0.02));
  CHECK(next[6] == doctest::Approx(0.02));
  CHECK(next[0] == doctest::Approx(0.38));
  CHECK(next[4] == doctest::Approx(0.525));
  // Far apart: plain inertia.
  const auto far = transition(p, pair(0.2, 0.02, 0.05, 0.7, -0.02, 0.05));
  CHECK(far[2] == 0.02);
  CHECK(far[0] == doctest::Approx(0.22));
}

TEST_CASE("collision template matches the world step of the generator") {
  const auto& p = tmpl(EnvKind::phyworld_collision, "elastic-collision-1d");
  const auto config = envsim::EnvConfig::defaults(EnvKind::phyworld_collision);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto truth = *envsim::gen_collision(config, seed).video.truth();
    const auto r = rollout(p, truth[0], static_cast<int>(truth.size()) - 1);
    for (std::size_t t = 0; t < truth.size(); ++t) {
      for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(r.trajectory[t][i] - truth[t][i]) <= 1e-12);
    }
  }
}

TEST_CASE("cartpole template agrees with the reference step on 1000 states") {
  SplitMix64 rng(2024);
  const auto base = cartpole_euler_template();
  for (const envsim::CartpoleConstants k :
       {envsim::CartpoleConstants{9.8, 1.0, 0.1, 0.5, -10.0, 0.02}, envsim::CartpoleConstants{}}) {
    const auto p = base.with_values(
        {k.gravity, k.cart_mass, k.pole_mass, k.pole_length, k.force, k.time_step});
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const envsim::CartpoleDynamicsState phys{rng.uniform(0.1, 0.9), rng.uniform(-2.0, 2.0),
                                               rng.uniform(-3.0, 3.0), rng.uniform(-8.0, 8.0)};
      const State s(cartpole_schema(), {phys.x, k.time_step * phys.x_dot, phys.theta,
                                        k.time_step * phys.theta_dot, 0.2});
      const auto ref = envsim::cartpole_reference_step(phys, k);
      const auto out = step(p, s);
      CHECK(out.clamped.empty());
      worst = std::max({worst, std::abs(out.state[0] - ref.x),
                        std::abs(out.state[1] - k.time_step * ref.x_dot),
                        std::abs(out.state[2] - ref.theta),
                        std::abs(out.state[3] - k.time_step * ref.theta_dot)});
      CHECK(out.state[4] == 0.2);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("rollout") {
  const auto& p = tmpl(EnvKind::phyworld_uniform, "uniform-inertia");
  const State s0(ball_schema(EnvKind::phyworld_uniform), {0.2, 0.5, 0.02, 0.05});
  CHECK(rollout(p, s0, 0).trajectory.size() == 1);
  CHECK(rollout(p, s0, 0).trajectory[0] == s0);
  CHECK_THROWS_AS(rollout(p, s0, -1), Error);

  // Runs off the right edge: clamped, and reported.
  const auto r = rollout(p, State(ball_schema(EnvKind::phyworld_uniform), {0.2, 0.5, 0.03, 0.05}), 50);
  CHECK(r.trajectory.size() == 51);
  CHECK(r.trajectory.back()[0] == 1.0);
  REQUIRE(!r.clamps.empty());
  CHECK(r.clamps.front().step == 27);
  CHECK(r.clamps.front().attribute == "x1");
}

TEST_CASE("evaluation errors carry position and step") {
  const DynamicsProgram bad("bad", ball_schema(EnvKind::phyworld_uniform),
                            ParamVector({{"k", 0.0, 0.0, 1.0}}),
                            "default:\n  x1 <- x1 + vx1 / k;\n  y1 <- y1;\n  vx1 <- vx1;\n  r1 <- r1;\n");
  const State s0(ball_schema(EnvKind::phyworld_uniform), {0.2, 0.5, 0.02, 0.05});
  try {
    rollout(bad, s0, 3);
    FAIL("expected an evaluation error");
  } catch (const dsl::EvalError& e) {
    CHECK(e.pos().line == 2);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("inertia rollout from perceived conditioning state") {
  auto config = envsim::EnvConfig::defaults(EnvKind::phyworld_uniform);
  const auto rcfg = render::RenderConfig::defaults(EnvKind::phyworld_uniform, 128, 128);
  const auto& p = tmpl(EnvKind::phyworld_uniform, "uniform-inertia");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = envsim::gen_uniform(config, seed);
    const auto& frames = g.video.frames();
    const auto perceived =
        perceive::perceive_frames(std::span<const Frame>(frames.data(), 3), rcfg);
    const auto r = rollout(p, perceived[2], 17);
    const auto& truth = *g.video.truth();
    for (int t = 0; t <= 17; ++t) {
      // Position error grows by at most the velocity error each step.
      CHECK(std::abs(r.trajectory[t][0] - truth[t + 2][0]) <= (1.5 + 3.0 * t) / 128.0);
    }
  }
}

TEST_CASE("collision rollout conserves momentum; guard does not refire") {
  const auto& p = tmpl(EnvKind::phyworld_collision, "elastic-collision-1d");
  SplitMix64 rng(9);
  int fired = 0;
  for (int i = 0; i < 2000; ++i) {
    const double r1 = rng.uniform(0.02, 0.1), r2 = rng.uniform(0.02, 0.1);
    const double x1 = rng.uniform(0.2, 0.4);
    const double v1 = rng.uniform(-0.05, 0.05), v2 = rng.uniform(-0.05, 0.05);
    const double x2 = x1 + r1 + r2 + rng.uniform(0.0, 0.08);
    const auto s = pair(x1, v1, r1, x2, v2, r2);
    const bool fires = dsl::matching_rule(p.program(), std::vector<double>{x1, 0.5, v1, r1, x2, 0.5, v2, r2, 1.0}) == 0;
    const auto n = transition(p, s);
    const double m1 = r1 * r1, m2 = r2 * r2;
    const double p0 = m1 * v1 + m2 * v2, p1 = m1 * n[2] + m2 * n[6];
    const double e0 = m1 * v1 * v1 + m2 * v2 * v2, e1 = m1 * n[2] * n[2] + m2 * n[6] * n[6];
    CHECK(std::abs(p1 - p0) <= 1e-9 * (m1 * std::abs(v1) + m2 * std::abs(v2)));
    CHECK(std::abs(e1 - e0) <= 1e-9 * e0);
    if (fires) {
      ++fired;
      CHECK(n[2] - n[6] <= 0.0);
    }
  }
  CHECK(fired > 100);
}

TEST_CASE("restitution below one loses energy but keeps momentum") {
  const auto p = elastic_collision_template().with_values({0.5});
  const auto s = pair(0.4, 0.03, 0.06, 0.515, -0.01, 0.04);
  const auto n = transition(p, s);
  const double m1 = 0.0036, m2 = 0.0016;
  CHECK(m1 * n[2] + m2 * n[6] == doctest::Approx(m1 * 0.03 - m2 * 0.01).epsilon(1e-12));
  CHECK(n[6] - n[2] == doctest::Approx(0.5 * 0.04).epsilon(1e-12));
  CHECK_THROWS_AS(elastic_collision_template().with_values({1.5}), Error);
}

TEST_CASE("registry") {
  const auto& reg = builtin_templates();
  CHECK(reg.contains(EnvKind::phyworld_uniform, "uniform-inertia"));
  CHECK(reg.contains(EnvKind::phyworld_uniform, kDistractorId));
  CHECK(reg.contains(EnvKind::phyworld_collision, "elastic-collision-1d"));
  CHECK(reg.contains(EnvKind::cartpole, "cartpole-euler"));
  CHECK_FALSE(reg.contains(EnvKind::cartpole, "wall-bounce"));
  CHECK_THROWS_AS(reg.get(EnvKind::cartpole, "nope"), Error);
  for (auto env : {EnvKind::phyworld_uniform, EnvKind::phyworld_collision, EnvKind::cartpole}) {
    for (const auto& p : reg.lookup(env)) {
      // Round trip through the wire format.
      const DynamicsProgram again(p.id(), p.schema_ref(), p.params(), p.source());
      CHECK(dsl::same_structure(again.program(), p.program()));
      CHECK(p.schema().env_id() == to_string(env));
    }
    CHECK(reg.contains(env, true_template_id(env)));
  }
  TemplateRegistry r;
  r.add(EnvKind::cartpole, cartpole_euler_template());
  CHECK_THROWS_AS(r.add(EnvKind::cartpole, cartpole_euler_template()), Error);
  CHECK_THROWS_AS(r.lookup(EnvKind::phyworld_uniform), Error);
}

TEST_CASE("invalid programs are rejected at construction") {
  CHECK_THROWS_AS(DynamicsProgram("p", ball_schema(EnvKind::phyworld_uniform), {},
                                  "default:\n  x1 <- x1 + g;\n  y1 <- y1;\n  vx1 <- vx1;\n  r1 <- r1;\n"),
                  Error);
  CHECK_THROWS_AS(DynamicsProgram("p", ball_schema(EnvKind::phyworld_uniform), {},
                                  "default:\n  x1 <- x1;\n"),
                  Error);
  CHECK_THROWS_AS(DynamicsProgram("Bad Id", ball_schema(EnvKind::phyworld_uniform), {},
                                  inertia_source(1)),
                  Error);
  const auto s = State(cartpole_schema(), {0.5, 0.0, 0.0, 0.0, 0.2});
  CHECK_THROWS_AS(transition(builtin_templates().get(EnvKind::phyworld_uniform, "uniform-inertia"), s),
                  Error);
}
