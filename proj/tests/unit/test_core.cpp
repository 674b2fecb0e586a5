#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vidprog/core/error.hpp"
#include "vidprog/core/frame.hpp"
#include "vidprog/core/params.hpp"
#include "vidprog/core/rng.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/core/video.hpp"

using namespace vidprog;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected vidprog::Error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("validate_state accepts inclusive bounds and names breaches") {
  const auto schema = ball_schema(EnvKind::phyworld_uniform);
  const State at_lower(schema, {0.0, 0.5, -1.0, 0.05});
  CHECK(validate_state(at_lower).empty());

  const auto above = State::unchecked(schema, {1.0 + 1e-6, 0.5, 0.0, 0.05});
  const auto violations = validate_state(above);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].attribute == "x1");

  const auto short_state = State::unchecked(schema, {0.1, 0.2});
  const auto length = validate_state(short_state);
  REQUIRE(length.size() == 1);
  CHECK(length[0].attribute.empty());
}

TEST_CASE("public State constructor enforces invariants") {
  const auto schema = ball_schema(EnvKind::phyworld_uniform);
  CHECK(code_of([&] { State(schema, {0.1, 0.2}); }) == ErrorCode::shape_mismatch);
  CHECK(code_of([&] { State(schema, {0.1, 0.2, 2.0, 0.05}); }) == ErrorCode::out_of_bounds);
}

TEST_CASE("attribute lookup") {
  const State cart(cartpole_schema(), {0.1, 0.0, 0.05, 0.0, 0.2});
  CHECK(attribute(cart, "pole_angle") == 0.05);
  CHECK(code_of([&] { attribute(cart, "pole_angel"); }) == ErrorCode::unknown_attribute);
  try {
    attribute(cart, "pole_angel");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("pole_angel") != std::string::npos);
  }
  const State ball(ball_schema(EnvKind::phyworld_uniform), {0.37, 0.5, 0.01, 0.05});
  CHECK(attribute(ball, "x1") == 0.37);
}

TEST_CASE("schema invariants") {
  CHECK(code_of([] { StateSchema("e", {}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] {
          StateSchema("e", {{"a", Unit::dimensionless, 0, 1, Role::position, ""},
                            {"a", Unit::dimensionless, 0, 1, Role::position, ""}});
        }) == ErrorCode::invalid_argument);
  CHECK(code_of([] {
          StateSchema("e", {{"when", Unit::dimensionless, 0, 1, Role::position, ""}});
        }) == ErrorCode::invalid_argument);
  CHECK(code_of([] {
          StateSchema("e", {{"a", Unit::dimensionless, 1, 1, Role::position, ""}});
        }) == ErrorCode::invalid_argument);
  CHECK(schema_for(EnvKind::phyworld_collision)->size() == 8);
  CHECK(code_of([] { parse_env_kind("pong"); }) == ErrorCode::unsupported_env);
}

TEST_CASE("frame invariants") {
  Frame f(4, 3, Rgb{1, 2, 3});
  CHECK(f.bytes().size() == 36);
  f.set(3, 2, {9, 8, 7});
  CHECK(f.at(3, 2) == Rgb{9, 8, 7});
  CHECK(f.at(0, 0) == Rgb{1, 2, 3});
  CHECK(code_of([] { Frame(0, 3); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { Frame(2, 2, std::vector<std::uint8_t>(11)); }) == ErrorCode::shape_mismatch);
}

TEST_CASE("video and trajectory invariants") {
  const auto schema = ball_schema(EnvKind::phyworld_uniform);
  std::vector<Frame> frames(3, Frame(8, 8));
  CHECK_NOTHROW(Video(frames, 2, 1, "phyworld-uniform"));
  CHECK(code_of([&] { Video(frames, 3, 1, "phyworld-uniform"); }) == ErrorCode::shape_mismatch);
  CHECK(code_of([&] { Video(frames, 2, 3, "phyworld-uniform"); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([] { Trajectory(std::vector<State>{}); }) == ErrorCode::precondition);
  const State a(schema, {0.1, 0.5, 0.0, 0.05});
  const State b(cartpole_schema(), {0.1, 0.0, 0.0, 0.0, 0.2});
  CHECK(code_of([&] { Trajectory({a, b}); }) == ErrorCode::schema_mismatch);
}

TEST_CASE("param vector bounds") {
  ParamVector p({{"gravity", 9.8, 1.0, 20.0}, {"e", 1.0, 0.5, 1.0}});
  CHECK(p.index_of("e") == 1u);
  CHECK(p.with_values({5.0, 0.5}).values() == std::vector<double>{5.0, 0.5});
  CHECK(code_of([&] { p.with_values({0.0, 0.5}); }) == ErrorCode::out_of_bounds);
  CHECK(code_of([] { ParamVector({{"a", 0, 0, 1}, {"a", 0, 0, 1}}); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("splitmix64 reference values and determinism") {
  // First outputs for seed 1234567 from the published reference implementation.
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 6457827717110365317ULL);
  CHECK(rng.next() == 3203168211198807973ULL);
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
  CHECK(wrap_angle(2 * pi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
}
