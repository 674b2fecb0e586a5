#include "vidprog/core/schemas.hpp"

#include <numbers>
#include <string>

#include "vidprog/core/error.hpp"

namespace vidprog {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::phyworld_uniform: return "phyworld-uniform";
    case EnvKind::phyworld_collision: return "phyworld-collision";
    case EnvKind::cartpole: return "cartpole";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view text) {
  for (auto k : {EnvKind::phyworld_uniform, EnvKind::phyworld_collision, EnvKind::cartpole}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::unsupported_env, "unsupported environment '" + std::string(text) + "'");
}

int ball_count(EnvKind kind) {
  switch (kind) {
    case EnvKind::phyworld_uniform: return 1;
    case EnvKind::phyworld_collision: return 2;
    case EnvKind::cartpole: return 0;
  }
  return 0;
}

SchemaRef ball_schema(EnvKind kind) {
  const int balls = ball_count(kind);
  if (balls == 0) fail(ErrorCode::unsupported_env, "environment has no balls");
  std::vector<AttributeDescriptor> attrs;
  for (int k = 1; k <= balls; ++k) {
    const auto id = std::to_string(k);
    attrs.push_back({"x" + id, Unit::normalized_length, 0.0, 1.0, Role::position, ""});
    attrs.push_back({"y" + id, Unit::normalized_length, 0.0, 1.0, Role::position, ""});
    attrs.push_back({"vx" + id, Unit::normalized_length_per_frame, -kVelocityBound,
                     kVelocityBound, Role::velocity, "x" + id});
    attrs.push_back({"r" + id, Unit::normalized_length, kGeometryLower, kGeometryUpper,
                     Role::geometry, ""});
  }
  return std::make_shared<const StateSchema>(std::string(to_string(kind)), std::move(attrs));
}

SchemaRef cartpole_schema() {
  constexpr double pi = std::numbers::pi;
  std::vector<AttributeDescriptor> attrs = {
      {"cart_position", Unit::normalized_length, 0.0, 1.0, Role::position, ""},
      {"cart_velocity", Unit::normalized_length_per_frame, -kVelocityBound, kVelocityBound,
       Role::velocity, "cart_position"},
      {"pole_angle", Unit::radians, -pi, pi, Role::angle, ""},
      {"pole_angular_velocity", Unit::radians_per_frame, -4.0 * pi, 4.0 * pi,
       Role::angular_velocity, "pole_angle"},
      {"pole_length", Unit::normalized_length, kGeometryLower, kGeometryUpper, Role::geometry,
       ""},
  };
  return std::make_shared<const StateSchema>("cartpole", std::move(attrs));
}

SchemaRef schema_for(EnvKind kind) {
  return kind == EnvKind::cartpole ? cartpole_schema() : ball_schema(kind);
}

}  // namespace vidprog
