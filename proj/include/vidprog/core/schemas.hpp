#pragma once

#include <string_view>

#include "vidprog/core/state.hpp"

namespace vidprog {

enum class EnvKind { phyworld_uniform, phyworld_collision, cartpole };

std::string_view to_string(EnvKind kind);
// Throws unsupported-env.
EnvKind parse_env_kind(std::string_view text);

// Default attribute bounds.
inline constexpr double kVelocityBound = 1.0;
inline constexpr double kGeometryLower = 1e-6;
inline constexpr double kGeometryUpper = 0.5;

// Balls are numbered from 1: x<k>, y<k>, vx<k>, r<k>.
SchemaRef ball_schema(EnvKind kind);
// cart_position, cart_velocity, pole_angle, pole_angular_velocity, pole_length.
SchemaRef cartpole_schema();
SchemaRef schema_for(EnvKind kind);

int ball_count(EnvKind kind);

}  // namespace vidprog
