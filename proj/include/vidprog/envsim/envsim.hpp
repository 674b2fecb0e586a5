#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vidprog/core/schemas.hpp"
#include "vidprog/core/video.hpp"

namespace vidprog::envsim {

struct Range {
  double low = 0.0;
  double high = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

// Physical constants in normalized length units and seconds. A positive
// pole_length is both the dynamics length and the drawn pole length.
struct CartpoleConstants {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.2;
  double force = -1.0;
  double time_step = 0.02;

  friend bool operator==(const CartpoleConstants&, const CartpoleConstants&) = default;
};

struct EnvConfig {
  EnvKind kind = EnvKind::phyworld_uniform;
  int width = 128;
  int height = 128;
  int total_frames = 19;        // T
  int conditioning_frames = 3;  // F+1
  std::uint64_t seed = 0;
  // Ball speed per frame (sign sampled separately); for cartpole the cart
  // velocity in length units per second.
  Range velocity_range{0.005, 0.03};
  Range radius_range{0.04, 0.07};
  Range y_range{0.3, 0.7};
  // Cartpole initial conditions (seconds-based units).
  CartpoleConstants cartpole;
  Range position_range{0.45, 0.65};
  Range angle_range{-0.05, 0.05};
  Range angular_velocity_range{-0.3, 0.3};

  static EnvConfig defaults(EnvKind kind);

  // Throws config errors naming the offending field.
  void validate() const;

  // Same config with the velocity range multiplied (out-of-distribution split).
  EnvConfig scaled_velocities(double factor) const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

inline constexpr int kMaxResamples = 100;
inline constexpr double kOodVelocityFactor = 4.0;

// Cartpole state in physical (per-second) units.
struct CartpoleDynamicsState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

// One explicit Euler step of the cart-pole equations of motion.
CartpoleDynamicsState cartpole_reference_step(const CartpoleDynamicsState& s,
                                              const CartpoleConstants& c) noexcept;

// Conversions between physical states and schema states (per-frame
// velocities: v = dt * x_dot, omega = dt * theta_dot).
State to_schema_state(const CartpoleDynamicsState& s, const CartpoleConstants& c);
CartpoleDynamicsState from_schema_state(const State& s, const CartpoleConstants& c);

struct CollisionOutcome {
  double v1 = 0.0;
  double v2 = 0.0;
};

// 1-D collision with restitution e (e = 1: perfectly elastic).
CollisionOutcome collide(double m1, double v1, double m2, double v2, double restitution = 1.0);

inline double ball_mass(double radius) noexcept { return radius * radius; }

// One step of the two-ball world: uniform motion, except when the balls would
// touch or pass during this step while closing; then the velocities are
// replaced by the elastic outcome and both balls move with the new ones.
State collision_world_step(const State& s);

// Deterministic trajectory builders used by the generators and tests.
Trajectory uniform_trajectory(double x0, double y, double v, double r, int total_frames);
Trajectory cartpole_trajectory(const CartpoleDynamicsState& initial,
                               const CartpoleConstants& constants, int total_frames);

struct Generated {
  Video video;
  VideoMeta meta;
};

Generated gen_uniform(const EnvConfig& config, std::uint64_t seed);
Generated gen_collision(const EnvConfig& config, std::uint64_t seed);
Generated gen_cartpole(const EnvConfig& config, std::uint64_t seed);
Generated generate(const EnvConfig& config, std::uint64_t seed);

// Videos with seeds base_seed .. base_seed+n-1; byte-identical for equal input.
Dataset sample_dataset(const EnvConfig& config, int n, std::uint64_t base_seed, int jobs = 1);

}  // namespace vidprog::envsim
