#include "vidprog/envsim/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "vidprog/core/error.hpp"
#include "vidprog/core/parallel.hpp"
#include "vidprog/core/rng.hpp"
#include "vidprog/render/render.hpp"

namespace vidprog::envsim {

namespace {

void check_range(const Range& r, const char* field) {
  if (!(r.low <= r.high) || !std::isfinite(r.low) || !std::isfinite(r.high)) {
    fail(ErrorCode::config, std::string("config field '") + field + "' needs low <= high");
  }
}

// Uniform-motion values live on a 2^-24 grid so that x0 + v*t is exact.
double quantize(double v) { return std::round(v * 0x1.0p24) * 0x1.0p-24; }

double sample(SplitMix64& rng, const Range& r) { return rng.uniform(r.low, r.high); }

std::uint64_t mix_seed(std::uint64_t seed, EnvKind kind) {
  return seed ^ (0xA0761D6478BD642FULL * (static_cast<std::uint64_t>(kind) + 1));
}

Video make_video(const EnvConfig& config, Trajectory truth) {
  const auto rc = render::RenderConfig::defaults(config.kind, config.width, config.height);
  auto frames = render::render_trajectory(truth, rc);
  return Video(std::move(frames), config.total_frames, config.conditioning_frames,
               std::string(to_string(config.kind)), std::move(truth));
}

// Vertical range that keeps a ball of radius r inside the frame.
Range y_limits(const EnvConfig& config, double r) {
  const double bottom = static_cast<double>(config.height) / config.width;
  return {std::max(config.y_range.low, r), std::min(config.y_range.high, bottom - r)};
}

struct BallPair {
  double x1, v1, r1, x2, v2, r2;
};

bool pair_closing_contact(const BallPair& p) {
  return (p.x2 + p.v2) - (p.x1 + p.v1) <= p.r1 + p.r2 && p.v1 - p.v2 > 0.0;
}

BallPair pair_step(const BallPair& p, bool& collided) {
  BallPair n = p;
  collided = pair_closing_contact(p);
  if (collided) {
    const auto out = collide(ball_mass(p.r1), p.v1, ball_mass(p.r2), p.v2);
    n.v1 = out.v1;
    n.v2 = out.v2;
  }
  n.x1 = p.x1 + n.v1;
  n.x2 = p.x2 + n.v2;
  return n;
}

std::vector<BallPair> simulate_pair(BallPair start, int total_frames, int& collisions) {
  std::vector<BallPair> out{start};
  collisions = 0;
  for (int t = 0; t < total_frames; ++t) {
    bool hit = false;
    out.push_back(pair_step(out.back(), hit));
    collisions += hit ? 1 : 0;
  }
  return out;
}

}  // namespace

EnvConfig EnvConfig::defaults(EnvKind kind) {
  EnvConfig c;
  c.kind = kind;
  if (kind == EnvKind::cartpole) {
    c.width = 600;
    c.height = 400;
    c.total_frames = 19;
    c.conditioning_frames = 10;
    c.velocity_range = {-0.2, 0.2};
  } else if (kind == EnvKind::phyworld_collision) {
    c.radius_range = {0.04, 0.08};
  }
  return c;
}

void EnvConfig::validate() const {
  if (width < 32 || height < 32) fail(ErrorCode::config, "config field 'width'/'height' must be >= 32");
  if (conditioning_frames < 1) fail(ErrorCode::config, "config field 'conditioning_frames' must be >= 1");
  if (total_frames < conditioning_frames) {
    fail(ErrorCode::config, "config field 'total_frames' must be >= conditioning_frames");
  }
  check_range(velocity_range, "velocity_range");
  check_range(radius_range, "radius_range");
  check_range(y_range, "y_range");
  check_range(position_range, "position_range");
  check_range(angle_range, "angle_range");
  check_range(angular_velocity_range, "angular_velocity_range");
  if (kind != EnvKind::cartpole) {
    if (radius_range.low < kGeometryLower || radius_range.high > kGeometryUpper) {
      fail(ErrorCode::config, "config field 'radius_range' must lie in (0, 0.5]");
    }
    if (velocity_range.low < 0.0) {
      fail(ErrorCode::config, "config field 'velocity_range' is a speed range (low >= 0)");
    }
  } else {
    const auto& k = cartpole;
    if (!(k.cart_mass > 0 && k.pole_mass > 0 && k.pole_length > 0 && k.time_step > 0)) {
      fail(ErrorCode::config, "config field 'cartpole' needs positive masses, length, time_step");
    }
    if (k.pole_length > kGeometryUpper) {
      fail(ErrorCode::config, "config field 'cartpole.pole_length' must be <= 0.5");
    }
  }
}

EnvConfig EnvConfig::scaled_velocities(double factor) const {
  EnvConfig c = *this;
  c.velocity_range = {velocity_range.low * factor, velocity_range.high * factor};
  return c;
}

CartpoleDynamicsState cartpole_reference_step(const CartpoleDynamicsState& s,
                                              const CartpoleConstants& c) noexcept {
  const double total_mass = c.cart_mass + c.pole_mass;
  const double pole_mass_length = c.pole_mass * c.pole_length;
  const double cos_theta = std::cos(s.theta);
  const double sin_theta = std::sin(s.theta);
  const double temp =
      (c.force + pole_mass_length * s.theta_dot * s.theta_dot * sin_theta) / total_mass;
  const double theta_acc =
      (c.gravity * sin_theta - cos_theta * temp) /
      (c.pole_length * (4.0 / 3.0 - c.pole_mass * cos_theta * cos_theta / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_theta / total_mass;
  return {s.x + c.time_step * s.x_dot, s.x_dot + c.time_step * x_acc,
          s.theta + c.time_step * s.theta_dot, s.theta_dot + c.time_step * theta_acc};
}

State to_schema_state(const CartpoleDynamicsState& s, const CartpoleConstants& c) {
  return State(cartpole_schema(), {s.x, c.time_step * s.x_dot, s.theta,
                                   c.time_step * s.theta_dot, c.pole_length});
}

CartpoleDynamicsState from_schema_state(const State& s, const CartpoleConstants& c) {
  return {s[0], s[1] / c.time_step, s[2], s[3] / c.time_step};
}

CollisionOutcome collide(double m1, double v1, double m2, double v2, double restitution) {
  const double total = m1 + m2;
  return {((m1 - restitution * m2) * v1 + (1.0 + restitution) * m2 * v2) / total,
          ((m2 - restitution * m1) * v2 + (1.0 + restitution) * m1 * v1) / total};
}

State collision_world_step(const State& s) {
  const BallPair p{s[0], s[2], s[3], s[4], s[6], s[7]};
  bool hit = false;
  const BallPair n = pair_step(p, hit);
  return State::unchecked(s.schema_ref(), {n.x1, s[1], n.v1, n.r1, n.x2, s[5], n.v2, n.r2});
}

Trajectory uniform_trajectory(double x0, double y, double v, double r, int total_frames) {
  const auto schema = ball_schema(EnvKind::phyworld_uniform);
  std::vector<State> states;
  for (int t = 0; t <= total_frames; ++t) {
    states.emplace_back(schema, std::vector<double>{x0 + v * t, y, v, r});
  }
  return Trajectory(std::move(states));
}

Trajectory cartpole_trajectory(const CartpoleDynamicsState& initial,
                               const CartpoleConstants& constants, int total_frames) {
  std::vector<State> states;
  CartpoleDynamicsState s = initial;
  for (int t = 0; t <= total_frames; ++t) {
    states.push_back(to_schema_state(s, constants));
    s = cartpole_reference_step(s, constants);
  }
  return Trajectory(std::move(states));
}

Generated gen_uniform(const EnvConfig& config, std::uint64_t seed) {
  if (config.kind != EnvKind::phyworld_uniform) {
    fail(ErrorCode::precondition, "gen_uniform needs a phyworld-uniform config");
  }
  config.validate();
  SplitMix64 rng(mix_seed(seed, config.kind));
  const int T = config.total_frames;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const double r = quantize(sample(rng, config.radius_range));
    const double speed = quantize(sample(rng, config.velocity_range));
    const double v = rng.coin() ? speed : -speed;
    const Range ys = y_limits(config, r);
    // x_t = x0 + v t must keep [x - r, x + r] inside [0, 1] for every t.
    const double lo = r - std::min(0.0, v * T);
    const double hi = 1.0 - r - std::max(0.0, v * T);
    if (lo > hi || ys.low > ys.high) continue;
    const double x0 = std::clamp(quantize(rng.uniform(lo, hi)), lo, hi);
    const double y = quantize(rng.uniform(ys.low, ys.high));
    VideoMeta meta{seed, {{"x0", x0}, {"y", y}, {"v", v}, {"r", r}}};
    return {make_video(config, uniform_trajectory(x0, y, v, r, T)), std::move(meta)};
  }
  fail(ErrorCode::infeasible_config, "no contained uniform trajectory after " +
                                         std::to_string(kMaxResamples) + " samples (seed " +
                                         std::to_string(seed) + ")");
}

Generated gen_collision(const EnvConfig& config, std::uint64_t seed) {
  if (config.kind != EnvKind::phyworld_collision) {
    fail(ErrorCode::precondition, "gen_collision needs a phyworld-collision config");
  }
  config.validate();
  SplitMix64 rng(mix_seed(seed, config.kind));
  const int T = config.total_frames;
  const int F = config.conditioning_frames - 1;
  int first = std::max(1, F + 1);
  int last = T - 2;
  if (first > last) {
    first = 1;
    last = T - 1;
  }
  if (first > last) fail(ErrorCode::infeasible_config, "horizon too short for a collision");

  const auto schema = ball_schema(EnvKind::phyworld_collision);
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const double r1 = sample(rng, config.radius_range);
    const double r2 = sample(rng, config.radius_range);
    const double v1 = sample(rng, config.velocity_range);
    const double s2 = sample(rng, config.velocity_range);
    const double v2 = rng.coin() ? s2 : -s2;
    const double u = rng.uniform(0.1, 0.9);
    const Range ys = y_limits(config, std::max(r1, r2));
    const double y = rng.uniform(ys.low, ys.high);
    if (v1 - v2 <= 0.0 || ys.low > ys.high) continue;

    std::vector<int> steps(static_cast<std::size_t>(last - first + 1));
    std::iota(steps.begin(), steps.end(), first);
    for (std::size_t i = steps.size(); i > 1; --i) {
      std::swap(steps[i - 1], steps[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    }
    for (int tc : steps) {
      // Place the balls so the contact rule fires exactly at step tc.
      const double gap = u * (v1 - v2);
      BallPair start{-tc * v1, v1, r1, r1 + r2 + gap - tc * v2, v2, r2};
      int collisions = 0;
      auto path = simulate_pair(start, T, collisions);
      double lo = 1e300, hi = -1e300;
      for (const auto& p : path) {
        lo = std::min({lo, p.x1 - p.r1, p.x2 - p.r2});
        hi = std::max({hi, p.x1 + p.r1, p.x2 + p.r2});
      }
      if (collisions != 1 || hi - lo > 1.0) continue;
      const double shift = rng.uniform(-lo, 1.0 - hi);
      start.x1 += shift;
      start.x2 += shift;
      path = simulate_pair(start, T, collisions);
      std::vector<State> states;
      bool ok = collisions == 1;
      for (const auto& p : path) {
        auto s = State::unchecked(schema, {p.x1, y, p.v1, p.r1, p.x2, y, p.v2, p.r2});
        ok = ok && validate_state(s).empty() && p.x1 - p.r1 >= 0.0 && p.x2 + p.r2 <= 1.0;
        states.push_back(std::move(s));
      }
      if (!ok) continue;
      VideoMeta meta{seed,
                     {{"r1", r1}, {"r2", r2}, {"v1", v1}, {"v2", v2}, {"y", y},
                      {"collision_step", tc}, {"x1_0", start.x1}, {"x2_0", start.x2}}};
      return {make_video(config, Trajectory(std::move(states))), std::move(meta)};
    }
  }
  fail(ErrorCode::infeasible_config, "no in-window contained collision after " +
                                         std::to_string(kMaxResamples) + " samples (seed " +
                                         std::to_string(seed) + ")");
}

Generated gen_cartpole(const EnvConfig& config, std::uint64_t seed) {
  if (config.kind != EnvKind::cartpole) {
    fail(ErrorCode::precondition, "gen_cartpole needs a cartpole config");
  }
  config.validate();
  SplitMix64 rng(mix_seed(seed, config.kind));
  const auto schema = cartpole_schema();
  const auto& k = config.cartpole;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    CartpoleDynamicsState s0{sample(rng, config.position_range),
                             sample(rng, config.velocity_range),
                             sample(rng, config.angle_range),
                             sample(rng, config.angular_velocity_range)};
    std::vector<State> states;
    CartpoleDynamicsState s = s0;
    bool ok = true;
    for (int t = 0; t <= config.total_frames && ok; ++t) {
      auto st = State::unchecked(schema, {s.x, k.time_step * s.x_dot, s.theta,
                                          k.time_step * s.theta_dot, k.pole_length});
      ok = validate_state(st).empty();
      states.push_back(std::move(st));
      s = cartpole_reference_step(s, k);
    }
    if (!ok) continue;
    VideoMeta meta{seed,
                   {{"x0", s0.x}, {"x_dot0", s0.x_dot}, {"theta0", s0.theta},
                    {"theta_dot0", s0.theta_dot}}};
    return {make_video(config, Trajectory(std::move(states))), std::move(meta)};
  }
  fail(ErrorCode::infeasible_config, "cart leaves the track in every one of " +
                                         std::to_string(kMaxResamples) + " samples (seed " +
                                         std::to_string(seed) + ")");
}

Generated generate(const EnvConfig& config, std::uint64_t seed) {
  switch (config.kind) {
    case EnvKind::phyworld_uniform: return gen_uniform(config, seed);
    case EnvKind::phyworld_collision: return gen_collision(config, seed);
    case EnvKind::cartpole: return gen_cartpole(config, seed);
  }
  fail(ErrorCode::unsupported_env, "unknown environment");
}

Dataset sample_dataset(const EnvConfig& config, int n, std::uint64_t base_seed, int jobs) {
  if (n < 1) fail(ErrorCode::precondition, "dataset size must be >= 1");
  std::vector<std::optional<Generated>> slots(static_cast<std::size_t>(n));
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    slots[i].emplace(generate(config, base_seed + i));
  });
  std::vector<Video> videos;
  std::vector<VideoMeta> manifest;
  for (auto& g : slots) {
    videos.push_back(std::move(g->video));
    manifest.push_back(std::move(g->meta));
  }
  return Dataset(std::move(videos), std::move(manifest));
}

}  // namespace vidprog::envsim
