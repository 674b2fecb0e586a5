#include "vidprog/perceive/perceive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>

#include "vidprog/core/error.hpp"
#include "vidprog/core/parallel.hpp"
#include "vidprog/core/schemas.hpp"

namespace vidprog::perceive {

namespace {

double axis_from_vertical(double dx, double dy) {
  double a = std::atan2(dx, -dy);
  while (a > std::numbers::pi / 2) a -= std::numbers::pi;
  while (a <= -std::numbers::pi / 2) a += std::numbers::pi;
  return a;
}

Moments require_object(const Frame& frame, Rgb key, const std::string& id) {
  const Mask m = segment_color(frame, key);
  if (m.count() == 0) {
    fail(ErrorCode::missing_object, "object '" + id + "' not visible in frame");
  }
  return moments(m);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Binding {
  std::string object_id;
  enum class Field { cx, cy, radius, angle, length } field;
};

// Which observation field feeds each measured attribute of a schema.
std::map<std::string, Binding> bindings_for(const StateSchema& schema) {
  std::map<std::string, Binding> out;
  const EnvKind env = parse_env_kind(schema.env_id());
  if (env == EnvKind::cartpole) {
    out["cart_position"] = {"cart", Binding::Field::cx};
    out["pole_angle"] = {"pole", Binding::Field::angle};
    out["pole_length"] = {"pole", Binding::Field::length};
    return out;
  }
  for (int k = 1; k <= ball_count(env); ++k) {
    const auto id = std::to_string(k);
    out["x" + id] = {"ball" + id, Binding::Field::cx};
    out["y" + id] = {"ball" + id, Binding::Field::cy};
    out["r" + id] = {"ball" + id, Binding::Field::radius};
  }
  return out;
}

double field_value(const ObjectObservation& o, Binding::Field f) {
  switch (f) {
    case Binding::Field::cx: return o.cx;
    case Binding::Field::cy: return o.cy;
    case Binding::Field::radius: return std::sqrt(o.area / std::numbers::pi);
    case Binding::Field::angle: return o.principal_angle;
    case Binding::Field::length: return o.length;
  }
  return 0.0;
}

}  // namespace

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(on.begin(), on.end(), std::uint8_t{1}));
}

Mask segment_color(const Frame& frame, Rgb key, int tolerance) {
  if (tolerance < 0) fail(ErrorCode::precondition, "tolerance must be >= 0");
  Mask m{frame.width(), frame.height(), {}};
  m.on.resize(static_cast<std::size_t>(frame.width()) * frame.height());
  const auto bytes = frame.bytes();
  for (std::size_t i = 0; i < m.on.size(); ++i) {
    const int dr = std::abs(int{bytes[3 * i]} - key.r);
    const int dg = std::abs(int{bytes[3 * i + 1]} - key.g);
    const int db = std::abs(int{bytes[3 * i + 2]} - key.b);
    m.on[i] = std::max({dr, dg, db}) <= tolerance ? 1 : 0;
  }
  return m;
}

Moments moments(const Mask& mask) {
  double n = 0, sx = 0, sy = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      n += 1;
      sx += x + 0.5;
      sy += y + 0.5;
    }
  }
  if (n == 0) fail(ErrorCode::empty_mask, "moments of an empty mask");
  const double mx = sx / n;
  const double my = sy / n;
  double cxx = 0, cyy = 0, cxy = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const double dx = x + 0.5 - mx;
      const double dy = y + 0.5 - my;
      cxx += dx * dx;
      cyy += dy * dy;
      cxy += dx * dy;
    }
  }
  // Major-axis direction of the 2x2 second-moment matrix.
  const double phi = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  const double ux = std::cos(phi);
  const double uy = std::sin(phi);
  double lo = 1e300, hi = -1e300;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const double p = (x + 0.5 - mx) * ux + (y + 0.5 - my) * uy;
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  const double w = mask.width;
  return {mx / w, my / w, n / (w * w), axis_from_vertical(ux, uy), (hi - lo + 1.0) / w};
}

std::vector<ObjectObservation> perceive_ball_frame(const Frame& frame,
                                                   const render::RenderConfig& config) {
  std::vector<ObjectObservation> out;
  for (const auto& style : config.styles) {
    if (style.shape != render::Shape::disk) continue;
    const Moments m = require_object(frame, style.color, style.id);
    out.push_back({style.id, m.cx, m.cy, m.area, m.principal_angle, m.extent});
  }
  return out;
}

std::vector<ObjectObservation> perceive_cartpole_objects(const Frame& frame,
                                                         const render::RenderConfig& config) {
  const Moments cart = require_object(frame, config.style("cart").color, "cart");
  const Moments pole = require_object(frame, config.style("pole").color, "pole");
  // The second-moment axis is unsigned; the pole centroid's side of the
  // pivot column gives the sign (right of the pivot = clockwise = positive).
  const double offset_px = (pole.cx - cart.cx) * frame.width();
  double sign = offset_px > 0.0 ? 1.0 : -1.0;
  if (std::abs(offset_px) < 0.25) sign = pole.principal_angle >= 0.0 ? 1.0 : -1.0;
  const double angle = sign * std::abs(pole.principal_angle);
  return {{"cart", cart.cx, cart.cy, cart.area, cart.principal_angle, cart.extent},
          {"pole", pole.cx, pole.cy, pole.area, angle, pole.extent}};
}

CartpoleObservation perceive_cartpole_frame(const Frame& frame,
                                            const render::RenderConfig& config) {
  const auto objs = perceive_cartpole_objects(frame, config);
  return {objs[0].cx, objs[1].principal_angle, objs[1].length};
}

std::vector<ObjectObservation> perceive_frame(const Frame& frame,
                                              const render::RenderConfig& config) {
  return config.env == EnvKind::cartpole ? perceive_cartpole_objects(frame, config)
                                         : perceive_ball_frame(frame, config);
}

Trajectory assemble_trajectory(const std::vector<std::vector<ObjectObservation>>& observations,
                               const SchemaRef& schema) {
  if (observations.size() < 2) {
    fail(ErrorCode::precondition, "velocity estimation needs at least 2 frames");
  }
  auto ids_of = [](const std::vector<ObjectObservation>& obs) {
    std::set<std::string> ids;
    for (const auto& o : obs) ids.insert(o.object_id);
    return ids;
  };
  const auto reference_ids = ids_of(observations.front());
  for (std::size_t t = 1; t < observations.size(); ++t) {
    if (ids_of(observations[t]) != reference_ids) {
      fail(ErrorCode::inconsistent_objects,
           "frame " + std::to_string(t) + " observes a different object set than frame 0");
    }
  }

  const auto bindings = bindings_for(*schema);
  const std::size_t frames = observations.size();
  const std::size_t n = schema->size();
  std::vector<std::vector<double>> values(frames, std::vector<double>(n, 0.0));

  for (std::size_t i = 0; i < n; ++i) {
    const auto& attr = (*schema)[i];
    if (!attr.source.empty()) continue;
    auto it = bindings.find(attr.name);
    if (it == bindings.end()) {
      fail(ErrorCode::invalid_argument, "no observation feeds attribute '" + attr.name + "'");
    }
    const auto& b = it->second;
    if (!reference_ids.contains(b.object_id)) {
      fail(ErrorCode::missing_object, "object '" + b.object_id + "' was never observed");
    }
    for (std::size_t t = 0; t < frames; ++t) {
      for (const auto& o : observations[t]) {
        if (o.object_id == b.object_id) values[t][i] = field_value(o, b.field);
      }
    }
    if (attr.role == Role::geometry) {
      std::vector<double> col;
      for (const auto& row : values) col.push_back(row[i]);
      const double m = median(std::move(col));
      for (auto& row : values) row[i] = m;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& attr = (*schema)[i];
    if (attr.source.empty()) continue;
    const std::size_t src = schema->require_index(attr.source);
    const bool angular = (*schema)[src].role == Role::angle;
    for (std::size_t t = 1; t < frames; ++t) {
      const double d = values[t][src] - values[t - 1][src];
      values[t][i] = angular ? wrap_angle(d) : d;
    }
    values[0][i] = values[1][i];
  }

  std::vector<State> states;
  states.reserve(frames);
  for (auto& row : values) {
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = std::clamp(row[i], (*schema)[i].lower, (*schema)[i].upper);
    }
    states.push_back(State(schema, std::move(row)));
  }
  return Trajectory(std::move(states));
}

Trajectory perceive_frames(std::span<const Frame> frames, const render::RenderConfig& config,
                           int jobs) {
  std::vector<std::vector<ObjectObservation>> obs(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t t) {
    try {
      obs[t] = perceive_frame(frames[t], config);
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(t) + ": " + e.what());
    }
  });
  return assemble_trajectory(obs, schema_for(config.env));
}

}  // namespace vidprog::perceive
