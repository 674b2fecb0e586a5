#include "vidprog/render/render.hpp"

#include <algorithm>
#include <cmath>

#include "vidprog/core/error.hpp"

namespace vidprog::render {

namespace {

struct PixelBox {
  int x0, y0, x1, y1;  // inclusive-exclusive, clipped to the frame
};

PixelBox clip_box(double min_x, double min_y, double max_x, double max_y, const Frame& f) {
  PixelBox b;
  b.x0 = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
  b.y0 = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
  b.x1 = std::min(f.width(), static_cast<int>(std::ceil(max_x)) + 1);
  b.y1 = std::min(f.height(), static_cast<int>(std::ceil(max_y)) + 1);
  return b;
}

void draw_disk(Frame& f, double cx, double cy, double radius, Rgb color) {
  if (!(radius > 0.0)) return;
  const auto box = clip_box(cx - radius, cy - radius, cx + radius, cy + radius, f);
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      if (in_disk(x + 0.5, y + 0.5, cx, cy, radius)) f.set(x, y, color);
    }
  }
}

// Half-open in both axes so translates keep their pixel count.
void draw_rect(Frame& f, double x0, double y0, double x1, double y1, Rgb color) {
  const auto box = clip_box(x0, y0, x1, y1, f);
  for (int y = box.y0; y < box.y1; ++y) {
    const double py = y + 0.5;
    if (py < y0 || py >= y1) continue;
    for (int x = box.x0; x < box.x1; ++x) {
      const double px = x + 0.5;
      if (px >= x0 && px < x1) f.set(x, y, color);
    }
  }
}

void draw_bar(Frame& f, double pivot_x, double pivot_y, double angle, double length,
              double thickness, Rgb color) {
  const double dx = std::sin(angle);
  const double dy = -std::cos(angle);
  const double nx = std::cos(angle);
  const double ny = std::sin(angle);
  const double h = thickness / 2.0;
  double min_x = pivot_x, max_x = pivot_x, min_y = pivot_y, max_y = pivot_y;
  for (double a : {0.0, length}) {
    for (double s : {-h, h}) {
      const double x = pivot_x + a * dx + s * nx;
      const double y = pivot_y + a * dy + s * ny;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  const auto box = clip_box(min_x, min_y, max_x, max_y, f);
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      if (in_bar(x + 0.5, y + 0.5, pivot_x, pivot_y, angle, length, thickness)) {
        f.set(x, y, color);
      }
    }
  }
}

void render_balls(const State& s, const RenderConfig& c, Frame& f) {
  const double w = c.width;
  const int balls = ball_count(c.env);
  for (int k = 1; k <= balls; ++k) {
    const auto id = std::to_string(k);
    const double x = attribute(s, "x" + id);
    const double y = attribute(s, "y" + id);
    const double r = attribute(s, "r" + id);
    draw_disk(f, x * w, y * w, r * w, c.style("ball" + id).color);
  }
}

void render_cartpole(const State& s, const RenderConfig& c, Frame& f) {
  const double w = c.width;
  const double cx = attribute(s, "cart_position") * w;
  const double cy = c.cart.track_y * c.height;
  const double hw = c.cart.cart_width * w / 2.0;
  const double hh = c.cart.cart_height * w / 2.0;
  draw_rect(f, 0.0, cy + hh, w, cy + hh + kTrackThicknessPx, c.style("track").color);
  draw_rect(f, cx - hw, cy - hh, cx + hw, cy + hh, c.style("cart").color);
  draw_bar(f, cx, cy - hh, attribute(s, "pole_angle"), attribute(s, "pole_length") * w,
           c.cart.pole_thickness * w, c.style("pole").color);
}

}  // namespace

RenderConfig RenderConfig::defaults(EnvKind env, int width, int height) {
  RenderConfig c;
  c.env = env;
  c.width = width;
  c.height = height;
  if (env == EnvKind::cartpole) {
    c.styles = {{"track", {128, 128, 128}, Shape::rectangle},
                {"cart", {0, 0, 0}, Shape::rectangle},
                {"pole", {204, 153, 102}, Shape::bar}};
  } else {
    c.styles = {{"ball1", {255, 0, 0}, Shape::disk}};
    if (ball_count(env) > 1) c.styles.push_back({"ball2", {0, 0, 255}, Shape::disk});
  }
  return c;
}

const ObjectStyle& RenderConfig::style(std::string_view id) const {
  for (const auto& s : styles) {
    if (s.id == id) return s;
  }
  fail(ErrorCode::invalid_argument, "render config has no style '" + std::string(id) + "'");
}

void RenderConfig::validate() const {
  if (width < 1 || height < 1) fail(ErrorCode::invalid_argument, "render dims must be positive");
  for (std::size_t i = 0; i < styles.size(); ++i) {
    if (styles[i].color == background) {
      fail(ErrorCode::invalid_argument, "style '" + styles[i].id + "' matches the background");
    }
    for (std::size_t j = i + 1; j < styles.size(); ++j) {
      if (styles[i].color == styles[j].color) {
        fail(ErrorCode::invalid_argument,
             "styles '" + styles[i].id + "' and '" + styles[j].id + "' share a color");
      }
    }
  }
}

bool in_disk(double px, double py, double cx, double cy, double radius) noexcept {
  const double dx = px - cx;
  const double dy = py - cy;
  return dx * dx + dy * dy <= radius * radius;
}

bool in_bar(double px, double py, double pivot_x, double pivot_y, double angle, double length,
            double thickness) noexcept {
  const double rx = px - pivot_x;
  const double ry = py - pivot_y;
  const double along = rx * std::sin(angle) - ry * std::cos(angle);
  const double across = rx * std::cos(angle) + ry * std::sin(angle);
  return along >= 0.0 && along <= length && std::abs(across) <= thickness / 2.0;
}

Frame blank_frame(const RenderConfig& config) {
  return Frame(config.width, config.height, config.background);
}

Frame render_state(const State& state, const RenderConfig& config) {
  if (state.schema().env_id() != to_string(config.env)) {
    fail(ErrorCode::schema_mismatch, "state schema '" + state.schema().env_id() +
                                         "' does not match render config '" +
                                         std::string(to_string(config.env)) + "'");
  }
  Frame f = blank_frame(config);
  if (config.env == EnvKind::cartpole) {
    render_cartpole(state, config, f);
  } else {
    render_balls(state, config, f);
  }
  return f;
}

std::vector<Frame> render_states(std::span<const State> states, const RenderConfig& config) {
  if (states.empty()) fail(ErrorCode::precondition, "cannot render an empty trajectory");
  std::vector<Frame> frames;
  frames.reserve(states.size());
  for (const auto& s : states) frames.push_back(render_state(s, config));
  return frames;
}

std::vector<Frame> render_trajectory(const Trajectory& trajectory, const RenderConfig& config) {
  return render_states(trajectory.states(), config);
}

}  // namespace vidprog::render
