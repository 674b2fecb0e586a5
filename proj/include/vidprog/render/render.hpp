#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/core/state.hpp"

namespace vidprog::render {

enum class Shape { disk, rectangle, bar };

struct ObjectStyle {
  std::string id;
  Rgb color;
  Shape shape = Shape::disk;
};

// Normalized by frame width, except track_y which is a fraction of height.
struct CartGeometry {
  double cart_width = 0.1;
  double cart_height = 0.05;
  double pole_thickness = 0.01;
  double track_y = 0.8;
};

struct RenderConfig {
  EnvKind env = EnvKind::phyworld_uniform;
  int width = 128;
  int height = 128;
  Rgb background{255, 255, 255};
  std::vector<ObjectStyle> styles;
  CartGeometry cart;

  // White background; ball1 red, ball2 blue; cart black, pole tan, track gray.
  static RenderConfig defaults(EnvKind env, int width, int height);

  // Throws invalid-argument naming the missing style.
  const ObjectStyle& style(std::string_view id) const;

  // Colors pairwise distinct and distinct from the background.
  void validate() const;
};

inline constexpr int kTrackThicknessPx = 3;

// Hard-edged rasterization: a pixel belongs to a shape iff its center does.
Frame render_state(const State& state, const RenderConfig& config);
std::vector<Frame> render_trajectory(const Trajectory& trajectory, const RenderConfig& config);
// Throws precondition on an empty sequence.
std::vector<Frame> render_states(std::span<const State> states, const RenderConfig& config);

// Background-only frame (the blank prediction baseline).
Frame blank_frame(const RenderConfig& config);

// Pixel-center membership tests shared with tests and perception.
bool in_disk(double px, double py, double cx, double cy, double radius) noexcept;
bool in_bar(double px, double py, double pivot_x, double pivot_y, double angle, double length,
            double thickness) noexcept;

}  // namespace vidprog::render
