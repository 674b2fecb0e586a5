#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vidprog/core/frame.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/render/render.hpp"

namespace vidprog::perceive {

inline constexpr int kDefaultTolerance = 10;

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> on;  // row-major, 0/1

  bool at(int x, int y) const { return on[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

// Pixels whose max channel deviation from `key` is <= tolerance.
Mask segment_color(const Frame& frame, Rgb key, int tolerance = kDefaultTolerance);

// Centroid and area normalized by the frame width; pixel centers sit at
// integer + 0.5. principal_angle is the major axis measured from vertical,
// clockwise positive, in (-pi/2, pi/2].
struct Moments {
  double cx = 0.0;
  double cy = 0.0;
  double area = 0.0;
  double principal_angle = 0.0;
  double extent = 0.0;  // spread of pixel centers along the major axis + 1 px, normalized
};

// Throws empty-mask.
Moments moments(const Mask& mask);

struct ObjectObservation {
  std::string object_id;
  double cx = 0.0;
  double cy = 0.0;
  double area = 0.0;
  double principal_angle = 0.0;  // bars only
  double length = 0.0;           // bars only
};

// One observation per ball color key, in style order. Throws missing-object.
std::vector<ObjectObservation> perceive_ball_frame(const Frame& frame,
                                                   const render::RenderConfig& config);

struct CartpoleObservation {
  double cart_x = 0.0;
  double pole_angle = 0.0;
  double pole_length = 0.0;
};

// "cart" and "pole" observations; the pole's principal_angle is the signed
// pole angle.
std::vector<ObjectObservation> perceive_cartpole_objects(const Frame& frame,
                                                         const render::RenderConfig& config);
CartpoleObservation perceive_cartpole_frame(const Frame& frame,
                                            const render::RenderConfig& config);

std::vector<ObjectObservation> perceive_frame(const Frame& frame,
                                              const render::RenderConfig& config);

// Positions/angles per frame, velocities as backward differences (frame 0
// copies frame 1), geometry as the median over frames. Values are clamped
// into the schema bounds.
Trajectory assemble_trajectory(const std::vector<std::vector<ObjectObservation>>& observations,
                               const SchemaRef& schema);

Trajectory perceive_frames(std::span<const Frame> frames, const render::RenderConfig& config,
                           int jobs = 1);

}  // namespace vidprog::perceive
