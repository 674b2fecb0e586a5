#include "vidprog/core/frame.hpp"

#include <string>

#include "vidprog/core/error.hpp"

namespace vidprog {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::invalid_argument,
         "frame dimensions must be positive, got " + std::to_string(width) + "x" +
             std::to_string(height));
  }
}

}  // namespace

Frame::Frame(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (pixels_.size() != expected) {
    fail(ErrorCode::shape_mismatch, "pixel buffer holds " + std::to_string(pixels_.size()) +
                                        " bytes, expected " + std::to_string(expected));
  }
}

Rgb Frame::at(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(x)) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Frame::set(int x, int y, Rgb color) {
  const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(x)) * 3;
  pixels_[i] = color.r;
  pixels_[i + 1] = color.g;
  pixels_[i + 2] = color.b;
}

}  // namespace vidprog
