#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vidprog {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major RGB raster, origin top-left.
class Frame {
 public:
  Frame(int width, int height, Rgb fill = {255, 255, 255});
  Frame(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  bool same_shape(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace vidprog
