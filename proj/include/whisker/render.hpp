#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "whisker/config.hpp"
#include "whisker/geometry.hpp"
#include "whisker/rng.hpp"

namespace whisker::render {

// Row-major 8-bit RGB image.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, Rgb fill = {});

  Rgb at(int x, int y) const {
    const auto i = index(x, y);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const auto i = index(x, y);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) * 3;
  }
};

// Draws each marker as a filled disc of radius_px centred on its position,
// optional wire streaks, then optional Gaussian pixel noise. Pixel (x, y)
// covers [x-0.5, x+0.5] x [y-0.5, y+0.5]. With antialiasing off a pixel is
// marker-coloured iff its centre lies within the disc. Deterministic given
// the rng state.
Frame render_frame(std::span<const Vec2> markers, double radius_px, const CameraModel& camera,
                   const RenderOptions& options, Rng& rng);

std::string encode_ppm(const Frame& frame);
Frame decode_ppm(const std::string& bytes);
void write_ppm(const Frame& frame, const std::filesystem::path& path);
Frame read_ppm(const std::filesystem::path& path);

}  // namespace whisker::render
