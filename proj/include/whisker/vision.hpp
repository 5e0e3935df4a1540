#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "whisker/config.hpp"
#include "whisker/geometry.hpp"
#include "whisker/render.hpp"

namespace whisker::vision {

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;
  double v = 0.0;
};

// Hexcone conversion; hue is 0 for achromatic pixels.
Hsv rgb_to_hsv(Rgb pixel);

struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool on = true) {
    bits[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

// Set iff hue is in [0, hue_lo] or [hue_hi, 360) and s >= sat_min and v >= val_min.
BinaryImage red_mask(const render::Frame& frame, const VisionParams& params);

// Window of an even or odd kernel relative to the output pixel: for size k
// the covered offsets are lo..hi with lo = -(k/2), hi = k-1-k/2, so a 10x10
// kernel spans -5..+4 on both axes.
struct KernelAnchor {
  int lo = 0;
  int hi = 0;
  // Displacement of an eroded symmetric blob's centre from the original one.
  double centre_shift() const { return -0.5 * (lo + hi); }
};
KernelAnchor kernel_anchor(int kernel);

// Binary erosion with a kernel x kernel square of ones. Pixels outside the
// image count as 0. Throws ContractError for kernel < 1.
BinaryImage erode(const BinaryImage& mask, int kernel);

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(Pixel, Pixel) = default;
};

struct Region {
  std::vector<Pixel> pixels;  // scanline order
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  std::size_t area() const { return pixels.size(); }
};

// Connected components (4 or 8 connectivity) with area >= min_area, ordered
// by their first pixel in scanline order.
std::vector<Region> extract_regions(const BinaryImage& mask, int min_area, int connectivity = 8);

// Binary image moments: (M10/M00, M01/M00). Throws ContractError on an empty region.
Vec2 centroid(const Region& region);

struct WhiskerTrack {
  Vec2 p;  // centroid - neutral, px
  bool found = false;
};

struct TrackResult {
  std::vector<WhiskerTrack> whiskers;
  // Some centroid was the nearest candidate of more than one whisker.
  bool ambiguous = false;
  int frame_index = 0;
  std::size_t regions = 0;
};

// Greedy injective matching by ascending distance (ties by whisker, then
// centroid index). Pairs farther than max_match_dist are never made.
TrackResult associate(std::span<const Vec2> centroids, std::span<const Vec2> neutral,
                      double max_match_dist);

// red_mask -> erode -> extract_regions -> centroid -> associate. Centroids
// are corrected by the kernel anchor's centre shift before matching.
TrackResult track(const render::Frame& frame, const SensorConfig& config,
                  std::span<const Vec2> neutral);

// Centroids of the marker blobs in a frame (anchor-corrected), scanline order.
std::vector<Vec2> detect_markers(const render::Frame& frame, const VisionParams& params);

nlohmann::json to_json(const TrackResult& result);

}  // namespace whisker::vision
