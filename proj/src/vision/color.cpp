#include <algorithm>
#include <numeric>

#include "whisker/vision.hpp"

namespace whisker::vision {

Hsv rgb_to_hsv(Rgb pixel) {
  const int r = pixel.r, g = pixel.g, b = pixel.b;
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;
  Hsv out;
  out.v = mx / 255.0;
  out.s = mx == 0 ? 0.0 : static_cast<double>(delta) / mx;
  if (delta == 0) return out;
  double h;
  if (mx == r)
    h = 60.0 * static_cast<double>(g - b) / delta;
  else if (mx == g)
    h = 60.0 * (2.0 + static_cast<double>(b - r) / delta);
  else
    h = 60.0 * (4.0 + static_cast<double>(r - g) / delta);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinaryImage red_mask(const render::Frame& frame, const VisionParams& params) {
  BinaryImage mask(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const Hsv c = rgb_to_hsv(frame.at(x, y));
      const bool red_hue = c.h <= params.hue_lo || c.h >= params.hue_hi;
      if (red_hue && c.s >= params.sat_min && c.v >= params.val_min) mask.set(x, y);
    }
  }
  return mask;
}

}  // namespace whisker::vision
