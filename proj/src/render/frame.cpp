#include <algorithm>
#include <cmath>

#include "whisker/render.hpp"

namespace whisker::render {

namespace {

void draw_disc(std::vector<float>& coverage, int width, int height, Vec2 c, double r,
               bool antialias, int samples) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - r - 1.0)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(c.x + r + 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - r - 1.0)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(c.y + r + 1.0)));
  const double r2 = r * r;
  constexpr double kHalfDiagonal = 0.7071067811865476;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - c.x, dy = y - c.y;
      float cov = 0.0f;
      if (!antialias) {
        cov = dx * dx + dy * dy <= r2 ? 1.0f : 0.0f;
      } else {
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d <= r - kHalfDiagonal) {
          cov = 1.0f;
        } else if (d < r + kHalfDiagonal) {
          int hits = 0;
          for (int sy = 0; sy < samples; ++sy) {
            const double oy = dy + (sy + 0.5) / samples - 0.5;
            for (int sx = 0; sx < samples; ++sx) {
              const double ox = dx + (sx + 0.5) / samples - 0.5;
              if (ox * ox + oy * oy <= r2) ++hits;
            }
          }
          cov = static_cast<float>(hits) / static_cast<float>(samples * samples);
        }
      }
      auto& dst = coverage[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                           static_cast<std::size_t>(x)];
      dst = std::max(dst, cov);
    }
  }
}

void stamp(std::vector<float>& coverage, int width, int height, Vec2 p, int w) {
  const int x0 = static_cast<int>(std::lround(p.x - 0.5 * (w - 1)));
  const int y0 = static_cast<int>(std::lround(p.y - 0.5 * (w - 1)));
  for (int y = y0; y < y0 + w; ++y)
    for (int x = x0; x < x0 + w; ++x)
      if (x >= 0 && y >= 0 && x < width && y < height)
        coverage[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)] = 1.0f;
}

// Thin polyline leaving the marker roughly away from the image centre, the way
// the coil leads run out of the camera's view.
void draw_wire(std::vector<float>& coverage, int width, int height, Vec2 marker, double r,
               int gap, Vec2 image_center, Rng& rng) {
  Vec2 out = marker - image_center;
  double heading = norm(out) > 0.0 ? std::atan2(out.y, out.x) : 0.0;
  heading += rng.uniform(-0.5, 0.5);
  const int w = 1 + static_cast<int>(rng.index(2));
  Vec2 p = marker + (r + gap + 0.5 * w) * Vec2{std::cos(heading), std::sin(heading)};
  const int segments = 3;
  for (int s = 0; s < segments; ++s) {
    const double len = rng.uniform(15.0, 40.0);
    const Vec2 dir{std::cos(heading), std::sin(heading)};
    for (double t = 0.0; t <= len; t += 0.25) stamp(coverage, width, height, p + t * dir, w);
    p += len * dir;
    heading += rng.uniform(-0.3, 0.3);
  }
}

std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Frame::Frame(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Frame render_frame(std::span<const Vec2> markers, double radius_px, const CameraModel& camera,
                   const RenderOptions& options, Rng& rng) {
  const int w = camera.width_px, h = camera.height_px;
  std::vector<float> coverage(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f);
  for (const auto& m : markers)
    draw_disc(coverage, w, h, m, radius_px, options.antialias, options.aa_samples);
  if (options.wire_noise) {
    for (const auto& m : markers)
      for (int s = 0; s < options.streaks_per_marker; ++s)
        draw_wire(coverage, w, h, m, radius_px, options.wire_gap_px, camera.center_px, rng);
  }

  Frame frame(w, h, options.background_rgb);
  const auto bg = options.background_rgb;
  const auto fg = options.marker_rgb;
  const bool noisy = options.pixel_noise_sigma > 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = coverage[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(x)];
      double r = bg.r + a * (fg.r - bg.r);
      double g = bg.g + a * (fg.g - bg.g);
      double b = bg.b + a * (fg.b - bg.b);
      if (noisy) {
        r += rng.normal(0.0, options.pixel_noise_sigma);
        g += rng.normal(0.0, options.pixel_noise_sigma);
        b += rng.normal(0.0, options.pixel_noise_sigma);
      }
      frame.set(x, y, {to_channel(r), to_channel(g), to_channel(b)});
    }
  }
  return frame;
}

}  // namespace whisker::render
