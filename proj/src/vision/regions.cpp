#include <algorithm>

#include "whisker/errors.hpp"
#include "whisker/vision.hpp"

namespace whisker::vision {

std::vector<Region> extract_regions(const BinaryImage& mask, int min_area, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw ContractError("connectivity must be 4 or 8");
  std::vector<Region> regions;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<Pixel> stack;
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int nbrs = connectivity;

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
      if (!mask.bits[i] || seen[i]) continue;
      Region region;
      region.min_x = region.max_x = x;
      region.min_y = region.max_y = y;
      seen[i] = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        region.pixels.push_back(p);
        region.min_x = std::min(region.min_x, p.x);
        region.max_x = std::max(region.max_x, p.x);
        region.min_y = std::min(region.min_y, p.y);
        region.max_y = std::max(region.max_y, p.y);
        for (int k = 0; k < nbrs; ++k) {
          const int nx = p.x + kDx[k], ny = p.y + kDy[k];
          if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * mask.width + nx;
          if (mask.bits[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      if (static_cast<long>(region.pixels.size()) < min_area) continue;
      std::sort(region.pixels.begin(), region.pixels.end(), [](Pixel a, Pixel b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

Vec2 centroid(const Region& region) {
  if (region.pixels.empty()) throw ContractError("centroid of an empty region");
  // Integer moments are exact well past any image size we handle.
  long long m10 = 0, m01 = 0;
  for (const auto& p : region.pixels) {
    m10 += p.x;
    m01 += p.y;
  }
  const auto m00 = static_cast<double>(region.pixels.size());
  return {static_cast<double>(m10) / m00, static_cast<double>(m01) / m00};
}

}  // namespace whisker::vision
