#include <algorithm>
#include <limits>
#include <tuple>

#include "whisker/vision.hpp"

namespace whisker::vision {

TrackResult associate(std::span<const Vec2> centroids, std::span<const Vec2> neutral,
                      double max_match_dist) {
  TrackResult result;
  result.whiskers.resize(neutral.size());

  struct Pair {
    double dist;
    std::size_t whisker;
    std::size_t centroid;
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> nearest_count(centroids.size(), 0);
  for (std::size_t w = 0; w < neutral.size(); ++w) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = centroids.size();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = norm(centroids[c] - neutral[w]);
      if (d <= max_match_dist) pairs.push_back({d, w, c});
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    if (best_c < centroids.size() && best <= max_match_dist) ++nearest_count[best_c];
  }
  result.ambiguous = std::any_of(nearest_count.begin(), nearest_count.end(),
                                 [](std::size_t n) { return n > 1; });

  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.whisker, a.centroid) < std::tie(b.dist, b.whisker, b.centroid);
  });
  std::vector<bool> taken(centroids.size(), false);
  for (const auto& pr : pairs) {
    auto& w = result.whiskers[pr.whisker];
    if (w.found || taken[pr.centroid]) continue;
    w.found = true;
    w.p = centroids[pr.centroid] - neutral[pr.whisker];
    taken[pr.centroid] = true;
  }
  return result;
}

std::vector<Vec2> detect_markers(const render::Frame& frame, const VisionParams& params) {
  const BinaryImage eroded = erode(red_mask(frame, params), params.erosion_kernel);
  const auto regions = extract_regions(eroded, params.min_area, params.connectivity);
  const double shift = kernel_anchor(params.erosion_kernel).centre_shift();
  std::vector<Vec2> out;
  out.reserve(regions.size());
  // The anchor offsets the eroded blob; undo it so centroids sit on the marker.
  for (const auto& r : regions) out.push_back(centroid(r) - Vec2{shift, shift});
  return out;
}

TrackResult track(const render::Frame& frame, const SensorConfig& config,
                  std::span<const Vec2> neutral) {
  const auto centroids = detect_markers(frame, config.vision);
  TrackResult result = associate(centroids, neutral, config.vision.max_match_dist);
  result.regions = centroids.size();
  return result;
}

nlohmann::json to_json(const TrackResult& result) {
  nlohmann::json j;
  j["frame"] = result.frame_index;
  j["regions"] = result.regions;
  j["ambiguous"] = result.ambiguous;
  auto& ws = j["whiskers"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.whiskers.size(); ++i) {
    const auto& w = result.whiskers[i];
    ws.push_back({{"whisker", i}, {"px", w.p.x}, {"py", w.p.y}, {"found", w.found}});
  }
  return j;
}

}  // namespace whisker::vision
