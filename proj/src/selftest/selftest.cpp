#include "whisker/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "whisker/config.hpp"
#include "whisker/format.hpp"
#include "whisker/kinematics.hpp"
#include "whisker/learn.hpp"
#include "whisker/rng.hpp"
#include "whisker/vision.hpp"

namespace whisker::selftest {

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// A few filled discs and rectangles with optional salt noise, so a 10x10
// kernel leaves something behind.
vision::BinaryImage random_mask(int size, Rng& rng) {
  vision::BinaryImage m(size, size);
  const int mode = static_cast<int>(rng.index(10));
  if (mode == 0) {
    std::fill(m.bits.begin(), m.bits.end(), 1);
    return m;
  }
  if (mode == 1) return m;
  const int shapes = 1 + static_cast<int>(rng.index(6));
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(-5.0, size + 5.0), cy = rng.uniform(-5.0, size + 5.0);
    const double r = rng.uniform(2.0, 20.0);
    const bool disc = rng.uniform() < 0.5;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x - cx, dy = y - cy;
        if (disc ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= 0.6 * r)
          m.set(x, y);
      }
  }
  const double salt = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.05);
  for (auto& b : m.bits)
    if (rng.uniform() < salt) b = static_cast<std::uint8_t>(1 - b);
  return m;
}

vision::BinaryImage brute_erode(const vision::BinaryImage& m, int kernel) {
  const int lo = -(kernel / 2), hi = kernel - 1 - kernel / 2;
  vision::BinaryImage out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool all = true;
      for (int dy = lo; dy <= hi && all; ++dy)
        for (int dx = lo; dx <= hi && all; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height || !m.get(xx, yy)) all = false;
        }
      out.set(x, y, all);
    }
  return out;
}

// 4-connected random walk: distinct pixels, always one component.
std::vector<vision::Pixel> random_blob(int width, int height, Rng& rng) {
  const int target = 1 + static_cast<int>(rng.index(400));
  int x = static_cast<int>(rng.index(static_cast<std::size_t>(width)));
  int y = static_cast<int>(rng.index(static_cast<std::size_t>(height)));
  std::set<std::pair<int, int>> seen{{y, x}};
  for (int step = 0; static_cast<int>(seen.size()) < target && step < 20 * target; ++step) {
    static constexpr int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    const auto d = rng.index(4);
    const int nx = x + dx[d], ny = y + dy[d];
    if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
    x = nx;
    y = ny;
    seen.insert({y, x});
  }
  std::vector<vision::Pixel> out;
  for (const auto& [py, px] : seen) out.push_back({px, py});  // scanline order
  return out;
}

void finish(OracleResult& r, const Timer& t) {
  r.pass = r.failures == 0 && r.cases > 0;
  r.seconds = t.seconds();
}

}  // namespace

OracleResult erosion_oracle(std::uint64_t seed, int masks, int size, int kernel) {
  Timer t;
  OracleResult r;
  r.name = "erosion brute force";
  Rng rng(derive_seed(seed, {1}));
  for (int i = 0; i < masks; ++i) {
    const auto m = random_mask(size, rng);
    const auto fast = vision::erode(m, kernel);
    const auto slow = brute_erode(m, kernel);
    ++r.cases;
    if (!(fast == slow)) {
      ++r.failures;
      std::size_t diff = 0;
      for (std::size_t k = 0; k < fast.bits.size(); ++k) diff += fast.bits[k] != slow.bits[k];
      r.worst = std::max(r.worst, static_cast<double>(diff));
    }
  }
  std::ostringstream os;
  os << masks << " masks " << size << "x" << size << ", kernel " << kernel
     << ", differing pixels in worst mask " << r.worst;
  r.detail = os.str();
  finish(r, t);
  return r;
}

OracleResult centroid_oracle(std::uint64_t seed, int regions) {
  Timer t;
  OracleResult r;
  r.name = "centroid mean";
  Rng rng(derive_seed(seed, {2}));
  const int w = 96, h = 72;
  for (int i = 0; i < regions; ++i) {
    vision::Region region;
    region.pixels = random_blob(w, h, rng);
    long long sx = 0, sy = 0;
    for (const auto& p : region.pixels) {
      sx += p.x;
      sy += p.y;
    }
    const double n = static_cast<double>(region.pixels.size());
    const Vec2 want{static_cast<double>(sx) / n, static_cast<double>(sy) / n};

    vision::BinaryImage mask(w, h);
    for (const auto& p : region.pixels) mask.set(p.x, p.y);
    const auto found = vision::extract_regions(mask, 1, 8);
    ++r.cases;
    const Vec2 direct = vision::centroid(region);
    bool ok = direct.x == want.x && direct.y == want.y && found.size() == 1;
    if (ok) {
      const Vec2 via = vision::centroid(found[0]);
      ok = via.x == want.x && via.y == want.y && found[0].area() == region.area();
    }
    if (!ok) {
      ++r.failures;
      r.worst = std::max(r.worst, norm(direct - want));
    }
  }
  r.detail = std::to_string(regions) + " random connected regions, exact equality";
  finish(r, t);
  return r;
}

OracleResult gradient_check(std::uint64_t seed, int batches, double h, double tolerance) {
  Timer t;
  OracleResult r;
  r.name = "gradient check";
  Rng rng(derive_seed(seed, {3}));
  int one_sided = 0, shrunk = 0;
  for (int b = 0; b < batches; ++b) {
    learn::MlpParams params = learn::init_params(16, 32, learn::kNumClasses, rng);
    const int n = 8 + static_cast<int>(rng.index(25));
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(n), std::vector<double>(16));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (auto& v : xs[static_cast<std::size_t>(i)]) v = rng.normal(0.0, 2.0);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(learn::kNumClasses));
    }
    learn::MlpParams grad;
    learn::loss_and_param_grad(params, xs, labels, grad);
    std::vector<std::vector<double>> pre(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      learn::ForwardCache cache;
      learn::mlp_forward(xs[i], params, &cache);
      pre[i] = cache.pre;
    }
    learn::MlpParams scratch;
    auto blocks = params.blocks();
    const auto gblocks = grad.blocks();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      auto& p = *blocks[k];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double keep = p[j];
        auto loss_at = [&](double s) {
          p[j] = keep + s;
          const double l = learn::loss_and_param_grad(params, xs, labels, scratch);
          p[j] = keep;
          return l;
        };
        // First-layer parameters move one hidden pre-activation linearly;
        // a finite difference must not step across its ReLU kink.
        bool plus_clear = true, minus_clear = true;
        double nearest = h;
        if (k < 2) {
          const std::size_t unit = k == 0 ? j / 16 : j;
          for (std::size_t i = 0; i < xs.size(); ++i) {
            const double slope = k == 0 ? xs[i][j % 16] : 1.0;
            if (slope == 0.0) continue;
            const double cross = -pre[i][unit] / slope;
            if (cross > 0.0 && cross <= h) plus_clear = false;
            if (cross < 0.0 && cross >= -h) minus_clear = false;
            if (cross != 0.0) nearest = std::min(nearest, std::abs(cross));
          }
        }
        double numeric;
        if (plus_clear && minus_clear) {
          numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        } else if (plus_clear || minus_clear) {
          // Second-order one-sided difference on the smooth side.
          const double d = plus_clear ? h : -h;
          numeric = (-3.0 * loss_at(0.0) + 4.0 * loss_at(d / 2.0) - loss_at(d)) / d;
          ++one_sided;
        } else {
          const double d = nearest / 2.0;
          numeric = (loss_at(d) - loss_at(-d)) / (2.0 * d);
          ++shrunk;
        }
        const double analytic = (*gblocks[k])[j];
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
        ++r.cases;
        r.worst = std::max(r.worst, rel);
        if (!(rel < tolerance)) ++r.failures;
      }
    }
  }
  r.detail = std::to_string(batches) + " batches, h " + format_double(h) +
             ", max relative error " + format_double(r.worst) + ", " + std::to_string(one_sided) +
             " one-sided and " + std::to_string(shrunk) + " narrowed stencils near ReLU kinks";
  finish(r, t);
  return r;
}

OracleResult kinematics_round_trip(std::uint64_t seed, int samples) {
  Timer t;
  OracleResult r;
  r.name = "kinematics round trip";
  Rng rng(derive_seed(seed, {4}));
  const SensorConfig cfg;
  const double k = cfg.camera.k, l_l = cfg.geometry.l_l, l_u = cfg.geometry.l_u;
  for (int i = 0; i < samples; ++i) {
    const double theta = rng.uniform(0.0, 1.2);
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const Vec2 p = kin::pixel_from_tilt(theta, az, k, l_l);
    const double back = kin::deflection_angle(p.x, p.y, k, l_l);
    const auto tip = kin::tip_position(p.x, p.y, k, l_l, l_u);
    const double err = std::max({std::abs(back - theta),
                                 std::abs(tip.x - l_u * std::sin(theta) * std::cos(az)),
                                 std::abs(tip.y - l_u * std::sin(theta) * std::sin(az)),
                                 std::abs(tip.z - l_u * std::cos(theta))});
    ++r.cases;
    r.worst = std::max(r.worst, err);
    if (!(err <= 1e-9)) ++r.failures;
  }
  r.detail = std::to_string(samples) + " tilts up to 1.2 rad, max error " + format_double(r.worst);
  finish(r, t);
  return r;
}

std::vector<OracleResult> run_all(std::uint64_t seed) {
  return {erosion_oracle(seed), centroid_oracle(seed), gradient_check(seed),
          kinematics_round_trip(seed)};
}

std::string summary(const std::vector<OracleResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << (r.pass ? "pass" : "FAIL") << "  " << r.name << ": " << r.cases << " cases, "
       << r.failures << " failed (" << r.detail << ")\n";
  }
  return os.str();
}

}  // namespace whisker::selftest
