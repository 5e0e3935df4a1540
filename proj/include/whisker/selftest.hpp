#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace whisker::selftest {

struct OracleResult {
  std::string name;
  bool pass = false;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // largest observed error, meaning depends on the check
  std::string detail;
  double seconds = 0.0;
};

// erode() against a brute-force window minimum on random masks.
OracleResult erosion_oracle(std::uint64_t seed, int masks = 1000, int size = 64, int kernel = 10);

// centroid() against the integer mean of the member pixels, on random
// connected blobs that also go through extract_regions.
OracleResult centroid_oracle(std::uint64_t seed, int regions = 1000);

// loss_and_param_grad() against central differences with step h. The
// relative error is |a - n| / max(|a|, |n|, floor); the floor keeps exact
// zeros (dead ReLU units) from turning round-off into a failure. A stencil
// that would straddle a ReLU kink becomes a second-order one-sided one on the
// smooth side, or a narrower central one if both sides have a kink.
inline constexpr double kGradientFloor = 1e-6;
OracleResult gradient_check(std::uint64_t seed, int batches = 5, double h = 1e-5,
                            double tolerance = 1e-4);

// pixel_from_tilt followed by deflection_angle returns the angle.
OracleResult kinematics_round_trip(std::uint64_t seed, int samples = 10000);

std::vector<OracleResult> run_all(std::uint64_t seed);

std::string summary(const std::vector<OracleResult>& results);

}  // namespace whisker::selftest
