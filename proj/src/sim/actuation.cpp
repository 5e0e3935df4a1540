#include <algorithm>
#include <cmath>
#include <string>

#include "whisker/errors.hpp"
#include "whisker/simworld.hpp"

namespace whisker::sim {

namespace {

double curve_magnitude(double v, const std::vector<CurvePoint>& curve) {
  if (v >= curve.back().voltage) return curve.back().angle;
  const auto hi = std::upper_bound(curve.begin(), curve.end(), v,
                                   [](double x, const CurvePoint& p) { return x < p.voltage; });
  const auto lo = hi - 1;
  const double t = (v - lo->voltage) / (hi->voltage - lo->voltage);
  return lo->angle + t * (hi->angle - lo->angle);
}

}  // namespace

double steady_state_tilt(double voltage, const ActuationParams& params) {
  if (!(std::abs(voltage) <= params.max_voltage))
    throw RangeError("voltage " + std::to_string(voltage) + " V exceeds max_voltage " +
                     std::to_string(params.max_voltage) + " V");
  const double v = std::abs(voltage);
  double magnitude = params.curve.empty() ? params.gain * v : curve_magnitude(v, params.curve);
  magnitude = std::min(magnitude, params.max_tilt);
  return voltage < 0.0 ? -magnitude : magnitude;
}

Vec2 radial_unit(int whisker, const ArrayGeometry& geometry) {
  const double a = geometry.azimuth(whisker);
  return {std::cos(a), std::sin(a)};
}

Vec2 steady_state_tilt_vector(int whisker, double voltage, const ArrayGeometry& geometry,
                              const ActuationParams& params) {
  // Retraction moves the tip towards the array axis.
  return -steady_state_tilt(voltage, params) * radial_unit(whisker, geometry);
}

}  // namespace whisker::sim
