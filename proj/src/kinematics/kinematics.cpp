#include <cmath>
#include <string>

#include "whisker/errors.hpp"
#include "whisker/kinematics.hpp"

namespace whisker::kin {

double deflection_angle(double px, double py, double k, double l_l) {
  if (!(k > 0.0) || !(l_l > 0.0)) throw ContractError("k and l_l must be positive");
  if (!std::isfinite(px) || !std::isfinite(py)) throw ContractError("non-finite displacement");
  const double arg = k * std::hypot(px, py) / l_l;
  if (arg > 1.0)
    throw SaturationError("displacement " + std::to_string(k * std::hypot(px, py)) +
                          " mm exceeds lower lever l_l = " + std::to_string(l_l) + " mm");
  return std::asin(arg);
}

TipPose tip_position(double px, double py, double k, double l_l, double l_u) {
  TipPose t;
  t.theta = deflection_angle(px, py, k, l_l);
  const double ratio = l_u / l_l;
  t.x = -ratio * k * px;
  t.y = -ratio * k * py;
  t.z = l_u * std::cos(t.theta);
  return t;
}

Vec2 pixel_from_tilt(double theta, double azimuth, double k, double l_l) {
  const double mag = l_l * std::sin(theta) / k;
  return {-mag * std::cos(azimuth), -mag * std::sin(azimuth)};
}

}  // namespace whisker::kin
