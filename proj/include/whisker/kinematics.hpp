#pragma once

#include "whisker/geometry.hpp"

namespace whisker::kin {

// Pixel displacements are measured on the image (+x right, +y down), which is
// also the sensor frame used by the simulator. A marker moves opposite to its
// whisker's tip, hence the minus signs below.

struct TipPose {
  double theta = 0.0;  // rad
  double x = 0.0;      // mm, relative to the pivot
  double y = 0.0;
  double z = 0.0;
};

// theta = asin(k * |p| / l_l). Throws SaturationError when k|p| > l_l and
// ContractError when k or l_l is not positive.
double deflection_angle(double px, double py, double k, double l_l);

// x = -(l_u/l_l) k px, y = -(l_u/l_l) k py, z = l_u cos(theta).
// The planar part is linear in p and z uses the arcsin angle; since
// sin(theta) = k|p|/l_l the tip still lands on the sphere of radius l_u.
TipPose tip_position(double px, double py, double k, double l_l, double l_u);

// Inverse of deflection_angle for a whisker whose tip moves along
// (cos azimuth, sin azimuth): the marker moves by l_l sin(theta)/k the other way.
Vec2 pixel_from_tilt(double theta, double azimuth, double k, double l_l);

}  // namespace whisker::kin
