#include <cmath>

#include "doctest.h"

#include "whisker/errors.hpp"
#include "whisker/kinematics.hpp"
#include "whisker/rng.hpp"

using namespace whisker;
using namespace whisker::kin;

// arcsin(5/12) and 63*cos(arcsin(5/12)), evaluated at 30 digits.
constexpr double kTheta = 0.42977543130452769;
constexpr double kZ = 57.270738601837501;

TEST_SUITE("kinematics") {

TEST_CASE("deflection angle examples") {
  CHECK(deflection_angle(0.0, 0.0, 0.08, 4.5) == 0.0);
  CHECK(std::abs(deflection_angle(30.0, 40.0, 0.05, 6.0) - kTheta) < 1e-9);
  CHECK_THROWS_AS(deflection_angle(0.0, 130.0, 0.05, 6.0), SaturationError);
  CHECK_NOTHROW(deflection_angle(0.0, 120.0, 0.05, 6.0));
  CHECK(deflection_angle(0.0, 120.0, 0.05, 6.0) == doctest::Approx(kPi / 2.0));
  CHECK_THROWS_AS(deflection_angle(1.0, 1.0, 0.0, 6.0), ContractError);
  CHECK_THROWS_AS(deflection_angle(1.0, 1.0, 0.05, -6.0), ContractError);
}

TEST_CASE("tip position examples") {
  const TipPose rest = tip_position(0.0, 0.0, 0.05, 6.0, 63.0);
  CHECK(rest.theta == 0.0);
  CHECK(rest.x == 0.0);
  CHECK(rest.y == 0.0);
  CHECK(rest.z == 63.0);

  const TipPose t = tip_position(30.0, 40.0, 0.05, 6.0, 63.0);
  CHECK(t.x == doctest::Approx(-15.75).epsilon(1e-14));
  CHECK(t.y == doctest::Approx(-21.0).epsilon(1e-14));
  CHECK(std::abs(t.z - kZ) < 1e-9);

  const TipPose m = tip_position(-30.0, -40.0, 0.05, 6.0, 63.0);
  CHECK(m.x == doctest::Approx(15.75).epsilon(1e-14));
  CHECK(m.y == doctest::Approx(21.0).epsilon(1e-14));
  CHECK(m.z == t.z);
}

TEST_CASE("pixel from tilt examples") {
  const Vec2 zero = pixel_from_tilt(0.0, 1.0, 0.05, 6.0);
  CHECK(zero.x == 0.0);
  CHECK(zero.y == 0.0);
  const Vec2 p = pixel_from_tilt(kTheta, std::atan2(0.8, 0.6), 0.05, 6.0);
  CHECK(p.x == doctest::Approx(-30.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(-40.0).epsilon(1e-12));
}

TEST_CASE("round trip through the inverse") {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.uniform(0.0, 1.2), az = rng.uniform(0.0, 2.0 * kPi);
    const double k = rng.uniform(0.02, 0.1), l_l = rng.uniform(2.0, 8.0);
    const Vec2 p = pixel_from_tilt(theta, az, k, l_l);
    worst = std::max(worst, std::abs(deflection_angle(p.x, p.y, k, l_l) - theta));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("rotating p keeps theta and rotates the tip") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{rng.uniform(-35.0, 35.0), rng.uniform(-35.0, 35.0)};
    const double delta = rng.uniform(0.0, 2.0 * kPi);
    const Vec2 q = rotate(p, delta);
    const TipPose a = tip_position(p.x, p.y, 0.08, 4.5, 63.0);
    const TipPose b = tip_position(q.x, q.y, 0.08, 4.5, 63.0);
    CHECK(std::abs(a.theta - b.theta) < 1e-12);
    const Vec2 want = rotate({a.x, a.y}, delta);
    CHECK(std::abs(b.x - want.x) < 1e-12);
    CHECK(std::abs(b.y - want.y) < 1e-12);
  }
}

TEST_CASE("theta increases with |p|") {
  double prev = -1.0;
  for (double r = 0.0; r <= 56.25; r += 0.25) {
    const double t = deflection_angle(r * 0.6, r * 0.8, 0.08, 4.5);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("planar tip distance is linear in |p|") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{rng.uniform(-35.0, 35.0), rng.uniform(-35.0, 35.0)};
    const TipPose t = tip_position(p.x, p.y, 0.08, 4.5, 63.0);
    CHECK(std::hypot(t.x, t.y) == doctest::Approx(63.0 / 4.5 * 0.08 * norm(p)).epsilon(1e-14));
  }
  // sin(theta) = k|p|/l_l, so the tip stays on the l_u sphere.
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{rng.uniform(-35.0, 35.0), rng.uniform(-35.0, 35.0)};
    const TipPose t = tip_position(p.x, p.y, 0.08, 4.5, 63.0);
    CHECK(std::sqrt(t.x * t.x + t.y * t.y + t.z * t.z) == doctest::Approx(63.0).epsilon(1e-13));
  }
}

}  // TEST_SUITE
