#include <algorithm>
#include <cmath>
#include <limits>

#include "whisker/errors.hpp"
#include "whisker/simworld.hpp"

namespace whisker::sim {

namespace {

Vec3 rotate_z(Vec3 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

Vec3 normalized_or(Vec3 v, Vec3 fallback) {
  const double n = norm(v);
  return n > 0.0 ? v / n : fallback;
}

struct Hit {
  double depth = -std::numeric_limits<double>::infinity();
  Vec3 point;   // object frame, on the segment
  Vec3 normal;  // object frame, outward
};

double closest_param(Vec3 p0, Vec3 d, Vec3 c) {
  const double dd = dot(d, d);
  if (dd == 0.0) return 0.0;
  return std::clamp(dot(c - p0, d) / dd, 0.0, 1.0);
}

Hit sphere_hit(const Primitive& s, Vec3 p0, Vec3 d) {
  const double t = closest_param(p0, d, s.center);
  const Vec3 q = p0 + t * d;
  const Vec3 off = q - s.center;
  const double dist = norm(off);
  return {s.radius - dist, q, normalized_or(off, Vec3{1.0, 0.0, 0.0})};
}

// Closest points between segments p0+s*d1 and a+t*d2 (Ericson, RTCD 5.1.9).
void segment_segment(Vec3 p0, Vec3 d1, Vec3 a, Vec3 d2, double& s, double& t) {
  const Vec3 r = p0 - a;
  const double aa = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  if (aa == 0.0 && e == 0.0) { s = t = 0.0; return; }
  if (aa == 0.0) { s = 0.0; t = std::clamp(f / e, 0.0, 1.0); return; }
  const double c = dot(d1, r);
  if (e == 0.0) { t = 0.0; s = std::clamp(-c / aa, 0.0, 1.0); return; }
  const double b = dot(d1, d2);
  const double denom = aa * e - b * b;
  s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / aa, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / aa, 0.0, 1.0);
  }
}

Hit capsule_hit(const Primitive& c, Vec3 p0, Vec3 d) {
  double s = 0.0, t = 0.0;
  segment_segment(p0, d, c.center, c.end - c.center, s, t);
  const Vec3 q = p0 + s * d;
  const Vec3 axis_point = c.center + t * (c.end - c.center);
  const Vec3 off = q - axis_point;
  const double dist = norm(off);
  return {c.radius - dist, q, normalized_or(off, Vec3{1.0, 0.0, 0.0})};
}

Hit ellipsoid_hit(const Primitive& e, Vec3 p0, Vec3 d) {
  const Vec3 h = e.half_extents;
  const auto scale = [&](Vec3 v) { return Vec3{v.x / h.x, v.y / h.y, v.z / h.z}; };
  const Vec3 sp0 = scale(p0 - e.center);
  const Vec3 sd = scale(d);
  const double t = closest_param(sp0, sd, Vec3{});
  const double scaled_dist = norm(sp0 + t * sd);
  const Vec3 q = p0 + t * d;
  const Vec3 rel = q - e.center;
  const Vec3 grad{rel.x / (h.x * h.x), rel.y / (h.y * h.y), rel.z / (h.z * h.z)};
  const double min_axis = std::min({h.x, h.y, h.z});
  return {(1.0 - scaled_dist) * min_axis, q, normalized_or(grad, Vec3{1.0, 0.0, 0.0})};
}

double box_sdf(const Primitive& b, Vec3 p) {
  const Vec3 rel = p - b.center;
  const Vec3 q{std::abs(rel.x) - b.half_extents.x, std::abs(rel.y) - b.half_extents.y,
               std::abs(rel.z) - b.half_extents.z};
  const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
  return norm(outside) + std::min(std::max({q.x, q.y, q.z}), 0.0);
}

Vec3 box_normal(const Primitive& b, Vec3 p) {
  const Vec3 rel = p - b.center;
  const Vec3 q{std::abs(rel.x) - b.half_extents.x, std::abs(rel.y) - b.half_extents.y,
               std::abs(rel.z) - b.half_extents.z};
  const auto sgn = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
  if (q.x > 0.0 || q.y > 0.0 || q.z > 0.0) {
    const Vec3 g{q.x > 0.0 ? sgn(rel.x) * q.x : 0.0, q.y > 0.0 ? sgn(rel.y) * q.y : 0.0,
                 q.z > 0.0 ? sgn(rel.z) * q.z : 0.0};
    return normalized_or(g, Vec3{1.0, 0.0, 0.0});
  }
  if (q.x >= q.y && q.x >= q.z) return {sgn(rel.x), 0.0, 0.0};
  if (q.y >= q.z) return {0.0, sgn(rel.y), 0.0};
  return {0.0, 0.0, sgn(rel.z)};
}

// The box SDF is convex, so it is unimodal along a segment.
Hit box_hit(const Primitive& b, Vec3 p0, Vec3 d) {
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = box_sdf(b, p0 + x1 * d), f2 = box_sdf(b, p0 + x2 * d);
  for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = box_sdf(b, p0 + x1 * d);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = box_sdf(b, p0 + x2 * d);
    }
  }
  double best_t = 0.5 * (lo + hi);
  double best = box_sdf(b, p0 + best_t * d);
  for (double t : {0.0, 1.0}) {
    const double f = box_sdf(b, p0 + t * d);
    if (f < best) { best = f; best_t = t; }
  }
  const Vec3 q = p0 + best_t * d;
  return {-best, q, box_normal(b, q)};
}

Hit primitive_hit(const Primitive& p, Vec3 p0, Vec3 d) {
  switch (p.kind) {
    case Primitive::Kind::sphere: return sphere_hit(p, p0, d);
    case Primitive::Kind::capsule: return capsule_hit(p, p0, d);
    case Primitive::Kind::ellipsoid: return ellipsoid_hit(p, p0, d);
    case Primitive::Kind::box: return box_hit(p, p0, d);
  }
  return {};
}

Vec3 object_from_world(const RigidObject& o, Vec3 w) {
  return rotate_z(w - o.pose.position, -o.pose.yaw);
}
Vec3 world_from_object(const RigidObject& o, Vec3 p) {
  return rotate_z(p, o.pose.yaw) + o.pose.position;
}

Penetration segment_penetration(Vec3 a_local, Vec3 b_local, const RigidObject& object,
                                const SensorPose& sensor) {
  const Vec3 p0 = object_from_world(object, sensor.to_world(a_local));
  const Vec3 p1 = object_from_world(object, sensor.to_world(b_local));
  const Vec3 d = p1 - p0;
  Hit best;
  for (const auto& part : object.parts) {
    const Hit h = primitive_hit(part, p0, d);
    if (h.depth > best.depth) best = h;
  }
  Penetration out;
  out.depth = best.depth;
  out.point = sensor.to_local(world_from_object(object, best.point));
  out.normal = sensor.dir_to_local(rotate_z(best.normal, object.pose.yaw));
  return out;
}

Vec2 unit_or_zero(Vec2 v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec2{};
}

}  // namespace

Vec3 SensorPose::to_local(Vec3 world) const { return dir_to_local(world - position); }

Vec3 SensorPose::to_world(Vec3 local) const { return position + dir_to_world(local); }

Vec3 SensorPose::dir_to_local(Vec3 world) const {
  const Vec3 d = rotate_z(world, -yaw);
  return {d.x, -d.y, -d.z};
}

Vec3 SensorPose::dir_to_world(Vec3 local) const {
  return rotate_z(Vec3{local.x, -local.y, -local.z}, yaw);
}

Vec3 RigidObject::com_world() const { return world_from_object(*this, com_offset); }

Vec3 pivot_position(int whisker, const ArrayGeometry& geometry) {
  const double a = geometry.azimuth(whisker);
  return {geometry.ring_radius * std::cos(a), geometry.ring_radius * std::sin(a), 0.0};
}

Vec3 rod_direction(Vec2 tilt) {
  const double angle = norm(tilt);
  if (angle == 0.0) return {0.0, 0.0, 1.0};
  const double s = std::sin(angle) / angle;
  return {s * tilt.x, s * tilt.y, std::cos(angle)};
}

Rod upper_rod(int whisker, Vec2 tilt, const ArrayGeometry& geometry) {
  return {pivot_position(whisker, geometry), rod_direction(tilt), geometry.l_u};
}

Penetration rod_penetration(const Rod& rod, const RigidObject& object, const SensorPose& sensor) {
  return segment_penetration(rod.pivot, rod.tip(), object, sensor);
}

ContactResult resolve_contact(int whisker, Vec2 commanded_tilt, const ArrayGeometry& geometry,
                              const ActuationParams& params, const RigidObject* object,
                              const SensorPose& sensor, std::optional<Vec2> from) {
  ContactResult out;
  out.tilt = commanded_tilt;
  if (object == nullptr) return out;

  const Vec3 pivot = pivot_position(whisker, geometry);
  if (segment_penetration(pivot, pivot, *object, sensor).depth > 0.0)
    throw SimulationError("object '" + object->name + "' encloses the pivot of whisker " +
                          std::to_string(whisker));

  const auto depth_at = [&](Vec2 tilt) {
    return rod_penetration(upper_rod(whisker, tilt, geometry), *object, sensor);
  };
  // Overlap below a nanometre is round-off at tangency, not contact.
  constexpr double kTouchTol = 1e-9;
  const Penetration initial = depth_at(commanded_tilt);
  if (initial.depth <= kTouchTol) return out;

  Vec2 probe = commanded_tilt;
  Vec3 normal = initial.normal;
  if (from && depth_at(*from).depth <= 0.0) {
    // First touch on the way from the free pose.
    const Vec2 path = commanded_tilt - *from;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (depth_at(*from + mid * path).depth > 0.0) hi = mid; else lo = mid;
    }
    probe = *from + hi * path;
    normal = depth_at(probe).normal;
  }

  // Push along steepest descent of depth in tilt space. A flat face under the
  // tip has a vertical normal, and only the gradient says which way lifts it.
  constexpr double kH = 1e-6;
  const Vec2 grad{
      (depth_at(probe + Vec2{kH, 0.0}).depth - depth_at(probe - Vec2{kH, 0.0}).depth) / (2 * kH),
      (depth_at(probe + Vec2{0.0, kH}).depth - depth_at(probe - Vec2{0.0, kH}).depth) / (2 * kH)};
  const Vec2 radial = radial_unit(whisker, geometry);
  Vec2 push;
  if (std::isfinite(grad.x) && std::isfinite(grad.y) && norm(grad) > 1e-9) {
    push = unit_or_zero(-grad);
  } else {
    push = unit_or_zero(xy(normal));
    if (norm(xy(normal)) < 1e-9) push = radial;
  }

  // March along the push ray in tilt space until the rod is clear, then bisect
  // the last step down to the tangent pose.
  constexpr double kStep = 0.01;
  const auto find_exit = [&](Vec2 dir, double& exit_s) {
    double prev = 0.0;
    for (double s = kStep;; s += kStep) {
      const Vec2 tilt = commanded_tilt + s * dir;
      if (norm(tilt) > params.max_tilt) return false;
      if (depth_at(tilt).depth <= 0.0) {
        double lo = prev, hi = s;
        while (hi - lo > 1e-13) {
          const double mid = 0.5 * (lo + hi);
          if (depth_at(commanded_tilt + mid * dir).depth <= 0.0) hi = mid; else lo = mid;
        }
        exit_s = hi;
        return true;
      }
      prev = s;
    }
  };

  double exit_s = 0.0;
  Vec2 dir = push;
  bool found = false;
  for (Vec2 candidate : {push, -push, radial, -radial}) {
    if (find_exit(candidate, exit_s)) {
      dir = candidate;
      found = true;
      break;
    }
  }
  if (!found)
    throw SimulationError("whisker " + std::to_string(whisker) + " cannot clear object '" +
                          object->name + "' within max_tilt");

  out.tilt = commanded_tilt + exit_s * dir;
  const Penetration at = depth_at(out.tilt);
  out.in_contact = true;
  out.point = at.point;
  out.normal = at.normal;
  out.lever = std::max(norm(at.point - pivot), 1e-9);
  out.force = params.spring_stiffness * norm(out.tilt - commanded_tilt) / out.lever;
  return out;
}

}  // namespace whisker::sim
