#include <algorithm>
#include <cmath>

#include "whisker/errors.hpp"
#include "whisker/simworld.hpp"

namespace whisker::sim {

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::ellipsoid: return "ellipsoid";
    case ShapeKind::box: return "box";
    case ShapeKind::sphere_with_stem: return "sphere-with-stem";
    case ShapeKind::composite: return "composite";
  }
  return "unknown";
}

Primitive Primitive::sphere(Vec3 center, double radius) {
  Primitive p;
  p.kind = Kind::sphere;
  p.center = center;
  p.radius = radius;
  return p;
}

Primitive Primitive::ellipsoid(Vec3 center, Vec3 semi_axes) {
  Primitive p;
  p.kind = Kind::ellipsoid;
  p.center = center;
  p.half_extents = semi_axes;
  return p;
}

Primitive Primitive::box(Vec3 center, Vec3 half_extents) {
  Primitive p;
  p.kind = Kind::box;
  p.center = center;
  p.half_extents = half_extents;
  return p;
}

Primitive Primitive::capsule(Vec3 a, Vec3 b, double radius) {
  Primitive p;
  p.kind = Kind::capsule;
  p.center = a;
  p.end = b;
  p.radius = radius;
  return p;
}

void validate_object(const RigidObject& object) {
  if (!(object.mass_g > 0.0)) throw ContractError("object mass must be positive");
  if (!(object.friction_mu >= 0.0)) throw ContractError("friction coefficient must be >= 0");
  if (object.parts.empty()) throw ContractError("object has no shape parts");
  for (const auto& p : object.parts) {
    bool ok = true;
    switch (p.kind) {
      case Primitive::Kind::sphere:
      case Primitive::Kind::capsule: ok = p.radius > 0.0; break;
      case Primitive::Kind::ellipsoid:
      case Primitive::Kind::box:
        ok = p.half_extents.x > 0.0 && p.half_extents.y > 0.0 && p.half_extents.z > 0.0;
        break;
    }
    if (!ok) throw ContractError("object '" + object.name + "' has a non-positive dimension");
  }
}

double footprint_radius(const RigidObject& object) {
  double r = 0.0;
  for (const auto& p : object.parts) {
    const double c = norm(xy(p.center));
    switch (p.kind) {
      case Primitive::Kind::sphere: r = std::max(r, c + p.radius); break;
      case Primitive::Kind::capsule:
        r = std::max(r, std::max(c, norm(xy(p.end))) + p.radius);
        break;
      case Primitive::Kind::ellipsoid:
        r = std::max(r, c + std::max(p.half_extents.x, p.half_extents.y));
        break;
      case Primitive::Kind::box:
        r = std::max(r, c + std::hypot(p.half_extents.x, p.half_extents.y));
        break;
    }
  }
  return r;
}

}  // namespace whisker::sim
