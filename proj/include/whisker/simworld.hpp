#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "whisker/config.hpp"
#include "whisker/geometry.hpp"

namespace whisker::sim {

// Tilt is stored axis-angle style: its direction is the direction the tip
// moves (in the sensor x-y plane) and its magnitude is the angle between the
// rod and its neutral, vertical pose.
struct WhiskerState {
  Vec2 tilt;
  Vec2 tilt_rate;         // rad/s
  double applied_voltage = 0.0;  // signed; positive retracts
};

enum class ShapeKind { sphere, ellipsoid, box, sphere_with_stem, composite };

const char* to_string(ShapeKind kind);

// Convex building block of an object, in the object frame (origin on the
// supporting surface under the object, +z up).
struct Primitive {
  enum class Kind { sphere, ellipsoid, box, capsule };

  Kind kind = Kind::sphere;
  Vec3 center;
  Vec3 half_extents;  // ellipsoid semi-axes or box half sizes
  Vec3 end;           // capsule: second axis endpoint (center is the first)
  double radius = 0.0;

  static Primitive sphere(Vec3 center, double radius);
  static Primitive ellipsoid(Vec3 center, Vec3 semi_axes);
  static Primitive box(Vec3 center, Vec3 half_extents);
  static Primitive capsule(Vec3 a, Vec3 b, double radius);
};

struct Pose {
  Vec3 position;  // world, mm
  double yaw = 0.0;
};

struct RigidObject {
  std::string name;
  ShapeKind shape = ShapeKind::sphere;
  std::vector<Primitive> parts;
  double mass_g = 1.0;
  Vec3 com_offset;  // centre of mass in the object frame
  double friction_mu = 0.5;
  Pose pose;

  Vec3 com_world() const;
};

// Throws ContractError on mass <= 0, mu < 0, no parts or non-positive dimensions.
void validate_object(const RigidObject& object);

// Largest horizontal distance of the object's surface from its frame origin.
double footprint_radius(const RigidObject& object);

// The array base faces down (-z world). Sensor frame: origin at the array
// centre on the pivot plane, +z along the rods towards the tips.
struct SensorPose {
  Vec3 position;  // world position of the array base centre
  double yaw = 0.0;

  Vec3 to_local(Vec3 world) const;
  Vec3 to_world(Vec3 local) const;
  Vec3 dir_to_local(Vec3 world) const;
  Vec3 dir_to_world(Vec3 local) const;
};

struct Contact {
  int whisker = 0;
  Vec3 point;   // world, on the rod
  Vec3 normal;  // world, outward from the object surface
  double force = 0.0;  // normal force magnitude, N
  double lever = 0.0;  // pivot-to-contact distance along the rod, mm
};

struct Scene {
  std::vector<WhiskerState> whiskers;
  std::optional<RigidObject> object;
  SensorPose sensor;
  double time = 0.0;
  std::vector<Contact> contacts;  // from the most recent step
};

Scene make_scene(const ArrayGeometry& geometry);

// Radial steady-state angle for a held voltage; positive = retraction.
// Odd and monotone in voltage, |result| <= max_tilt. Throws RangeError when
// |voltage| > max_voltage.
double steady_state_tilt(double voltage, const ActuationParams& params);

// Unit vector from the array axis towards whisker i (sensor frame).
Vec2 radial_unit(int whisker, const ArrayGeometry& geometry);
// Tilt vector the whisker relaxes to under a held voltage.
Vec2 steady_state_tilt_vector(int whisker, double voltage, const ArrayGeometry& geometry,
                              const ActuationParams& params);

struct Rod {
  Vec3 pivot;  // sensor frame
  Vec3 dir;    // unit, from pivot to tip
  double length = 0.0;
  Vec3 tip() const { return pivot + length * dir; }
};

Vec3 pivot_position(int whisker, const ArrayGeometry& geometry);
Vec3 rod_direction(Vec2 tilt);
Rod upper_rod(int whisker, Vec2 tilt, const ArrayGeometry& geometry);

struct Penetration {
  double depth = 0.0;  // > 0 when the rod overlaps the object
  Vec3 point;          // sensor frame, on the rod
  Vec3 normal;         // sensor frame, outward from the object
};

// Deepest overlap of a rod segment with the object (sensor frame in and out).
// For spheres, capsules and boxes depth is a distance in mm; for ellipsoids
// it is scaled by the smallest semi-axis. The zero level is exact for all.
Penetration rod_penetration(const Rod& rod, const RigidObject& object, const SensorPose& sensor);

struct ContactResult {
  Vec2 tilt;
  bool in_contact = false;
  Vec3 point;   // sensor frame
  Vec3 normal;  // sensor frame
  double force = 0.0;
  double lever = 0.0;
};

// Quasi-static contact: if the rod at the commanded tilt overlaps the object it
// is pushed out along the horizontal contact normal until tangent. The normal
// is taken where the rod first meets the surface on its way from `from` (a
// free pose, e.g. last step's tilt) to the commanded tilt; without `from`, or
// when `from` itself overlaps, it is taken at the commanded pose. The normal
// force is spring_stiffness * |commanded - corrected| / lever. Throws
// SimulationError if the pivot is inside the object or no tangent pose exists
// within max_tilt.
ContactResult resolve_contact(int whisker, Vec2 commanded_tilt, const ArrayGeometry& geometry,
                              const ActuationParams& params, const RigidObject* object,
                              const SensorPose& sensor,
                              std::optional<Vec2> from = std::nullopt);

// First-order relaxation of every whisker towards its steady state, followed
// by contact resolution. voltages.size() must equal the whisker count.
Scene step(const Scene& scene, std::span<const double> voltages, double dt,
           const SensorConfig& config);

// Base (marker) displacement in the sensor plane, mm.
Vec2 base_displacement_mm(Vec2 tilt, double l_l);
Vec2 marker_position(int whisker, const WhiskerState& state, const ArrayGeometry& geometry,
                     const CameraModel& camera);
std::vector<Vec2> marker_positions(const Scene& scene, const ArrayGeometry& geometry,
                                   const CameraModel& camera);

nlohmann::json scene_to_json(const Scene& scene);

}  // namespace whisker::sim
