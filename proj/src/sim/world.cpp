#include <cmath>

#include "whisker/errors.hpp"
#include "whisker/simworld.hpp"

namespace whisker::sim {

namespace {

nlohmann::json to_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }
nlohmann::json to_json(Vec3 v) { return nlohmann::json::array({v.x, v.y, v.z}); }

const char* kind_name(Primitive::Kind k) {
  switch (k) {
    case Primitive::Kind::sphere: return "sphere";
    case Primitive::Kind::ellipsoid: return "ellipsoid";
    case Primitive::Kind::box: return "box";
    case Primitive::Kind::capsule: return "capsule";
  }
  return "unknown";
}

}  // namespace

Scene make_scene(const ArrayGeometry& geometry) {
  Scene scene;
  scene.whiskers.resize(static_cast<std::size_t>(geometry.n_whiskers));
  return scene;
}

Scene step(const Scene& scene, std::span<const double> voltages, double dt,
           const SensorConfig& config) {
  if (!(dt > 0.0)) throw ContractError("step: dt must be positive");
  const auto& g = config.geometry;
  if (scene.whiskers.size() != static_cast<std::size_t>(g.n_whiskers) ||
      voltages.size() != scene.whiskers.size())
    throw ContractError("step: expected one state and one voltage per whisker");

  Scene next = scene;
  next.contacts.clear();
  const double decay = std::exp(-dt / config.actuation.time_constant());
  const RigidObject* object = scene.object ? &*scene.object : nullptr;
  for (int i = 0; i < g.n_whiskers; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const WhiskerState& prev = scene.whiskers[idx];
    const Vec2 target = steady_state_tilt_vector(i, voltages[idx], g, config.actuation);
    // The sensor may have moved since the last step: first make the previous
    // pose feasible again, then relax from there.
    const ContactResult held =
        resolve_contact(i, prev.tilt, g, config.actuation, object, scene.sensor);
    const Vec2 start = held.tilt;
    const Vec2 relaxed = target + decay * (start - target);
    const ContactResult c =
        resolve_contact(i, relaxed, g, config.actuation, object, scene.sensor, start);

    WhiskerState& w = next.whiskers[idx];
    w.tilt = c.tilt;
    w.tilt_rate = (c.tilt - prev.tilt) / dt;
    w.applied_voltage = voltages[idx];
    if (c.in_contact) {
      next.contacts.push_back({i, scene.sensor.to_world(c.point),
                               scene.sensor.dir_to_world(c.normal), c.force, c.lever});
    }
  }
  next.time = scene.time + dt;
  return next;
}

Vec2 base_displacement_mm(Vec2 tilt, double l_l) {
  const double angle = norm(tilt);
  if (angle == 0.0) return {};
  // The marker sits l_l below the pivot, so it moves opposite to the tip.
  return (-l_l * std::sin(angle) / angle) * tilt;
}

Vec2 marker_position(int whisker, const WhiskerState& state, const ArrayGeometry& geometry,
                     const CameraModel& camera) {
  const double a = geometry.azimuth(whisker);
  const Vec2 neutral =
      camera.center_px + (geometry.ring_radius / camera.k) * Vec2{std::cos(a), std::sin(a)};
  return neutral + base_displacement_mm(state.tilt, geometry.l_l) / camera.k;
}

std::vector<Vec2> marker_positions(const Scene& scene, const ArrayGeometry& geometry,
                                   const CameraModel& camera) {
  std::vector<Vec2> out;
  out.reserve(scene.whiskers.size());
  for (std::size_t i = 0; i < scene.whiskers.size(); ++i)
    out.push_back(marker_position(static_cast<int>(i), scene.whiskers[i], geometry, camera));
  return out;
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json j;
  j["time"] = scene.time;
  j["sensor"] = {{"position", to_json(scene.sensor.position)}, {"yaw", scene.sensor.yaw}};
  auto& whiskers = j["whiskers"] = nlohmann::json::array();
  for (const auto& w : scene.whiskers) {
    whiskers.push_back({{"tilt", to_json(w.tilt)},
                        {"tilt_rate", to_json(w.tilt_rate)},
                        {"applied_voltage", w.applied_voltage}});
  }
  if (scene.object) {
    const auto& o = *scene.object;
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : o.parts) {
      nlohmann::json pj{{"kind", kind_name(p.kind)}, {"center", to_json(p.center)}};
      if (p.kind == Primitive::Kind::ellipsoid || p.kind == Primitive::Kind::box)
        pj["half_extents"] = to_json(p.half_extents);
      else
        pj["radius"] = p.radius;
      if (p.kind == Primitive::Kind::capsule) pj["end"] = to_json(p.end);
      parts.push_back(pj);
    }
    j["object"] = {{"name", o.name},
                   {"shape", to_string(o.shape)},
                   {"parts", parts},
                   {"mass_g", o.mass_g},
                   {"com_offset", to_json(o.com_offset)},
                   {"friction_mu", o.friction_mu},
                   {"pose", {{"position", to_json(o.pose.position)}, {"yaw", o.pose.yaw}}}};
  } else {
    j["object"] = nullptr;
  }
  auto& contacts = j["contacts"] = nlohmann::json::array();
  for (const auto& c : scene.contacts) {
    contacts.push_back({{"whisker", c.whisker},
                        {"point", to_json(c.point)},
                        {"normal", to_json(c.normal)},
                        {"force", c.force},
                        {"lever", c.lever}});
  }
  return j;
}

}  // namespace whisker::sim
