#include <algorithm>
#include <cmath>

#include "whisker/errors.hpp"
#include "whisker/grasp.hpp"

namespace whisker::grasp {

using sim::Contact;
using sim::Primitive;
using sim::RigidObject;
using sim::Scene;
using sim::ShapeKind;

std::vector<bool> whisker_mask(int count, int n_whiskers) {
  if (n_whiskers < 2 || n_whiskers % 2 != 0)
    throw UsageError("whisker masks need an even number of whiskers");
  std::vector<bool> mask(static_cast<std::size_t>(n_whiskers), false);
  if (count == n_whiskers) {
    std::fill(mask.begin(), mask.end(), true);
  } else if (count == n_whiskers / 2) {
    for (int i = 0; i < n_whiskers; i += 2) mask[static_cast<std::size_t>(i)] = true;
  } else if (count == 2) {
    mask[0] = true;
    mask[static_cast<std::size_t>(n_whiskers / 2)] = true;
  } else {
    throw UsageError("whisker count must be " + std::to_string(n_whiskers) + ", " +
                     std::to_string(n_whiskers / 2) + " or 2, got " + std::to_string(count));
  }
  return mask;
}

int active_count(const std::vector<bool>& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

int GraspConfig::hold_frames() const {
  return static_cast<int>(std::lround(hold_s / frame_dt));
}

int GraspConfig::frame_count() const {
  return retract_frames + lift_frames + hold_frames() + release_frames;
}

void validate(const GraspConfig& config, int n_whiskers) {
  const auto n = static_cast<std::size_t>(n_whiskers);
  if (config.active.size() != n) throw ContractError("grasp mask size must equal whisker count");
  const int count = active_count(config.active);
  if (count == 0) throw ContractError("grasp mask selects no whisker");
  if (count == n_whiskers / 2 && n_whiskers > 4) {
    const bool even = config.active[0];
    for (std::size_t i = 0; i < n; ++i)
      if (config.active[i] != ((i % 2 == 0) == even))
        throw ContractError("half-count grasp mask must alternate");
  }
  if (count == 2) {
    for (std::size_t i = 0; i < n; ++i)
      if (config.active[i] && !config.active[(i + n / 2) % n])
        throw ContractError("two-whisker grasp mask must be an opposed pair");
  }
  if (!(config.frame_dt > 0.0) || config.retract_frames < 1 || config.lift_frames < 1 ||
      config.release_frames < 1 || config.hold_frames() < 1)
    throw ContractError("grasp timing must be positive");
  if (!(config.lift_mm > 0.0) || config.descend_clearance_mm < 0.0)
    throw ContractError("grasp lift must be positive and clearance non-negative");
  if (config.trials_per_object < 1) throw ContractError("grasp needs at least one trial");
}

const char* to_string(FailureMode mode) {
  switch (mode) {
    case FailureMode::none: return "none";
    case FailureMode::slip: return "slip";
    case FailureMode::force_imbalance: return "force-imbalance";
    case FailureMode::no_contact: return "no-contact";
  }
  return "unknown";
}

Vec2 net_lateral_force(std::span<const Contact> contacts) {
  // The rod pushes into the object, against the outward normal.
  Vec2 f;
  for (const auto& c : contacts) f = f - c.force * xy(c.normal);
  return f;
}

namespace {

double weight_n(const RigidObject& object) { return object.mass_g * 1e-3 * kGravity; }

double line_distance(Vec3 a, Vec3 b, Vec3 p) {
  const Vec3 d = b - a;
  const double len = norm(d);
  if (len == 0.0) return norm(p - a);
  return norm(cross(d, p - a)) / len;
}

}  // namespace

CheckResult success_check(std::span<const Contact> contacts, const RigidObject& object,
                          const GraspTuning& tuning) {
  for (const auto& c : contacts)
    if (!(c.force >= 0.0)) throw ContractError("success_check: negative normal force");
  if (contacts.empty()) return {false, FailureMode::no_contact};

  const double weight = weight_n(object);
  double grip = 0.0;
  for (const auto& c : contacts) grip += object.friction_mu * c.force;
  if (grip < weight * tuning.safety_factor) return {false, FailureMode::slip};

  const double tolerance = tuning.imbalance_frac * weight + tuning.imbalance_floor;
  if (norm(net_lateral_force(contacts)) > tolerance) return {false, FailureMode::force_imbalance};

  if (contacts.size() == 2 &&
      line_distance(contacts[0].point, contacts[1].point, object.com_world()) >
          tuning.com_tolerance)
    return {false, FailureMode::force_imbalance};

  return {true, FailureMode::none};
}

namespace {

// While gripping, friction pins each rod sideways at the surface: a rod only
// travels along its own path from where the descent left it towards the
// commanded tilt and stops at first touch. The spring deficit beyond that
// point is the force it presses with, along its direction of travel, scaled
// by how squarely the surface faces that direction.
struct Grip {
  std::vector<Vec2> tilt;
  std::vector<Contact> contacts;  // world; normal = minus the push direction
};

double overlap(int whisker, Vec2 tilt, const ArrayGeometry& g, const RigidObject& object,
               const sim::SensorPose& pose) {
  return sim::rod_penetration(sim::upper_rod(whisker, tilt, g), object, pose).depth;
}

Grip grip_rods(std::span<const Vec2> from, std::span<const Vec2> free, const RigidObject& object,
               const sim::SensorPose& pose, const SensorConfig& sensor) {
  const auto& g = sensor.geometry;
  Grip out;
  out.tilt.assign(free.begin(), free.end());
  for (int i = 0; i < g.n_whiskers; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Vec2 a = from[idx], b = free[idx];
    auto at = [&](double s) { return a + s * (b - a); };
    double lo = 0.0, hi = -1.0;
    if (overlap(i, a, g, object, pose) > 0.0) {
      hi = 0.0;
    } else {
      constexpr int kScan = 24;
      for (int k = 1; k <= kScan; ++k) {
        const double s = static_cast<double>(k) / kScan;
        if (overlap(i, at(s), g, object, pose) > 0.0) {
          hi = s;
          break;
        }
        lo = s;
      }
      if (hi < 0.0) continue;  // never touches
      for (int it = 0; it < 30; ++it) {
        const double m = 0.5 * (lo + hi);
        (overlap(i, at(m), g, object, pose) > 0.0 ? hi : lo) = m;
      }
    }
    const Vec2 stop = at(lo);
    out.tilt[idx] = stop;
    const double deficit = norm(b - stop);
    if (deficit < 1e-9) continue;
    const sim::Penetration pen =
        sim::rod_penetration(sim::upper_rod(i, at(hi), g), object, pose);
    const double lever = norm(pen.point - sim::pivot_position(i, g));
    if (!(lever > 0.0)) throw SimulationError("grip: contact at the pivot");
    const Vec3 travel = sim::upper_rod(i, b, g).tip() - sim::upper_rod(i, stop, g).tip();
    Vec3 push{travel.x, travel.y, 0.0};
    if (norm(push) < 1e-12) continue;
    push = (1.0 / norm(push)) * push;
    Contact c;
    c.whisker = i;
    c.point = pose.to_world(pen.point);
    c.normal = pose.dir_to_world(-1.0 * push);
    // Only the part of the push the surface faces squeezes the object; a rod
    // lying on a top face presses down, not inwards.
    const double facing = dot(c.normal, pose.dir_to_world(pen.normal));
    if (!(facing > 1e-6)) continue;
    c.force = sensor.actuation.spring_stiffness * deficit / lever * facing;
    c.lever = lever;
    out.contacts.push_back(c);
  }
  return out;
}

// Quasi-static slide of the object on the table while the net rod force
// exceeds what the table holds (the imbalance tolerance), limited to
// max_slide from where it was placed. Returns the distance from there.
double settle(RigidObject& object, Vec3 start, std::span<const Vec2> from,
              std::span<const Vec2> free, const sim::SensorPose& pose,
              const SensorConfig& sensor, Grip& grip) {
  const auto& tuning = sensor.grasp;
  const double tolerance = tuning.imbalance_frac * weight_n(object) + tuning.imbalance_floor;
  double gain = 200.0;  // mm per N
  grip = grip_rods(from, free, object, pose, sensor);
  Vec2 f = net_lateral_force(grip.contacts);
  for (int iter = 0; iter < 200 && gain > 1e-3; ++iter) {
    if (norm(f) <= tolerance) break;
    Vec2 move = gain * f;
    if (norm(move) > 0.5) move = (0.5 / norm(move)) * move;
    Vec3 pos = object.pose.position + Vec3{move.x, move.y, 0.0};
    const Vec3 off = pos - start;
    if (norm(off) > tuning.max_slide) pos = start + (tuning.max_slide / norm(off)) * off;
    if (norm(pos - object.pose.position) < 1e-6) break;
    RigidObject moved = object;
    moved.pose.position = pos;
    Grip next = grip_rods(from, free, moved, pose, sensor);
    const Vec2 nf = net_lateral_force(next.contacts);
    if (norm(nf) >= norm(f)) {
      gain *= 0.5;
      continue;
    }
    object = std::move(moved);
    grip = std::move(next);
    f = nf;
  }
  return norm(object.pose.position - start);
}

double peak_force(std::span<const Contact> contacts) {
  double peak = 0.0;
  for (const auto& c : contacts) peak = std::max(peak, c.force);
  return peak;
}

}  // namespace

GraspOutcome run_grasp_trial(const RigidObject& object, const GraspConfig& config,
                             const SensorConfig& sensor, Rng& rng) {
  const auto& g = sensor.geometry;
  validate(config, g.n_whiskers);
  sim::validate_object(object);

  GraspOutcome out;
  out.seed = rng.seed();
  const int frames = config.frame_count();
  const int lift_at = config.retract_frames;
  const int release_at = lift_at + config.lift_frames + config.hold_frames();
  out.phase_markers = {0, lift_at, release_at};

  RigidObject obj = object;
  const double sigma = sensor.grasp.jitter_sigma;
  const double ox = rng.normal(0.0, sigma);
  const double oy = rng.normal(0.0, sigma);
  obj.pose.position = {ox, oy, 0.0};
  obj.pose.yaw = rng.uniform(0.0, 2.0 * kPi);

  const auto n = static_cast<std::size_t>(g.n_whiskers);
  const std::vector<double> off(n, 0.0);
  std::vector<double> on(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (config.active[i]) on[i] = config.voltage;

  const double z_low = g.l_u + config.descend_clearance_mm;
  const double tau = sensor.actuation.time_constant();
  const double settle_dt = 20.0 * tau;
  const double lift_step = config.lift_mm / config.lift_frames;

  Scene scene = sim::make_scene(g);
  scene.object = obj;
  bool held = false;
  auto record = [&](std::span<const Vec2> tilts) {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = norm(sim::base_displacement_mm(tilts[i], g.l_l));
    out.trace.push_back(std::move(row));
  };
  try {
    // Come down onto the object; rods resting on it get pushed aside.
    for (double z = z_low + config.lift_mm; z > z_low; z -= 1.0) {
      scene.sensor.position = {0.0, 0.0, z};
      scene = sim::step(scene, off, settle_dt, sensor);
    }
    scene.sensor.position = {0.0, 0.0, z_low};
    scene = sim::step(scene, off, settle_dt, sensor);

    std::vector<Vec2> from(n), target(n), free(n);
    for (std::size_t i = 0; i < n; ++i) {
      from[i] = scene.whiskers[i].tilt;
      target[i] = sim::steady_state_tilt_vector(static_cast<int>(i), on[i], g, sensor.actuation);
    }
    RigidObject& body = *scene.object;
    const Vec3 placed = body.pose.position;
    Grip grip;
    for (int f = 0; f < release_at; ++f) {
      // Retraction commanded at frame 0.
      const double decay = std::exp(-(f + 1) * config.frame_dt / tau);
      for (std::size_t i = 0; i < n; ++i) free[i] = target[i] + decay * (from[i] - target[i]);
      if (f <= lift_at) out.slide_mm = settle(body, placed, from, free, scene.sensor, sensor, grip);
      if (f == lift_at) {
        out.contacts = static_cast<int>(grip.contacts.size());
        const CheckResult check = success_check(grip.contacts, body, sensor.grasp);
        held = check.success;
        out.success = held;
        out.failure_mode = check.mode;
        if (config.capture_scene) {
          Scene snap = scene;
          for (std::size_t i = 0; i < n; ++i) snap.whiskers[i].tilt = grip.tilt[i];
          snap.contacts = grip.contacts;
          out.lift_scene = sim::scene_to_json(snap);
        }
      }
      if (f >= lift_at && f < lift_at + config.lift_frames) {
        scene.sensor.position.z += lift_step;
        if (held) body.pose.position.z += lift_step;  // carried rigidly
      }
      if (f > lift_at && !held) grip = grip_rods(from, free, body, scene.sensor, sensor);
      out.peak_force = std::max(out.peak_force, peak_force(grip.contacts));
      record(grip.tilt);
    }

    // Release: coils off, a held object drops back to the table.
    for (std::size_t i = 0; i < n; ++i) scene.whiskers[i].tilt = grip.tilt[i];
    if (held) body.pose.position.z = 0.0;
    std::vector<Vec2> tilts(n);
    for (int f = release_at; f < frames; ++f) {
      scene = sim::step(scene, off, config.frame_dt, sensor);
      out.peak_force = std::max(out.peak_force, peak_force(scene.contacts));
      for (std::size_t i = 0; i < n; ++i) tilts[i] = scene.whiskers[i].tilt;
      record(tilts);
    }
  } catch (const SimulationError&) {
    // Object does not fit inside the whisker cage.
    out.success = false;
    out.failure_mode = FailureMode::no_contact;
    if (out.trace.empty()) out.trace.emplace_back(n, 0.0);
    while (static_cast<int>(out.trace.size()) < frames) out.trace.push_back(out.trace.back());
  }
  return out;
}

std::vector<RigidObject> grasp_objects() {
  std::vector<RigidObject> out;

  // Crumpled paper cup of petals around a small core.
  RigidObject flower;
  flower.name = "paper flower";
  flower.shape = ShapeKind::composite;
  flower.parts = {Primitive::ellipsoid({0, 0, 6}, {9, 9, 6}),
                  Primitive::ellipsoid({6, 0, 8}, {4, 3, 5}),
                  Primitive::ellipsoid({-3, 5.2, 8}, {4, 3, 5}),
                  Primitive::ellipsoid({-3, -5.2, 8}, {4, 3, 5})};
  flower.mass_g = 0.97;
  flower.com_offset = {0, 0, 6};
  flower.friction_mu = 0.5;
  out.push_back(flower);

  RigidObject pompom;
  pompom.name = "pom-pom";
  pompom.shape = ShapeKind::sphere;
  pompom.parts = {Primitive::sphere({0, 0, 10}, 10)};
  pompom.mass_g = 0.33;
  pompom.com_offset = {0, 0, 10};
  pompom.friction_mu = 1.2;
  out.push_back(pompom);

  // Lying on its side; the scales make the outline uneven.
  RigidObject pinecone;
  pinecone.name = "mini pinecone";
  pinecone.shape = ShapeKind::composite;
  pinecone.parts = {Primitive::ellipsoid({0, 0, 7}, {11, 7, 7}),
                    Primitive::sphere({5, 5, 9}, 3),
                    Primitive::sphere({-4, -5.5, 8}, 3),
                    Primitive::sphere({-8, 3, 9}, 2.5)};
  pinecone.mass_g = 0.82;
  pinecone.com_offset = {1, 0, 7};
  pinecone.friction_mu = 0.46;
  out.push_back(pinecone);

  RigidObject popcorn;
  popcorn.name = "popcorn";
  popcorn.shape = ShapeKind::composite;
  popcorn.parts = {Primitive::sphere({0, 0, 6}, 6), Primitive::sphere({4, 3, 7}, 4.5),
                   Primitive::sphere({-4, 2, 6}, 4), Primitive::sphere({1, -5, 5}, 4)};
  popcorn.mass_g = 0.36;
  popcorn.com_offset = {0.5, 0, 6};
  popcorn.friction_mu = 0.28;
  out.push_back(popcorn);

  RigidObject foam;
  foam.name = "foam ball";
  foam.shape = ShapeKind::sphere;
  foam.parts = {Primitive::sphere({0, 0, 9}, 9)};
  foam.mass_g = 0.15;
  foam.com_offset = {0, 0, 9};
  foam.friction_mu = 0.6;
  out.push_back(foam);

  return out;
}

RigidObject grasp_object(const std::string& name) {
  for (auto& o : grasp_objects())
    if (o.name == name) return o;
  throw UsageError("unknown grasp object '" + name + "'");
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& object_name, int trial) {
  // FNV-1a of the name keeps the stream independent of catalogue order.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : object_name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return derive_seed(master, {h, static_cast<std::uint64_t>(trial)});
}

}  // namespace whisker::grasp
