#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "whisker/errors.hpp"
#include "whisker/format.hpp"
#include "whisker/learn.hpp"
#include "whisker/parallel.hpp"
#include "whisker/render.hpp"
#include "whisker/vision.hpp"

namespace whisker::learn {

using sim::Primitive;
using sim::RigidObject;
using sim::ShapeKind;

const std::array<std::string, kNumClasses>& class_names() {
  static const std::array<std::string, kNumClasses> names = {
      "yuanbao", "eraser", "light bulb", "plastic cherry", "plastic strawberry"};
  return names;
}

std::array<std::size_t, kNumClasses> Dataset::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& s : samples) ++counts.at(static_cast<std::size_t>(s.label));
  return counts;
}

std::vector<RigidObject> classification_objects() {
  std::vector<RigidObject> out;

  RigidObject yuanbao;
  yuanbao.name = "yuanbao";
  yuanbao.shape = ShapeKind::composite;
  yuanbao.parts = {Primitive::ellipsoid({0, 0, 10}, {36.9142, 30.883, 10}),
                   Primitive::sphere({0, 0, 10.6861}, 9.6861),
                   Primitive::ellipsoid({34.9142, 0, 13}, {8, 20.07395, 9}),
                   Primitive::ellipsoid({-34.9142, 0, 13}, {8, 20.07395, 9})};
  yuanbao.mass_g = 20.0;
  out.push_back(yuanbao);

  RigidObject eraser;
  eraser.name = "eraser";
  eraser.shape = ShapeKind::box;
  eraser.parts = {Primitive::box({0, 0, 7.6989}, {22.0679, 21, 7.6989})};
  eraser.mass_g = 15.0;
  out.push_back(eraser);

  // Lying on its side: glass bulb plus the screw base.
  RigidObject bulb;
  bulb.name = "light bulb";
  bulb.shape = ShapeKind::sphere_with_stem;
  bulb.parts = {Primitive::sphere({11.3, 0, 31}, 31),
                Primitive::capsule({-13.7, 0, 31}, {-47.7, 0, 31}, 13)};
  bulb.mass_g = 30.0;
  out.push_back(bulb);

  RigidObject cherry;
  cherry.name = "plastic cherry";
  cherry.shape = ShapeKind::sphere_with_stem;
  cherry.parts = {Primitive::sphere({0, 0, 8.8695}, 8.8695),
                  Primitive::capsule({0, 0, 16.739}, {4, 0, 31.739}, 1)};
  cherry.mass_g = 5.0;
  out.push_back(cherry);

  // Lying on its side, tip towards +x, leaves at the back.
  RigidObject strawberry;
  strawberry.name = "plastic strawberry";
  strawberry.shape = ShapeKind::composite;
  strawberry.parts = {Primitive::ellipsoid({3, 0, 15.8846}, {24.4704, 25.2959, 15.8846}),
                      Primitive::ellipsoid({-22.4704, 0, 15.8846}, {4, 15.17754, 12.70768}),
                      Primitive::sphere({12, 21.2959, 15.8846}, 3),
                      Primitive::sphere({12, -21.2959, 15.8846}, 3),
                      Primitive::sphere({20, 0, 22.8846}, 3)};
  strawberry.mass_g = 12.0;
  out.push_back(strawberry);

  return out;
}

int approach_direction(const Protocol& protocol, Approach a) {
  return a.rotation_index % protocol.directions;
}

double approach_distance(const Protocol& protocol, Approach a) {
  return protocol.distances_mm[static_cast<std::size_t>((a.rotation_index / 2) % 2)];
}

namespace {

std::vector<double> tracked_features(const sim::Scene& scene, const SensorConfig& config,
                                     Rng& rng) {
  const auto& g = config.geometry;
  const auto& cam = config.camera;
  const auto markers = sim::marker_positions(scene, g, cam);
  const auto frame =
      render::render_frame(markers, marker_radius_px(g, cam), cam, config.render, rng);
  const auto neutral = neutral_marker_positions(g, cam);
  const auto result = vision::track(frame, config, neutral);
  std::vector<double> f(2 * result.whiskers.size(), 0.0);
  for (std::size_t i = 0; i < result.whiskers.size(); ++i) {
    if (!result.whiskers[i].found) continue;  // lost marker reads as no displacement
    f[2 * i] = result.whiskers[i].p.x * cam.k;
    f[2 * i + 1] = result.whiskers[i].p.y * cam.k;
  }
  return f;
}

std::vector<double> true_features(const sim::Scene& scene, const SensorConfig& config) {
  std::vector<double> f;
  for (const auto& w : scene.whiskers) {
    const Vec2 d = sim::base_displacement_mm(w.tilt, config.geometry.l_l);
    f.push_back(d.x);
    f.push_back(d.y);
  }
  return f;
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t master_seed, int label, Approach a) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(label),
                                   static_cast<std::uint64_t>(a.rotation_index),
                                   static_cast<std::uint64_t>(a.trial)});
}

sim::Scene approach_scene(const RigidObject* object, Approach a, const Protocol& protocol,
                          const SensorConfig& config, std::uint64_t seed) {
  const auto& g = config.geometry;
  Rng rng(seed);
  sim::Scene scene = sim::make_scene(g);
  scene.sensor.yaw = a.rotation_index * protocol.rotation_step_deg * kPi / 180.0;
  const double z = protocol.tip_clearance_mm + g.l_u;
  const double heading = approach_direction(protocol, a) * kPi / 2.0;
  const double distance = approach_distance(protocol, a);
  const Vec2 u{std::cos(heading), std::sin(heading)};
  const auto place = [&](double d) { scene.sensor.position = {d * u.x, d * u.y, z}; };
  const std::vector<double> zero(static_cast<std::size_t>(g.n_whiskers), 0.0);
  const double dt = config.actuation.time_constant();

  if (object != nullptr) {
    RigidObject obj = *object;
    obj.pose.position = {rng.normal(0.0, protocol.jitter_mm), rng.normal(0.0, protocol.jitter_mm),
                         0.0};
    obj.pose.yaw = rng.normal(0.0, protocol.jitter_yaw);
    scene.object = obj;
    // Start clear of the object and close in horizontally.
    double d = sim::footprint_radius(obj) + g.ring_radius + 3.0;
    for (; d > distance; d -= protocol.approach_step_mm) {
      place(d);
      scene = sim::step(scene, zero, dt, config);
    }
  }
  place(distance);
  for (int i = 0; i < protocol.settle_steps; ++i) scene = sim::step(scene, zero, dt, config);
  return scene;
}

LabeledSample collect_sample(const RigidObject* object, int label, Approach a,
                             const Protocol& protocol, const SensorConfig& config,
                             std::uint64_t master_seed) {
  LabeledSample sample;
  sample.label = label;
  auto& prov = sample.provenance;
  prov.rotation_deg = static_cast<int>(std::lround(a.rotation_index * protocol.rotation_step_deg));
  prov.direction = approach_direction(protocol, a);
  prov.distance_mm = approach_distance(protocol, a);
  prov.trial = a.trial;
  prov.seed = sample_seed(master_seed, label, a);

  const sim::Scene scene = approach_scene(object, a, protocol, config, prov.seed);
  if (protocol.source == FeatureSource::tracked) {
    Rng render_rng(derive_seed(prov.seed, {1}));
    sample.features = tracked_features(scene, config, render_rng);
  } else {
    sample.features = true_features(scene, config);
  }
  return sample;
}

Dataset collect_classification_dataset(std::span<const RigidObject> objects,
                                       const Protocol& protocol, const SensorConfig& config,
                                       std::uint64_t master_seed, int jobs) {
  const std::size_t per = static_cast<std::size_t>(protocol.samples_per_object());
  Dataset ds;
  ds.samples.resize(objects.size() * per);
  parallel_for(ds.samples.size(), jobs, [&](std::size_t i) {
    const std::size_t obj = i / per, k = i % per;
    const Approach a{static_cast<int>(k) / protocol.trials, static_cast<int>(k) % protocol.trials};
    ds.samples[i] = collect_sample(&objects[obj], static_cast<int>(obj), a, protocol, config,
                                   master_seed);
  });
  return ds;
}

std::vector<double> rotate_features(std::span<const double> features, int j) {
  if (features.size() != 16)
    throw ConfigError("45 degree augmentation needs exactly 8 whiskers (16 features)");
  std::vector<double> out(16, 0.0);
  const double angle = j * kPi / 4.0;
  for (int i = 0; i < 8; ++i) {
    const Vec2 v = rotate({features[2 * i], features[2 * i + 1]}, angle);
    const int dst = ((i + j) % 8 + 8) % 8;
    out[2 * dst] = v.x;
    out[2 * dst + 1] = v.y;
  }
  return out;
}

Dataset augment_rotation_45(const Dataset& dataset) {
  for (const auto& s : dataset.samples)
    if (s.features.size() != 16)
      throw ConfigError("45 degree augmentation needs exactly 8 whiskers (16 features)");
  Dataset out;
  out.samples.reserve(dataset.size() * 8);
  for (const auto& s : dataset.samples) {
    for (int j = 0; j < 8; ++j) {
      LabeledSample c = s;
      if (j != 0) c.features = rotate_features(s.features, j);
      c.provenance.augment = (s.provenance.augment + j) % 8;
      out.samples.push_back(std::move(c));
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ContractError("train_fraction must be in (0, 1)");
  std::vector<bool> to_train(dataset.size(), false);
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (dataset.samples[i].label == c) idx.push_back(i);
    shuffle(idx, rng);
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_train && k < idx.size(); ++k) to_train[idx[k]] = true;
  }
  std::pair<Dataset, Dataset> out;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (to_train[i] ? out.first : out.second).samples.push_back(dataset.samples[i]);
  return out;
}

std::string dataset_csv(const Dataset& dataset) {
  std::ostringstream os;
  const std::size_t dim = dataset.samples.empty() ? 16 : dataset.samples[0].features.size();
  for (std::size_t i = 0; i < dim; ++i) os << 'f' << i << ',';
  os << "label,class,rotation_deg,direction,distance_mm,trial,seed,augment\n";
  for (const auto& s : dataset.samples) {
    for (double f : s.features) os << format_double(f) << ',';
    const auto& p = s.provenance;
    os << s.label << ',' << class_names().at(static_cast<std::size_t>(s.label)) << ','
       << p.rotation_deg << ',' << p.direction << ',' << format_double(p.distance_mm) << ','
       << p.trial << ',' << p.seed << ',' << p.augment << '\n';
  }
  return os.str();
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << dataset_csv(dataset);
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

template <class T>
T parse_field(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("dataset line " + std::to_string(line) + ": bad value '" + s + "'");
  return v;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset: empty file");
  std::size_t dim = 0;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      if (cell == "f" + std::to_string(dim)) ++dim;
  }
  Dataset ds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != dim + 8)
      throw FormatError("dataset line " + std::to_string(lineno) + ": expected " +
                        std::to_string(dim + 8) + " columns");
    LabeledSample s;
    for (std::size_t i = 0; i < dim; ++i) s.features.push_back(parse_field<double>(cells[i], lineno));
    s.label = parse_field<int>(cells[dim], lineno);
    if (s.label < 0 || s.label >= kNumClasses)
      throw FormatError("dataset line " + std::to_string(lineno) + ": label out of range");
    auto& p = s.provenance;
    p.rotation_deg = parse_field<int>(cells[dim + 2], lineno);
    p.direction = parse_field<int>(cells[dim + 3], lineno);
    p.distance_mm = parse_field<double>(cells[dim + 4], lineno);
    p.trial = parse_field<int>(cells[dim + 5], lineno);
    p.seed = parse_field<std::uint64_t>(cells[dim + 6], lineno);
    p.augment = parse_field<int>(cells[dim + 7], lineno);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace whisker::learn
