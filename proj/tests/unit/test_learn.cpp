#include <cmath>
#include <cstring>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "whisker/config.hpp"
#include "whisker/errors.hpp"
#include "whisker/learn.hpp"
#include "whisker/rng.hpp"
#include "whisker/selftest.hpp"

using namespace whisker;
using namespace whisker::learn;

namespace {

// Independent dense-layer evaluation used as the forward-pass oracle.
std::vector<double> reference_forward(const std::vector<double>& x, const MlpParams& p) {
  std::vector<double> h(static_cast<std::size_t>(p.hidden));
  for (int j = 0; j < p.hidden; ++j) {
    double a = p.b1[static_cast<std::size_t>(j)];
    for (int i = 0; i < p.inputs; ++i)
      a += p.w1[static_cast<std::size_t>(j * p.inputs + i)] * x[static_cast<std::size_t>(i)];
    h[static_cast<std::size_t>(j)] = a > 0.0 ? a : 0.0;
  }
  std::vector<double> out(static_cast<std::size_t>(p.outputs));
  for (int o = 0; o < p.outputs; ++o) {
    double a = p.b2[static_cast<std::size_t>(o)];
    for (int j = 0; j < p.hidden; ++j)
      a += p.w2[static_cast<std::size_t>(o * p.hidden + j)] * h[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(o)] = a;
  }
  return out;
}

Dataset synthetic(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (int c = 0; c < kNumClasses; ++c)
    for (int k = 0; k < per_class; ++k) {
      LabeledSample s;
      s.label = c;
      s.features.assign(16, 0.0);
      for (auto& f : s.features) f = rng.normal(0.0, 0.1);
      s.features[static_cast<std::size_t>(2 * c)] += 1.0;
      s.provenance.trial = k;
      d.samples.push_back(s);
    }
  return d;
}

bool same_bits(const MlpParams& a, const MlpParams& b) {
  const auto ab = a.blocks();
  const auto bb = b.blocks();
  for (std::size_t k = 0; k < ab.size(); ++k) {
    if (ab[k]->size() != bb[k]->size()) return false;
    if (std::memcmp(ab[k]->data(), bb[k]->data(), ab[k]->size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("object suite") {
  const auto objs = classification_objects();
  REQUIRE(objs.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(objs[static_cast<std::size_t>(i)].name == class_names()[static_cast<std::size_t>(i)]);
  for (const auto& o : objs) CHECK_NOTHROW(sim::validate_object(o));
}

TEST_CASE("protocol cycles directions and distances") {
  const Protocol p;
  CHECK(p.samples_per_object() == 30);
  const int dirs[] = {0, 1, 2, 3, 0, 1};
  const double dist[] = {30, 30, 10, 10, 30, 30};
  for (int r = 0; r < 6; ++r)
    for (int t = 0; t < 5; ++t) {
      CHECK(approach_direction(p, {r, t}) == dirs[r]);
      CHECK(approach_distance(p, {r, t}) == dist[r]);
    }
}

TEST_CASE("control run without an object is all zeros") {
  const SensorConfig cfg;
  for (FeatureSource src : {FeatureSource::ground_truth, FeatureSource::tracked}) {
    Protocol p;
    p.source = src;
    const auto first = collect_sample(nullptr, 0, {0, 0}, p, cfg, 3).features;
    for (int r = 0; r < 6; ++r)
      for (int t = 0; t < 5; ++t) {
        const auto s = collect_sample(nullptr, 0, {r, t}, p, cfg, 3);
        REQUIRE(s.features.size() == 16);
        // The simulator reports exact rest; the tracker sees the rest frame
        // to within its sub-pixel error, and the same way every time.
        for (double f : s.features) {
          if (src == FeatureSource::ground_truth) CHECK(f == 0.0);
          else CHECK(std::abs(f) < 0.5 * cfg.camera.k);
        }
        CHECK(s.features == first);
      }
  }
}

TEST_CASE("default suite gives 30 samples per class") {
  const SensorConfig cfg;
  Protocol p;
  p.source = FeatureSource::ground_truth;
  const auto objs = classification_objects();
  const Dataset d = collect_classification_dataset(objs, p, cfg, 0, 2);
  CHECK(d.size() == 150);
  for (auto n : d.class_counts()) CHECK(n == 30);
  // Near approaches always touch. Far ones touch exactly when the object
  // reaches past the whisker ring (the cherry does not).
  for (const auto& s : d.samples) {
    double sum = 0.0;
    for (double f : s.features) sum += std::abs(f);
    const double reach = sim::footprint_radius(objs[static_cast<std::size_t>(s.label)]) +
                         cfg.geometry.ring_radius;
    if (s.provenance.distance_mm == 10.0 || reach > s.provenance.distance_mm + 2.0) CHECK(sum > 0.0);
    if (reach < s.provenance.distance_mm - 2.0) CHECK(sum == 0.0);
  }
  // Parallel collection does not change the data.
  const Dataset serial = collect_classification_dataset(objs, p, cfg, 0, 1);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.samples[i].features == serial.samples[i].features);
}

TEST_CASE("opposite approaches to a sphere are related by the half-turn") {
  SensorConfig cfg;
  Protocol p;
  p.source = FeatureSource::ground_truth;
  p.rotation_step_deg = 0.0;
  p.distances_mm = {20.0, 20.0};
  p.jitter_mm = 0.0;
  p.jitter_yaw = 0.0;
  sim::RigidObject ball;
  ball.name = "ball";
  ball.parts = {sim::Primitive::sphere({0, 0, 15}, 15)};
  for (int d = 0; d < 2; ++d) {
    const auto a = collect_sample(&ball, 0, {d, 0}, p, cfg, 1);
    const auto b = collect_sample(&ball, 0, {d + 2, 0}, p, cfg, 1);
    double touched = 0.0;
    for (double f : a.features) touched += std::abs(f);
    CHECK(touched > 0.1);
    const auto rotated = rotate_features(a.features, 4);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(rotated[i] - b.features[i]) < 1e-6);
  }
}

TEST_CASE("rotation operator") {
  Rng rng(4);
  std::vector<double> f(16);
  for (auto& v : f) v = rng.normal();
  CHECK(rotate_features(f, 0) == f);

  auto g = f;
  for (int k = 0; k < 8; ++k) g = rotate_features(g, 1);
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(g[i] - f[i]) < 1e-9);

  for (int j = 0; j < 8; ++j) {
    const auto back = rotate_features(rotate_features(f, j), (8 - j) % 8);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(back[i] - f[i]) < 1e-9);
  }

  std::vector<double> e(16, 0.0);
  e[0] = 1.0;
  const auto r = rotate_features(e, 1);
  for (std::size_t i = 0; i < 16; ++i) {
    if (i == 2 || i == 3) continue;
    CHECK(r[i] == 0.0);
  }
  CHECK(r[2] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(r[3] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  CHECK_THROWS_AS(rotate_features(std::vector<double>(12, 0.0), 1), ConfigError);
  Dataset six;
  six.samples.push_back({std::vector<double>(12, 0.0), 0, {}});
  CHECK_THROWS_AS(augment_rotation_45(six), ConfigError);
}

TEST_CASE("augmentation keeps labels and numbers the copies") {
  const Dataset d = synthetic(3, 1);
  const Dataset a = augment_rotation_45(d);
  REQUIRE(a.size() == 8 * d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int j = 0; j < 8; ++j) {
      const auto& s = a.samples[i * 8 + static_cast<std::size_t>(j)];
      CHECK(s.label == d.samples[i].label);
      CHECK(s.provenance.augment == j);
      CHECK(s.features == rotate_features(d.samples[i].features, j));
    }
}

TEST_CASE("dataset arithmetic") {
  const Dataset raw = synthetic(30, 2);
  const Dataset aug = augment_rotation_45(raw);
  CHECK(aug.size() == 1200);
  for (auto n : aug.class_counts()) CHECK(n == 240);
  Rng r1(5), r2(5);
  const auto [train, test] = split(aug, 0.7, r1);
  CHECK(train.size() == 840);
  CHECK(test.size() == 360);
  for (auto n : train.class_counts()) CHECK(n == 168);
  for (auto n : test.class_counts()) CHECK(n == 72);
  const auto [train2, test2] = split(aug, 0.7, r2);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train.samples[i].features == train2.samples[i].features);
  for (std::size_t i = 0; i < test.size(); ++i) CHECK(test.samples[i].features == test2.samples[i].features);
}

TEST_CASE("forward pass") {
  MlpParams zero(16, 32, 5);
  const std::vector<double> x(16, 1.5);
  for (double v : mlp_forward(x, zero)) CHECK(v == 0.0);
  const auto lg = cross_entropy_loss_and_grad({mlp_forward(x, zero)}, std::vector<int>{2});
  for (std::size_t k = 0; k < 5; ++k) CHECK(lg.dlogits[0][k] + (k == 2 ? 1.0 : 0.0) == doctest::Approx(0.2));

  MlpParams bias(16, 32, 5);
  for (auto& b : bias.b1) b = 0.7;
  bias.b2 = {1, 0, 0, 0, 0};
  const auto out = mlp_forward(x, bias);
  CHECK(out == std::vector<double>{1, 0, 0, 0, 0});

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const MlpParams p = init_params(16, 32, 5, rng);
    std::vector<double> in(16);
    for (auto& v : in) v = rng.normal(0.0, 3.0);
    const auto a = mlp_forward(in, p);
    const auto b = reference_forward(in, p);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }

  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(mlp_forward(bad, zero), ContractError);
  bad[3] = INFINITY;
  CHECK_THROWS_AS(mlp_forward(bad, zero), ContractError);
  CHECK_THROWS_AS(mlp_forward(std::vector<double>(15, 0.0), zero), ContractError);
}

TEST_CASE("init is uniform within the fan-in bound") {
  Rng rng(7);
  const MlpParams p = init_params(16, 32, 5, rng);
  for (double w : p.w1) CHECK(std::abs(w) <= 0.25);
  for (double w : p.b1) CHECK(std::abs(w) <= 0.25);
  for (double w : p.w2) CHECK(std::abs(w) <= 1.0 / std::sqrt(32.0));
  CHECK(p.parameter_count() == 16u * 32u + 32u + 32u * 5u + 5u);
}

TEST_CASE("cross entropy") {
  const auto u = cross_entropy_loss_and_grad({{0.3, 0.3, 0.3, 0.3, 0.3}}, std::vector<int>{4});
  CHECK(u.loss == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  const auto s = cross_entropy_loss_and_grad({{1000, 0, 0, 0, 0}}, std::vector<int>{0});
  CHECK(std::isfinite(s.loss));
  CHECK(s.loss < 1e-12);
  const auto w = cross_entropy_loss_and_grad({{1000, 0, 0, 0, 0}}, std::vector<int>{1});
  CHECK(w.loss == doctest::Approx(1000.0));
  CHECK_THROWS_AS(cross_entropy_loss_and_grad({{0, 0, 0, 0, 0}}, std::vector<int>{5}), ContractError);
}

TEST_CASE("gradient matches central differences") {
  const auto r = selftest::gradient_check(77, 5, 1e-5, 1e-4);
  CHECK(r.failures == 0);
  CHECK(r.worst < 1e-4);
  CHECK(r.cases == 5 * static_cast<int>(MlpParams(16, 32, 5).parameter_count()));
  // Seed 5 puts first-layer parameters within h of a ReLU kink.
  const auto kinked = selftest::gradient_check(5, 5, 1e-5, 1e-4);
  CHECK(kinked.detail.find(" 0 one-sided") == std::string::npos);
  CHECK(kinked.failures == 0);
}

TEST_CASE("output bias gradient matches a direct difference") {
  // Output biases never meet a kink, so the difference is tight.
  Rng rng(12);
  MlpParams p = init_params(16, 32, 5, rng);
  std::vector<std::vector<double>> xs(6, std::vector<double>(16));
  for (auto& x : xs)
    for (auto& v : x) v = rng.normal(0.0, 2.0);
  const std::vector<int> labels{0, 1, 2, 3, 4, 0};
  MlpParams g;
  loss_and_param_grad(p, xs, labels, g);
  const double h = 1e-5;
  const double keep = p.b2[1];
  MlpParams s;
  p.b2[1] = keep + h;
  const double up = loss_and_param_grad(p, xs, labels, s);
  p.b2[1] = keep - h;
  const double down = loss_and_param_grad(p, xs, labels, s);
  const double numeric = (up - down) / (2 * h);
  CHECK(std::abs(numeric - g.b2[1]) < 1e-9);
}

TEST_CASE("adam") {
  Rng rng(8);
  MlpParams p = init_params(16, 32, 5, rng);
  const MlpParams before = p;
  AdamState st = make_adam_state(p);
  for (auto* b : st.m.blocks())
    for (auto& v : *b) v = 0.5;
  for (auto* b : st.v.blocks())
    for (auto& v : *b) v = 0.25;
  adam_step(p, MlpParams(16, 32, 5), st, 3);
  // Zero gradient: moments decay, the step is the bias-corrected leftover momentum.
  CHECK(st.m.w1[0] == doctest::Approx(0.45));
  CHECK(st.v.w1[0] == doctest::Approx(0.24975));

  MlpParams q = before;
  AdamState fresh = make_adam_state(q);
  adam_step(q, MlpParams(16, 32, 5), fresh, 1);
  CHECK(q == before);

  MlpParams one(1, 1, 1);
  MlpParams g(1, 1, 1);
  g.w1 = {1.0};
  AdamState s1 = make_adam_state(one);
  adam_step(one, g, s1, 1);
  CHECK(one.w1[0] == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-15));
  CHECK(one.b1[0] == 0.0);
  CHECK_THROWS_AS(adam_step(one, g, s1, 0), ContractError);
}

TEST_CASE("training is bitwise reproducible") {
  const Dataset d = augment_rotation_45(synthetic(10, 9));
  LearnSettings ls;
  const auto a = train(d, ls, 42);
  const auto b = train(d, ls, 42);
  CHECK(same_bits(a.params, b.params));
  CHECK(a.report.epoch_loss == b.report.epoch_loss);
  REQUIRE(a.report.epoch_loss.size() == 10);
  CHECK(a.report.epoch_loss.back() < a.report.epoch_loss.front());
}

TEST_CASE("separable toy problem is learned") {
  Rng rng(10);
  Dataset d;
  for (int i = 0; i < 200; ++i) {
    LabeledSample s;
    s.label = i % 2;
    s.features.assign(16, 0.0);
    s.features[0] = (s.label == 0 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
    s.features[1] = rng.normal();
    d.samples.push_back(s);
  }
  LearnSettings ls;
  ls.standardize = false;
  const auto r = train(d, ls, 1);
  CHECK(r.report.train_accuracy == 1.0);
}

TEST_CASE("standardisation is folded into the first layer") {
  Dataset d = synthetic(20, 11);
  for (auto& s : d.samples)
    for (auto& f : s.features) f = 40.0 * f + 3.0;
  LearnSettings ls;
  const auto r = train(d, ls, 2);
  CHECK(r.report.train_accuracy > 0.95);
  CHECK(evaluate(r.params, d).accuracy == r.report.train_accuracy);
}

TEST_CASE("divergence raises a training error") {
  Dataset d = synthetic(10, 12);
  for (auto& s : d.samples)
    for (auto& f : s.features) f *= 1e200;
  LearnSettings ls;
  ls.standardize = false;
  ls.learning_rate = 1e300;
  try {
    train(d, ls, 3);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() >= 0);
    CHECK(e.epoch() < ls.epochs);
  }
}

TEST_CASE("evaluation") {
  Dataset test;
  for (int c = 0; c < 5; ++c)
    for (int k = 0; k < 72; ++k) {
      LabeledSample s;
      s.label = c;
      s.features.assign(16, 0.0);
      s.features[static_cast<std::size_t>(c)] = 1.0;
      test.samples.push_back(s);
    }
  MlpParams always0(16, 32, 5);
  always0.b2 = {1, 0, 0, 0, 0};
  const auto e0 = evaluate(always0, test);
  CHECK(e0.accuracy == doctest::Approx(0.2));
  for (int c = 0; c < 5; ++c) {
    CHECK(e0.confusion[static_cast<std::size_t>(c)][0] == 72);
    int row = 0;
    for (int v : e0.confusion[static_cast<std::size_t>(c)]) row += v;
    CHECK(row == 72);
  }

  MlpParams perfect(16, 32, 5);
  for (int c = 0; c < 5; ++c) {
    perfect.w1[static_cast<std::size_t>(c * 16 + c)] = 1.0;
    perfect.w2[static_cast<std::size_t>(c * 32 + c)] = 1.0;
  }
  const auto ep = evaluate(perfect, test);
  CHECK(ep.accuracy == 1.0);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      CHECK(ep.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] == (a == b ? 72 : 0));
  CHECK(confusion_csv(ep.confusion).find("72") != std::string::npos);
}

TEST_CASE("label shuffle is a permutation of the labels") {
  const Dataset d = synthetic(30, 13);
  Rng rng(14);
  const Dataset s = shuffle_labels(d, rng);
  CHECK(s.class_counts() == d.class_counts());
  int moved = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(s.samples[i].features == d.samples[i].features);
    moved += s.samples[i].label != d.samples[i].label;
  }
  CHECK(moved > 50);
}

TEST_CASE("model file round trip and corruption") {
  TempDir dir("model");
  Rng rng(15);
  const MlpParams p = init_params(16, 32, 5, rng);
  write_model(p, dir / "m.bin");
  const MlpParams q = read_model(dir / "m.bin");
  CHECK(same_bits(p, q));
  const std::string bytes = encode_model(p);
  CHECK(bytes.substr(0, 4) == "WMLP");
  CHECK(bytes.size() == 4 + 4 * 4 + 8 * p.parameter_count());
  CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_model("XMLP" + bytes.substr(4)), FormatError);
  CHECK_THROWS_AS(decode_model(bytes + "x"), FormatError);
  CHECK_THROWS_AS(read_model(dir / "missing.bin"), IoError);
}

TEST_CASE("dataset csv round trip") {
  TempDir dir("csv");
  Dataset d = synthetic(4, 16);
  d.samples[3].provenance = {120, 2, 10.0, 4, 987654321987654321ull, 0};
  write_dataset_csv(d, dir / "d.csv");
  const Dataset back = read_dataset_csv(dir / "d.csv");
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.samples[i].features == d.samples[i].features);
    CHECK(back.samples[i].label == d.samples[i].label);
    CHECK(back.samples[i].provenance.seed == d.samples[i].provenance.seed);
    CHECK(back.samples[i].provenance.rotation_deg == d.samples[i].provenance.rotation_deg);
  }
  spit(dir / "bad.csv", "f0,f1\n1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(dir / "bad.csv"), FormatError);
}

TEST_CASE("experiment bookkeeping") {
  const SensorConfig cfg;
  const auto run = run_classification(synthetic(30, 17), cfg, 3, 2, 3);
  CHECK(run.raw.size() == 150);
  CHECK(run.augmented.size() == 1200);
  CHECK(run.train.size() == 840);
  CHECK(run.test.size() == 360);
  CHECK(run.control_accuracy.size() == 3);
  CHECK(run.result.report.test_accuracy > 0.9);
  const auto again = run_classification(synthetic(30, 17), cfg, 3, 1, 3);
  CHECK(same_bits(run.result.params, again.result.params));
  CHECK(run.control_accuracy == again.control_accuracy);
}

}  // TEST_SUITE
