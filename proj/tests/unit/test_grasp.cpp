#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "doctest.h"

#include "whisker/config.hpp"
#include "whisker/errors.hpp"
#include "whisker/grasp.hpp"
#include "whisker/rng.hpp"

using namespace whisker;
using namespace whisker::grasp;
using sim::Contact;

namespace {

Contact contact(Vec3 point, Vec3 normal, double force) {
  Contact c;
  c.point = point;
  c.normal = normal;
  c.force = force;
  return c;
}

sim::RigidObject centred_ball(double mass_g, double mu) {
  sim::RigidObject o;
  o.name = "ball";
  o.parts = {sim::Primitive::sphere({0, 0, 10}, 10)};
  o.com_offset = {0, 0, 10};
  o.mass_g = mass_g;
  o.friction_mu = mu;
  return o;
}

int successes(const sim::RigidObject& o, int whiskers, int trials, std::uint64_t seed) {
  const SensorConfig sensor;
  GraspConfig cfg;
  cfg.active = whisker_mask(whiskers);
  int n = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(trial_seed(seed, o.name, t));
    n += run_grasp_trial(o, cfg, sensor, rng).success;
  }
  return n;
}

}  // namespace

TEST_SUITE("grasp") {

TEST_CASE("whisker masks") {
  CHECK(active_count(whisker_mask(8)) == 8);
  const auto four = whisker_mask(4);
  CHECK(active_count(four) == 4);
  for (int i = 0; i < 8; ++i) CHECK(four[static_cast<std::size_t>(i)] == (i % 2 == 0));
  const auto two = whisker_mask(2);
  CHECK(active_count(two) == 2);
  CHECK(two[0]);
  CHECK(two[4]);
  CHECK_THROWS_AS(whisker_mask(3), UsageError);
  CHECK_THROWS_AS(whisker_mask(0), UsageError);
}

TEST_CASE("grasp config validation") {
  GraspConfig c;
  CHECK_NOTHROW(validate(c, 8));
  c.active = std::vector<bool>(8, false);
  CHECK_THROWS_AS(validate(c, 8), ContractError);
  c.active = whisker_mask(2);
  c.active[4] = false;
  c.active[3] = true;  // not opposed
  CHECK_THROWS_AS(validate(c, 8), ContractError);
  c = GraspConfig{};
  c.active.pop_back();
  CHECK_THROWS_AS(validate(c, 8), ContractError);
  c = GraspConfig{};
  c.frame_dt = 0.0;
  CHECK_THROWS_AS(validate(c, 8), ContractError);
}

TEST_CASE("success check: friction arithmetic") {
  const sim::RigidObject o = centred_ball(0.15, 0.5);
  GraspTuning t;
  // Opposed 2 mN contacts through the centre of mass.
  std::vector<Contact> two{contact({-10, 0, 10}, {-1, 0, 0}, 0.002),
                           contact({10, 0, 10}, {1, 0, 0}, 0.002)};
  const double weight = 0.15e-3 * kGravity;
  CHECK(weight == doctest::Approx(1.4715e-3));
  CHECK(0.5 * 0.002 * 2 >= weight);
  const auto ok = success_check(two, o, t);
  CHECK(ok.success);
  CHECK(ok.mode == FailureMode::none);

  // Half the force no longer carries the weight.
  for (auto& c : two) c.force = 0.001;
  CHECK(success_check(two, o, t).mode == FailureMode::slip);
}

TEST_CASE("success check: failure modes") {
  const sim::RigidObject o = centred_ball(0.15, 0.5);
  const GraspTuning t;
  CHECK(success_check({}, o, t).mode == FailureMode::no_contact);

  // Symmetric ring of equal forces: net force vanishes.
  std::vector<Contact> ring;
  for (int i = 0; i < 8; ++i) {
    const double a = i * kPi / 4.0;
    ring.push_back(contact({10 * std::cos(a), 10 * std::sin(a), 10}, {std::cos(a), std::sin(a), 0}, 0.003));
  }
  CHECK(norm(net_lateral_force(ring)) < 1e-15);
  CHECK(success_check(ring, o, t).success);

  // Lopsided pair.
  std::vector<Contact> lopsided{contact({-10, 0, 10}, {-1, 0, 0}, 0.002),
                                contact({10, 0, 10}, {1, 0, 0}, 0.02)};
  CHECK(success_check(lopsided, o, t).mode == FailureMode::force_imbalance);

  // Balanced pair whose line misses the centre of mass by 5 mm.
  std::vector<Contact> offset{contact({-10, 5, 10}, {-1, 0, 0}, 0.005),
                              contact({10, 5, 10}, {1, 0, 0}, 0.005)};
  CHECK(success_check(offset, o, t).mode == FailureMode::force_imbalance);
  offset[0].point.y = offset[1].point.y = 1.0;
  CHECK(success_check(offset, o, t).success);

  std::vector<Contact> negative{contact({0, 0, 0}, {1, 0, 0}, -1.0)};
  CHECK_THROWS_AS(success_check(negative, o, t), ContractError);
}

TEST_CASE("massless object is held by any contact") {
  const SensorConfig sensor;
  sim::RigidObject o = grasp_object("foam ball");
  o.mass_g = 1e-9;
  GraspConfig cfg;
  for (int t = 0; t < 5; ++t) {
    Rng rng(trial_seed(1, o.name, t));
    const auto r = run_grasp_trial(o, cfg, sensor, rng);
    CHECK(r.contacts > 0);
    CHECK(r.success);
  }
}

TEST_CASE("frictionless objects slip") {
  const SensorConfig sensor;
  for (const auto& base : grasp_objects()) {
    sim::RigidObject o = base;
    o.friction_mu = 0.0;
    for (int n : {8, 4, 2}) {
      GraspConfig cfg;
      cfg.active = whisker_mask(n);
      for (int t = 0; t < 3; ++t) {
        Rng rng(trial_seed(2, o.name, t));
        const auto r = run_grasp_trial(o, cfg, sensor, rng);
        CHECK_FALSE(r.success);
        if (r.contacts > 0) CHECK(r.failure_mode == FailureMode::slip);
      }
    }
  }
}

TEST_CASE("foam ball with eight whiskers") {
  CHECK(successes(grasp_object("foam ball"), 8, 20, 0) >= 19);
}

TEST_CASE("an object wider than the cage is a recorded miss") {
  const SensorConfig sensor;
  sim::RigidObject big;
  big.name = "slab";
  big.parts = {sim::Primitive::box({0, 0, 5}, {60, 60, 5})};
  big.mass_g = 5.0;
  GraspConfig cfg;
  Rng rng(3);
  GraspOutcome r;
  CHECK_NOTHROW(r = run_grasp_trial(big, cfg, sensor, rng));
  CHECK_FALSE(r.success);
  CHECK(r.failure_mode == FailureMode::no_contact);
  CHECK(static_cast<int>(r.trace.size()) == cfg.frame_count());
}

TEST_CASE("success never drops as friction rises") {
  for (const char* name : {"popcorn", "mini pinecone"}) {
    sim::RigidObject o = grasp_object(name);
    for (int n : {4, 2}) {
      int prev = -1;
      for (double mu : {0.1, 0.3, 0.5, 0.8, 1.2, 2.0}) {
        o.friction_mu = mu;
        const int s = successes(o, n, 10, 5);
        CHECK(s >= prev);
        prev = s;
      }
    }
  }
}

TEST_CASE("held objects are not crushed and traces have three phases") {
  const SensorConfig sensor;
  const GraspConfig cfg;
  for (const auto& o : grasp_objects()) {
    for (int t = 0; t < 5; ++t) {
      Rng rng(trial_seed(4, o.name, t));
      const auto r = run_grasp_trial(o, cfg, sensor, rng);
      if (r.success) CHECK(r.peak_force <= sensor.grasp.force_cap);
      const auto m = r.phase_markers;
      CHECK(m[0] == 0);
      CHECK(m[0] < m[1]);
      CHECK(m[1] < m[2]);
      CHECK(m[2] < static_cast<int>(r.trace.size()));
      CHECK(static_cast<int>(r.trace.size()) == cfg.frame_count());
      for (const auto& frame : r.trace) {
        CHECK(frame.size() == 8);
        for (double d : frame) CHECK((d >= 0.0 && std::isfinite(d)));
      }
    }
  }
}

TEST_CASE("catalogue") {
  const auto objs = grasp_objects();
  REQUIRE(objs.size() == 5);
  double top_mu = 0.0;
  std::string top;
  for (const auto& o : objs) {
    CHECK_NOTHROW(sim::validate_object(o));
    if (o.friction_mu > top_mu) top_mu = o.friction_mu, top = o.name;
  }
  CHECK(top == "pom-pom");
  CHECK(grasp_object("foam ball").mass_g == 0.15);
  CHECK_THROWS_AS(grasp_object("teapot"), UsageError);
}

TEST_CASE("campaign") {
  const SensorConfig sensor;
  const auto objs = grasp_objects();
  const std::vector<int> counts{8, 4, 2};
  CHECK_THROWS_AS(run_campaign(objs, counts, 0, GraspConfig{}, sensor, 0), ContractError);
  CHECK_THROWS_AS(run_campaign(std::span<const sim::RigidObject>{}, counts, 1, GraspConfig{}, sensor, 0),
                  ContractError);

  const std::vector<sim::RigidObject> two(objs.begin(), objs.begin() + 2);
  const auto r = run_campaign(two, std::vector<int>{2}, 20, GraspConfig{}, sensor, 9, 2);
  for (std::size_t o = 0; o < 2; ++o) {
    const double pct = r.percent(o, 0);
    CHECK(std::fmod(pct, 5.0) == 0.0);
  }
  const std::string csv = campaign_csv(r);
  CHECK(csv.find("Total") != std::string::npos);

  // A one-trial run reproduces trial 0 of the batch.
  const auto single = run_campaign(two, std::vector<int>{2}, 1, GraspConfig{}, sensor, 9, 1);
  for (std::size_t o = 0; o < 2; ++o) {
    CHECK(single.outcomes[o][0][0].success == r.outcomes[o][0][0].success);
    CHECK(single.outcomes[o][0][0].trace == r.outcomes[o][0][0].trace);
    CHECK(single.outcomes[o][0][0].seed == r.outcomes[o][0][0].seed);
  }
}

TEST_CASE("trace statistics") {
  GraspOutcome a, b;
  a.trace = {{1.0, 2.0}, {3.0, 4.0}};
  b = a;
  a.phase_markers = b.phase_markers = {0, 1, 1};
  const std::vector<GraspOutcome> same{a, b};
  const auto s0 = trace_stats(same);
  for (const auto& row : s0.sigma)
    for (double v : row) CHECK(v == 0.0);

  const double c = 0.6;
  for (auto& row : b.trace)
    for (auto& v : row) v += c;
  const std::vector<GraspOutcome> shifted{a, b};
  const auto s1 = trace_stats(shifted);
  for (const auto& row : s1.sigma)
    for (double v : row) CHECK(v == doctest::Approx(c / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(s1.mean[0][0] == doctest::Approx(1.3));
  CHECK(s1.mean_sigma() == doctest::Approx(c / std::sqrt(2.0)));

  b.trace.pop_back();
  const std::vector<GraspOutcome> ragged{a, b};
  CHECK_THROWS_AS(trace_stats(ragged), ContractError);
  const std::vector<GraspOutcome> lonely{a};
  CHECK_THROWS_AS(trace_stats(lonely), ContractError);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(0, "popcorn", 3) == trial_seed(0, "popcorn", 3));
  std::set<std::uint64_t> seen;
  for (const auto& o : grasp_objects())
    for (int t = 0; t < 20; ++t) seen.insert(trial_seed(0, o.name, t));
  CHECK(seen.size() == 100);
}

}  // TEST_SUITE
