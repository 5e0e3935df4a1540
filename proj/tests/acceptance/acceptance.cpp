// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "whisker/cli.hpp"
#include "whisker/config.hpp"
#include "whisker/errors.hpp"
#include "whisker/grasp.hpp"
#include "whisker/kinematics.hpp"
#include "whisker/learn.hpp"
#include "whisker/render.hpp"
#include "whisker/rng.hpp"
#include "whisker/selftest.hpp"
#include "whisker/simworld.hpp"
#include "whisker/vision.hpp"

using namespace whisker;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. render -> track round trip on random tilt fields.
Verdict pipeline_round_trip() {
  SensorConfig cfg;
  cfg.render.pixel_noise_sigma = 3.0;
  cfg.render.wire_noise = true;
  const auto& geo = cfg.geometry;
  const auto neutral = neutral_marker_positions(geo, cfg.camera);
  const double radius = marker_radius_px(geo, cfg.camera);
  const double tip_bound = geo.l_u / geo.l_l * cfg.camera.k * 0.5;
  Rng rng(101);
  double worst_p = 0.0, worst_tip = 0.0;
  int missing = 0;
  for (int field = 0; field < 100; ++field) {
    sim::Scene scene = sim::make_scene(geo);
    for (auto& w : scene.whiskers) {
      const double mag = 0.25 * std::sqrt(rng.uniform(0.0, 1.0));
      const double dir = rng.uniform(0.0, 2.0 * kPi);
      w.tilt = mag * Vec2{std::cos(dir), std::sin(dir)};
    }
    const auto markers = sim::marker_positions(scene, geo, cfg.camera);
    const auto frame = render::render_frame(markers, radius, cfg.camera, cfg.render, rng);
    const auto result = vision::track(frame, cfg, neutral);
    for (std::size_t i = 0; i < markers.size(); ++i) {
      const auto& w = result.whiskers[i];
      if (!w.found) {
        ++missing;
        continue;
      }
      const Vec2 truth = markers[i] - neutral[i];
      worst_p = std::max(worst_p, norm(w.p - truth));
      const auto a = kin::tip_position(w.p.x, w.p.y, cfg.camera.k, geo.l_l, geo.l_u);
      const auto b = kin::tip_position(truth.x, truth.y, cfg.camera.k, geo.l_l, geo.l_u);
      worst_tip = std::max(worst_tip, norm(Vec3{a.x - b.x, a.y - b.y, a.z - b.z}));
    }
  }
  return {missing == 0 && worst_p < 0.5 && worst_tip < tip_bound,
          "worst p error " + fmt("%.4f", worst_p) + " px (< 0.5), worst tip error " +
              fmt("%.4f", worst_tip) + " mm (< " + fmt("%.4f", tip_bound) + "), missing " +
              std::to_string(missing)};
}

Verdict oracle(const selftest::OracleResult& r) {
  return {r.pass, std::to_string(r.cases) + " cases, " + std::to_string(r.failures) +
                      " mismatches, worst " + fmt("%.3g", r.worst)};
}

// 4. Kinematics point checks. arcsin(5/12) from a 30-digit evaluation.
Verdict kinematics_points() {
  const double expected = 0.42977543130452769;
  const double zero = kin::deflection_angle(0.0, 0.0, 0.05, 6.0);
  const double t = kin::deflection_angle(30.0, 40.0, 0.05, 6.0);
  bool saturated = false;
  try {
    kin::deflection_angle(0.0, 130.0, 0.05, 6.0);
  } catch (const SaturationError&) {
    saturated = true;
  }
  return {zero == 0.0 && std::abs(t - expected) < 1e-9 && saturated,
          "theta(0,0) " + fmt("%g", zero) + ", theta(30,40) " + fmt("%.17g", t) +
              ", saturation " + (saturated ? "raised" : "NOT raised")};
}

// 6. Sample counts through augmentation and split.
Verdict dataset_arithmetic() {
  const SensorConfig cfg;
  learn::Protocol protocol;
  protocol.source = learn::FeatureSource::ground_truth;
  const auto objects = learn::classification_objects();
  const auto raw = learn::collect_classification_dataset(objects, protocol, cfg, 0, jobs());
  const auto run = learn::prepare_classification(raw, cfg, 0);
  bool ok = raw.size() == 150 && run.augmented.size() == 1200 && run.train.size() == 840 &&
            run.test.size() == 360;
  for (std::size_t c = 0; c < learn::kNumClasses; ++c) {
    ok = ok && raw.class_counts()[c] == 30 && run.augmented.class_counts()[c] == 240;
  }
  return {ok, "raw " + std::to_string(raw.size()) + ", augmented " +
                  std::to_string(run.augmented.size()) + ", train " +
                  std::to_string(run.train.size()) + ", test " + std::to_string(run.test.size())};
}

// 7. Classification on tracked features.
Verdict classification() {
  const SensorConfig cfg;
  const bool settings = cfg.learn.epochs == 10 && cfg.learn.hidden == 32 &&
                        cfg.learn.learning_rate == 0.01;
  learn::Protocol protocol;
  protocol.source = learn::FeatureSource::tracked;
  const auto objects = learn::classification_objects();
  const auto run = learn::run_classification(objects, protocol, cfg, 0, jobs());
  const double acc = run.result.report.test_accuracy;
  const double ctl = run.control_mean;
  return {settings && acc >= 0.95 && std::abs(ctl - 0.20) <= 0.05,
          "test accuracy " + fmt("%.4f", acc) + " (>= 0.95), shuffled control " +
              fmt("%.4f", ctl) + " (0.20 +- 0.05)"};
}

// 8. Success ordering across whisker counts.
Verdict grasp_ordering() {
  const SensorConfig cfg;
  const auto objects = grasp::grasp_objects();
  const std::vector<int> counts{8, 4, 2};
  const auto r = grasp::run_campaign(objects, counts, 20, grasp::GraspConfig{}, cfg, 0, jobs());
  const double a8 = r.aggregate(0), a4 = r.aggregate(1), a2 = r.aggregate(2);
  std::size_t top = 0;
  for (std::size_t o = 0; o < objects.size(); ++o)
    if (objects[o].friction_mu > objects[top].friction_mu) top = o;
  double best8 = 0.0;
  for (std::size_t o = 0; o < objects.size(); ++o) best8 = std::max(best8, r.percent(o, 0));
  const bool ok = a8 >= a4 && a4 >= a2 && r.percent(top, 0) == best8;
  return {ok, "aggregate " + fmt("%.0f", a8) + "/" + fmt("%.0f", a4) + "/" + fmt("%.0f", a2) +
                  ", " + objects[top].name + " at 8 whiskers " + fmt("%.0f", r.percent(top, 0)) +
                  " (max " + fmt("%.0f", best8) + ")"};
}

// 9. Trace variability, foam ball vs pinecone.
Verdict trace_structure() {
  const SensorConfig cfg;
  const std::vector<sim::RigidObject> objects{grasp::grasp_object("foam ball"),
                                              grasp::grasp_object("mini pinecone")};
  const std::vector<int> counts{8};
  const auto r = grasp::run_campaign(objects, counts, 5, grasp::GraspConfig{}, cfg, 0, jobs());
  const auto foam = grasp::trace_stats(r.outcomes[0][0]);
  const auto cone = grasp::trace_stats(r.outcomes[1][0]);
  const int frames = static_cast<int>(foam.mean.size());
  auto markers_ok = [&](const grasp::TraceStats& s) {
    return s.phase_markers[0] < s.phase_markers[1] && s.phase_markers[1] < s.phase_markers[2] &&
           s.phase_markers[0] >= 0 && s.phase_markers[2] < frames;
  };
  const bool ok = foam.mean_sigma() < cone.mean_sigma() && markers_ok(foam) && markers_ok(cone);
  return {ok, "mean sigma foam ball " + fmt("%.4f", foam.mean_sigma()) + " mm, pinecone " +
                  fmt("%.4f", cone.mean_sigma()) + " mm, phase markers " +
                  std::to_string(foam.phase_markers[0]) + "/" +
                  std::to_string(foam.phase_markers[1]) + "/" +
                  std::to_string(foam.phase_markers[2])};
}

// 10. Steady-state tilt: odd, monotone, zero at rest. Linear model and a
// random tabulated curve.
Verdict actuation() {
  Rng rng(10);
  std::vector<ActuationParams> models(1);
  ActuationParams tab;
  double v = 0.0, a = 0.0;
  tab.curve.push_back({0.0, 0.0});
  for (int i = 0; i < 8; ++i) {
    v += rng.uniform(0.3, 0.8);
    a += rng.uniform(0.0, 0.1);
    tab.curve.push_back({v, a});
  }
  tab.max_voltage = v;
  models.push_back(tab);
  int violations = 0, cases = 0;
  for (const auto& p : models) {
    if (sim::steady_state_tilt(0.0, p) != 0.0) ++violations;
    for (int i = 0; i < 5000; ++i, ++cases) {
      const double v1 = rng.uniform(-p.max_voltage, p.max_voltage);
      const double v2 = rng.uniform(-p.max_voltage, p.max_voltage);
      const double t1 = sim::steady_state_tilt(v1, p), t2 = sim::steady_state_tilt(v2, p);
      if (sim::steady_state_tilt(-v1, p) != -t1) ++violations;
      if ((v1 < v2 && t1 > t2) || (v2 < v1 && t2 > t1)) ++violations;
    }
  }
  return {violations == 0,
          std::to_string(cases) + " voltage pairs, " + std::to_string(violations) + " violations"};
}

// 11. Reruns of the CLI with --seed 7 produce identical output hashes.
std::map<std::string, std::string> run_cli(const std::vector<std::string>& args, const fs::path& dir,
                                           int& code) {
  std::vector<std::string> full{"--seed", "7", "--jobs", std::to_string(jobs()), "--out-dir",
                                dir.string()};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  code = cli::run(full, out, err);
  std::map<std::string, std::string> h;
  if (code != 0) return h;
  std::ifstream in(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  for (const auto& f : manifest.at("outputs"))
    h[f.at("path").get<std::string>()] = f.at("sha256").get<std::string>();
  return h;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / ("whisker_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool ok = true;
  std::string detail;
  for (const auto& cmd : std::vector<std::vector<std::string>>{{"classify"}, {"grasp"}}) {
    int c1 = -1, c2 = -1;
    const auto h1 = run_cli(cmd, root / (cmd[0] + "_1"), c1);
    const auto h2 = run_cli(cmd, root / (cmd[0] + "_2"), c2);
    const bool same = c1 == 0 && c2 == 0 && !h1.empty() && h1 == h2;
    ok = ok && same;
    detail += (detail.empty() ? "" : ", ") + cmd[0] + " " + std::to_string(h1.size()) + " files " +
              (same ? "identical" : "DIFFER");
  }
  fs::remove_all(root);
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no time limit
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "pipeline round trip", 30, pipeline_round_trip},
      {2, "erosion oracle", 10, [] { return oracle(selftest::erosion_oracle(2, 1000, 64, 10)); }},
      {3, "centroid oracle", 5, [] { return oracle(selftest::centroid_oracle(3, 1000)); }},
      {4, "kinematics point checks", 0, kinematics_points},
      {5, "MLP gradient check", 10,
       [] { return oracle(selftest::gradient_check(5, 5, 1e-5, 1e-4)); }},
      {6, "dataset arithmetic", 0, dataset_arithmetic},
      {7, "synthetic classification", 60, classification},
      {8, "grasp ordering", 60, grasp_ordering},
      {9, "trace structure", 30, trace_structure},
      {10, "actuation properties", 0, actuation},
      {11, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2f s", s);
    if (c.limit_s > 0) {
      timing += " (limit " + fmt("%.0f", c.limit_s) + " s)";
      if (s >= c.limit_s) v.pass = false;
    }
    failed += !v.pass;
    std::printf("[%s] %2d %s: %s; %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
