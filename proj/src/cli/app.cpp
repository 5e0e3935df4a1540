#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "whisker/cli.hpp"
#include "whisker/config.hpp"
#include "whisker/errors.hpp"
#include "whisker/format.hpp"
#include "whisker/grasp.hpp"
#include "whisker/kinematics.hpp"
#include "whisker/learn.hpp"
#include "whisker/render.hpp"
#include "whisker/selftest.hpp"
#include "whisker/simworld.hpp"
#include "whisker/vision.hpp"

namespace whisker::cli {

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  int jobs = 1;
  bool dump_scene = false;
  std::vector<std::string> args;
};

struct ClassifyOptions {
  int epochs = -1;  // -1: from config
  std::string source = "tracked";
  int controls = 10;
  std::string dataset;
  std::string model;
  bool collect = false;
  bool train = false;
  bool eval = false;
  bool svg = false;
};

struct GraspOptions {
  std::string objects = "all";
  std::string whiskers = "all";
  int trials = 20;
  bool svg = false;
};

struct TrackOptions {
  std::vector<std::string> frames;
  std::vector<std::string> in;
  std::string neutral;  // neutral frame; default is the config ring
  std::string out;      // JSON path; default <out-dir>/tracks.json
  bool kinematics = false;
};

struct RenderOptionsCli {
  int frames = 10;
  double max_tilt = 0.2;
  std::string out;
};

// Failures inside a pipeline stage carry the stage name; usage errors pass
// through untouched so they keep their exit code.
template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

SensorConfig load(const Globals& g) {
  SensorConfig cfg;
  if (!g.config_path.empty()) cfg = staged("config", [&] { return load_config(g.config_path); });
  return cfg;
}

std::uint64_t seed_of(const Globals& g, const SensorConfig& cfg) {
  return g.seed_given ? g.seed : cfg.seed;
}

ExperimentManifest manifest_for(const std::string& command, const Globals& g, std::uint64_t seed,
                                const std::string& started) {
  ExperimentManifest m;
  m.command = command;
  m.config_path = g.config_path;
  m.seed = seed;
  m.arguments = g.args;
  m.started_utc = started;
  m.finished_utc = utc_timestamp();
  return m;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c))
                      ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                      : '_');
  return out;
}

nlohmann::json confusion_json(const learn::Confusion& c) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : c) j.push_back(std::vector<int>(row.begin(), row.end()));
  return j;
}

// ---- classify -----------------------------------------------------------------

int cmd_classify(const Globals& g, const ClassifyOptions& o, std::ostream& out) {
  const std::string started = utc_timestamp();
  SensorConfig cfg = load(g);
  const std::uint64_t seed = seed_of(g, cfg);
  if (o.epochs >= 0) cfg.learn.epochs = o.epochs;
  learn::Protocol protocol;
  if (o.source == "tracked") {
    protocol.source = learn::FeatureSource::tracked;
  } else if (o.source == "truth") {
    protocol.source = learn::FeatureSource::ground_truth;
  } else {
    throw UsageError("--source must be tracked or truth");
  }
  if (o.controls < 0) throw UsageError("--controls must be non-negative");

  // No stage flag means all three.
  bool do_collect = o.collect, do_train = o.train, do_eval = o.eval;
  if (!do_collect && !do_train && !do_eval) do_collect = do_train = do_eval = true;
  if (!do_collect && o.dataset.empty())
    throw UsageError("--train/--eval without --collect need --dataset");
  if (do_eval && !do_train && o.model.empty())
    throw UsageError("--eval without --train needs --model");
  if (!o.model.empty() && do_train) throw UsageError("--model only applies to --eval alone");

  const auto objects = learn::classification_objects();
  learn::Dataset raw;
  if (!o.dataset.empty()) {
    raw = staged("load dataset", [&] { return learn::read_dataset_csv(o.dataset); });
  } else {
    raw = staged("collect", [&] {
      return learn::collect_classification_dataset(objects, protocol, cfg, seed, g.jobs);
    });
  }

  learn::ClassificationRun run;
  if (do_train) {
    run = staged("train", [&] {
      return learn::run_classification(raw, cfg, seed, g.jobs, o.controls);
    });
  } else if (do_eval) {
    run = staged("split", [&] { return learn::prepare_classification(raw, cfg, seed); });
    run.result.params = staged("load model", [&] { return learn::read_model(o.model); });
  } else {
    run.raw = std::move(raw);
  }
  learn::Evaluation eval;
  if (do_eval) {
    eval = staged("eval", [&] { return learn::evaluate(run.result.params, run.test); });
  }
  const auto& rep = run.result.report;

  OutputDir dir(g.out_dir);
  staged("write", [&] {
    if (do_collect) dir.write("dataset.csv", learn::dataset_csv(run.raw));
    if (do_train) {
      dir.write("model.bin", learn::encode_model(run.result.params));
      std::ostringstream loss;
      loss << "epoch,loss\n";
      for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e)
        loss << e + 1 << ',' << format_double(rep.epoch_loss[e]) << '\n';
      dir.write("loss.csv", loss.str());
    }
    if (do_eval) dir.write("confusion.csv", learn::confusion_csv(eval.confusion));

    nlohmann::json report;
    report["seed"] = seed;
    report["source"] = o.dataset.empty() ? o.source : "file";
    report["classes"] = learn::class_names();
    const auto per_raw = run.raw.class_counts();
    report["counts"] = {{"raw_per_object", std::vector<std::size_t>(per_raw.begin(), per_raw.end())},
                        {"raw_total", run.raw.size()}};
    if (do_train || do_eval) {
      const auto per_aug = run.augmented.class_counts();
      report["counts"]["augmented_per_object"] =
          std::vector<std::size_t>(per_aug.begin(), per_aug.end());
      report["counts"]["total"] = run.augmented.size();
      report["counts"]["train"] = run.train.size();
      report["counts"]["test"] = run.test.size();
    }
    if (do_train) {
      report["settings"] = {{"epochs", cfg.learn.epochs},
                            {"batch_size", cfg.learn.batch_size},
                            {"hidden", cfg.learn.hidden},
                            {"learning_rate", cfg.learn.learning_rate},
                            {"train_fraction", cfg.learn.train_fraction},
                            {"standardize", cfg.learn.standardize}};
      report["epoch_loss"] = rep.epoch_loss;
      report["train_accuracy"] = rep.train_accuracy;
      report["shuffled_control"] = {{"runs", run.control_accuracy}, {"mean", run.control_mean}};
    }
    if (do_eval) {
      report["test_accuracy"] = eval.accuracy;
      report["confusion"] = confusion_json(eval.confusion);
    }
    dir.write("report.json", report.dump(2) + "\n");

    if (o.svg && do_train && !rep.epoch_loss.empty()) {
      Series s{"training loss", {}, rep.epoch_loss, {}};
      for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e)
        s.x.push_back(static_cast<double>(e + 1));
      PlotSpec spec{"Training loss", "epoch", "cross-entropy", {}, 640, 400};
      dir.write("loss.svg", line_plot_svg(spec, std::span<const Series>(&s, 1)));
    }
    if (g.dump_scene && o.dataset.empty()) {
      for (std::size_t i = 0; i < objects.size(); ++i) {
        const learn::Approach a{0, 0};
        const auto scene = learn::approach_scene(
            &objects[i], a, protocol, cfg, learn::sample_seed(seed, static_cast<int>(i), a));
        dir.write("scenes/" + slug(objects[i].name) + "_r0_t0.json",
                  sim::scene_to_json(scene).dump(2) + "\n");
      }
    }
    dir.write_manifest(manifest_for("classify", g, seed, started));
  });

  out << "samples " << run.raw.size();
  if (do_train || do_eval)
    out << " -> " << run.augmented.size() << " (train " << run.train.size() << ", test "
        << run.test.size() << ")";
  out << "\n";
  if (do_train) out << "train accuracy " << format_double(rep.train_accuracy) << "\n";
  if (do_eval) out << "test accuracy " << format_double(eval.accuracy) << "\n";
  if (!run.control_accuracy.empty())
    out << "shuffled-label control (" << run.control_accuracy.size() << " runs) "
        << format_double(run.control_mean) << "\n";
  out << "wrote " << dir.files().size() << " files and manifest.json to " << g.out_dir << "\n";
  return kExitOk;
}

// ---- grasp -------------------------------------------------------------------

std::string normalise(std::string s) {
  for (auto& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '-' || c == '_') c = ' ';
  }
  return s;
}

std::string outcomes_csv(const grasp::CampaignReport& r) {
  std::ostringstream os;
  os << "object,whiskers,trial,seed,success,failure_mode,contacts,peak_force_n,slide_mm\n";
  for (std::size_t o = 0; o < r.objects.size(); ++o)
    for (std::size_t c = 0; c < r.whisker_counts.size(); ++c)
      for (std::size_t t = 0; t < r.outcomes[o][c].size(); ++t) {
        const auto& x = r.outcomes[o][c][t];
        os << r.objects[o] << ',' << r.whisker_counts[c] << ',' << t << ',' << x.seed << ','
           << (x.success ? 1 : 0) << ',' << grasp::to_string(x.failure_mode) << ',' << x.contacts
           << ',' << format_double(x.peak_force) << ',' << format_double(x.slide_mm) << '\n';
      }
  return os.str();
}

int cmd_grasp(const Globals& g, const GraspOptions& o, std::ostream& out) {
  const std::string started = utc_timestamp();
  const SensorConfig cfg = load(g);
  const std::uint64_t seed = seed_of(g, cfg);
  if (o.trials < 1) throw UsageError("--trials must be at least 1");

  std::vector<sim::RigidObject> objects;
  if (normalise(o.objects) == "all") {
    objects = grasp::grasp_objects();
  } else {
    std::stringstream names(o.objects);
    std::string name;
    const auto catalog = grasp::grasp_objects();
    while (std::getline(names, name, ',')) {
      const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& obj) {
        return normalise(obj.name) == normalise(name);
      });
      if (it == catalog.end()) {
        std::string known;
        for (const auto& obj : catalog) known += (known.empty() ? "" : ", ") + obj.name;
        throw UsageError("unknown object '" + name + "' (known: " + known + ")");
      }
      objects.push_back(*it);
    }
  }
  std::vector<int> counts;
  if (o.whiskers == "all") {
    counts = {8, 4, 2};
  } else {
    std::stringstream list(o.whiskers);
    std::string item;
    while (std::getline(list, item, ',')) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("--whiskers expects 8, 4, 2 or all, got '" + item + "'");
      }
      grasp::whisker_mask(n, cfg.geometry.n_whiskers);  // UsageError for 3 etc.
      counts.push_back(n);
    }
  }

  grasp::GraspConfig base;
  base.trials_per_object = o.trials;
  base.capture_scene = g.dump_scene;
  const grasp::CampaignReport report = staged("campaign", [&] {
    return grasp::run_campaign(objects, counts, o.trials, base, cfg, seed, g.jobs);
  });

  OutputDir dir(g.out_dir);
  staged("write", [&] {
    dir.write("campaign.csv", grasp::campaign_csv(report));
    dir.write("outcomes.csv", outcomes_csv(report));
    dir.write("traces.csv", grasp::traces_csv(report));
    if (o.trials >= 2) dir.write("stats.csv", grasp::stats_csv(report));
    dir.write("phase_markers.json", grasp::phase_markers_json(report).dump(2) + "\n");

    if (o.svg && o.trials >= 2) {
      for (std::size_t i = 0; i < report.objects.size(); ++i) {
        // First configuration, at most five trials, one band per whisker.
        const auto& runs = report.outcomes[i][0];
        const std::size_t k = std::min<std::size_t>(5, runs.size());
        const auto stats = grasp::trace_stats(std::span(runs.data(), k));
        std::vector<Series> series;
        const std::size_t nw = stats.mean.empty() ? 0 : stats.mean[0].size();
        for (std::size_t w = 0; w < nw; ++w) {
          Series s;
          s.label = "whisker " + std::to_string(w + 1);
          for (std::size_t f = 0; f < stats.mean.size(); ++f) {
            s.x.push_back(static_cast<double>(f) * base.frame_dt);
            s.y.push_back(stats.mean[f][w]);
            s.band.push_back(stats.sigma[f][w]);
          }
          series.push_back(std::move(s));
        }
        PlotSpec spec{report.objects[i] + ", " + std::to_string(report.whisker_counts[0]) +
                          " whiskers, " + std::to_string(k) + " trials",
                      "time (s)", "marker displacement (mm)", {}, 720, 420};
        for (int m : stats.phase_markers) spec.markers.push_back(m * base.frame_dt);
        dir.write("traces_" + slug(report.objects[i]) + ".svg", line_plot_svg(spec, series));
      }
    }
    if (g.dump_scene) {
      for (std::size_t i = 0; i < report.objects.size(); ++i)
        for (std::size_t c = 0; c < report.whisker_counts.size(); ++c) {
          const auto& x = report.outcomes[i][c][0];
          if (x.lift_scene.is_null()) continue;
          dir.write("scenes/" + slug(report.objects[i]) + "_w" +
                        std::to_string(report.whisker_counts[c]) + "_t0.json",
                    x.lift_scene.dump(2) + "\n");
        }
    }
    dir.write_manifest(manifest_for("grasp", g, seed, started));
  });

  out << grasp::campaign_csv(report);
  out << "wrote " << dir.files().size() << " files and manifest.json to " << g.out_dir << "\n";
  return kExitOk;
}

// ---- track -------------------------------------------------------------------

// Neutral positions taken from a rest frame: each config ring position is
// replaced by the blob matched to it.
std::vector<Vec2> neutral_from_frame(const render::Frame& frame, const SensorConfig& cfg) {
  const auto ring = neutral_marker_positions(cfg.geometry, cfg.camera);
  const auto blobs = vision::detect_markers(frame, cfg.vision);
  const auto match = vision::associate(blobs, ring, cfg.vision.max_match_dist);
  std::vector<Vec2> out(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (!match.whiskers[i].found)
      throw FormatError("neutral frame: marker " + std::to_string(i) + " not found");
    out[i] = ring[i] + match.whiskers[i].p;
  }
  return out;
}

int cmd_track(const Globals& g, const TrackOptions& o, std::ostream& out, std::ostream& err) {
  const std::string started = utc_timestamp();
  const SensorConfig cfg = load(g);
  std::vector<std::string> paths = o.in;
  paths.insert(paths.end(), o.frames.begin(), o.frames.end());
  if (paths.empty()) throw UsageError("track needs at least one frame (positional or --in)");
  const auto neutral = staged("neutral", [&] {
    if (o.neutral.empty()) return neutral_marker_positions(cfg.geometry, cfg.camera);
    return neutral_from_frame(render::read_ppm(o.neutral), cfg);
  });
  nlohmann::json frames = nlohmann::json::array();
  int index = 0;
  for (const auto& path : paths) {
    const render::Frame frame = staged("read", [&] { return render::read_ppm(path); });
    vision::TrackResult result = staged("track", [&] { return vision::track(frame, cfg, neutral); });
    result.frame_index = index++;
    nlohmann::json j = vision::to_json(result);
    j["file"] = path;
    nlohmann::json tips = nlohmann::json::array();
    int found = 0;
    for (const auto& w : result.whiskers) {
      nlohmann::json t;
      if (!w.found) {
        tips.push_back(nullptr);
        continue;
      }
      ++found;
      try {
        const double theta =
            kin::deflection_angle(w.p.x, w.p.y, cfg.camera.k, cfg.geometry.l_l);
        const auto tip = kin::tip_position(w.p.x, w.p.y, cfg.camera.k, cfg.geometry.l_l,
                                           cfg.geometry.l_u);
        t["theta"] = theta;
        t["tip_mm"] = {tip.x, tip.y, tip.z};
      } catch (const SaturationError&) {
        t["saturated"] = true;
      }
      tips.push_back(t);
    }
    if (o.kinematics) j["kinematics"] = tips;
    frames.push_back(j);
    if (found == 0) err << "warning: " << path << ": no whisker markers found\n";
    out << path << ": " << found << "/" << result.whiskers.size() << " whiskers found"
        << (result.ambiguous ? " (ambiguous association)" : "") << "\n";
  }
  namespace fs = std::filesystem;
  const fs::path target = o.out.empty() ? fs::path(g.out_dir) / "tracks.json" : fs::path(o.out);
  OutputDir dir(target.has_parent_path() ? target.parent_path() : fs::path("."));
  staged("write", [&] {
    dir.write(target.filename().string(), frames.dump(2) + "\n");
    dir.write_manifest(manifest_for("track", g, seed_of(g, cfg), started));
  });
  return kExitOk;
}

// ---- render-demo -------------------------------------------------------------

int cmd_render_demo(Globals g, const RenderOptionsCli& o, std::ostream& out) {
  if (!o.out.empty()) g.out_dir = o.out;
  const std::string started = utc_timestamp();
  const SensorConfig cfg = load(g);
  const std::uint64_t seed = seed_of(g, cfg);
  if (o.frames < 1) throw UsageError("--frames must be at least 1");
  if (!(o.max_tilt >= 0.0 && o.max_tilt <= cfg.actuation.max_tilt))
    throw UsageError("--max-tilt must be within [0, actuation.max_tilt]");
  const auto& geo = cfg.geometry;
  const double radius = marker_radius_px(geo, cfg.camera);
  staged("config", [&] { return neutral_marker_positions(geo, cfg.camera); });

  OutputDir dir(g.out_dir);
  nlohmann::json truth = nlohmann::json::array();
  auto emit = [&](const std::string& name, const sim::Scene& scene, int index) {
    const auto markers = sim::marker_positions(scene, geo, cfg.camera);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(index)}));
    const auto frame = render::render_frame(markers, radius, cfg.camera, cfg.render, rng);
    dir.write(name, render::encode_ppm(frame));
    nlohmann::json t;
    t["file"] = name;
    nlohmann::json tilts = nlohmann::json::array(), mk = nlohmann::json::array();
    for (std::size_t i = 0; i < scene.whiskers.size(); ++i) {
      tilts.push_back({scene.whiskers[i].tilt.x, scene.whiskers[i].tilt.y});
      mk.push_back({markers[i].x, markers[i].y});
    }
    t["tilt_rad"] = tilts;
    t["marker_px"] = mk;
    truth.push_back(t);
    if (g.dump_scene)
      dir.write("scenes/" + name.substr(0, name.find('.')) + ".json",
                sim::scene_to_json(scene).dump(2) + "\n");
  };

  staged("render", [&] {
    sim::Scene scene = sim::make_scene(geo);
    emit("neutral.ppm", scene, 0);
    // Each whisker swings out to max_tilt along its own direction.
    for (int f = 0; f < o.frames; ++f) {
      const double a = o.frames == 1 ? 1.0 : static_cast<double>(f) / (o.frames - 1);
      for (int i = 0; i < geo.n_whiskers; ++i) {
        const double dir_angle = geo.azimuth(i) + i * kPi / 4.0;
        scene.whiskers[static_cast<std::size_t>(i)].tilt =
            (a * o.max_tilt) * Vec2{std::cos(dir_angle), std::sin(dir_angle)};
      }
      char name[32];
      std::snprintf(name, sizeof name, "frame_%03d.ppm", f);
      emit(name, scene, f + 1);
    }
    dir.write("truth.json", truth.dump(2) + "\n");
    dir.write_manifest(manifest_for("render-demo", g, seed, started));
  });
  out << "wrote neutral.ppm and " << o.frames << " deflected frames to " << g.out_dir << "\n";
  return kExitOk;
}

// ---- selftest ----------------------------------------------------------------

int cmd_selftest(const Globals& g, std::ostream& out) {
  const SensorConfig cfg = load(g);
  const auto results = selftest::run_all(seed_of(g, cfg));
  out << selftest::summary(results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  out << (ok ? "all oracles pass\n" : "some oracles FAILED\n");
  return ok ? kExitOk : kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  g.args = args;
  ClassifyOptions co;
  GraspOptions go;
  TrackOptions to;
  RenderOptionsCli ro;

  CLI::App app{"Simulated vision-based whisker array: classification and grasping experiments",
               kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config_path, "Config file (dotted.key = value)");
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed (default: config seed)");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1, 256))->capture_default_str();
  app.add_flag("--dump-scene", g.dump_scene, "Also write scene snapshots as JSON");

  auto* classify = app.add_subcommand("classify", "Collect, augment, split, train and evaluate");
  classify->add_option("--epochs", co.epochs, "Training epochs (default: config)");
  classify->add_option("--source", co.source, "Feature source: tracked or truth")
      ->capture_default_str();
  classify->add_option("--controls", co.controls, "Shuffled-label control runs")
      ->capture_default_str();
  classify->add_flag("--collect", co.collect, "Collect the dataset (dataset.csv)");
  classify->add_flag("--train", co.train, "Augment, split and train (model.bin, loss.csv)");
  classify->add_flag("--eval", co.eval, "Evaluate on the test split (confusion.csv)");
  classify->add_option("--dataset", co.dataset, "Use a saved dataset CSV instead of collecting");
  classify->add_option("--model", co.model, "Model file for --eval without --train");
  classify->add_flag("--svg", co.svg, "Also write an SVG loss plot");

  auto* grasp_cmd = app.add_subcommand("grasp", "Run the grasp campaign");
  grasp_cmd->add_option("--objects", go.objects, "all, or comma-separated object names")
      ->capture_default_str();
  grasp_cmd->add_option("--whiskers", go.whiskers, "all, or comma-separated counts from 8,4,2")
      ->capture_default_str();
  grasp_cmd->add_option("--trials", go.trials, "Trials per object and configuration")
      ->capture_default_str();
  grasp_cmd->add_flag("--svg", go.svg, "Also write SVG trace plots");

  auto* track_cmd = app.add_subcommand("track", "Track whisker markers in PPM frames");
  track_cmd->add_option("frames", to.frames, "PPM files");
  track_cmd->add_option("--in", to.in, "PPM file (repeatable; same as positional)");
  track_cmd->add_option("--neutral", to.neutral, "Rest frame giving the neutral marker positions");
  track_cmd->add_option("--out", to.out, "Result JSON path (default <out-dir>/tracks.json)");
  track_cmd->add_flag("--kinematics", to.kinematics, "Append deflection angle and tip position");

  auto* render_cmd = app.add_subcommand("render-demo", "Render a neutral frame and a deflection sequence");
  render_cmd->add_option("--frames", ro.frames, "Deflected frames")->capture_default_str();
  render_cmd->add_option("--max-tilt", ro.max_tilt, "Largest tilt in the sequence, rad")
      ->capture_default_str();
  render_cmd->add_option("--out", ro.out, "Output directory (overrides --out-dir)");

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the oracle checks");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << ' ' << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*classify) return cmd_classify(g, co, out);
    if (*grasp_cmd) return cmd_grasp(g, go, out);
    if (*track_cmd) return cmd_track(g, to, out, err);
    if (*render_cmd) return cmd_render_demo(g, ro, out);
    if (*selftest_cmd) return cmd_selftest(g, out);
    err << "usage error: no command\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (...) {
    err << "internal error\n";
    return kExitInternal;
  }
}

}  // namespace whisker::cli
