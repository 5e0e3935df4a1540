#include "whisker/config.hpp"
#include "whisker/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "whisker/errors.hpp"

namespace whisker {

namespace {

// Every config key, in file order. Shared by the parser and the writer so the
// two cannot drift apart.
template <class Config, class Visitor>
void visit_fields(Config& c, Visitor&& v) {
  v("geometry.n_whiskers", c.geometry.n_whiskers);
  v("geometry.ring_radius", c.geometry.ring_radius);
  v("geometry.whisker_total_len", c.geometry.whisker_total_len);
  v("geometry.l_u", c.geometry.l_u);
  v("geometry.l_l", c.geometry.l_l);
  v("geometry.membrane_thickness", c.geometry.membrane_thickness);
  v("geometry.membrane_inradius", c.geometry.membrane_inradius);
  v("geometry.whisker_diameter", c.geometry.whisker_diameter);
  v("geometry.marker_diameter", c.geometry.marker_diameter);
  v("geometry.azimuth_offset", c.geometry.azimuth_offset);

  v("camera.width_px", c.camera.width_px);
  v("camera.height_px", c.camera.height_px);
  v("camera.k", c.camera.k);
  v("camera.center_x", c.camera.center_px.x);
  v("camera.center_y", c.camera.center_px.y);

  v("actuation.gain", c.actuation.gain);
  v("actuation.spring_stiffness", c.actuation.spring_stiffness);
  v("actuation.damping", c.actuation.damping);
  v("actuation.max_voltage", c.actuation.max_voltage);
  v("actuation.coil_resistance", c.actuation.coil_resistance);
  v("actuation.max_tilt", c.actuation.max_tilt);
  v("actuation.curve", c.actuation.curve);

  v("vision.hue_lo", c.vision.hue_lo);
  v("vision.hue_hi", c.vision.hue_hi);
  v("vision.sat_min", c.vision.sat_min);
  v("vision.val_min", c.vision.val_min);
  v("vision.erosion_kernel", c.vision.erosion_kernel);
  v("vision.min_area", c.vision.min_area);
  v("vision.connectivity", c.vision.connectivity);
  v("vision.max_match_dist", c.vision.max_match_dist);

  v("render.marker_rgb", c.render.marker_rgb);
  v("render.background_rgb", c.render.background_rgb);
  v("render.wire_noise", c.render.wire_noise);
  v("render.streaks_per_marker", c.render.streaks_per_marker);
  v("render.wire_gap_px", c.render.wire_gap_px);
  v("render.pixel_noise_sigma", c.render.pixel_noise_sigma);
  v("render.antialias", c.render.antialias);
  v("render.aa_samples", c.render.aa_samples);

  v("grasp.safety_factor", c.grasp.safety_factor);
  v("grasp.imbalance_frac", c.grasp.imbalance_frac);
  v("grasp.imbalance_floor", c.grasp.imbalance_floor);
  v("grasp.com_tolerance", c.grasp.com_tolerance);
  v("grasp.force_cap", c.grasp.force_cap);
  v("grasp.jitter_sigma", c.grasp.jitter_sigma);
  v("grasp.max_slide", c.grasp.max_slide);

  v("learn.epochs", c.learn.epochs);
  v("learn.batch_size", c.learn.batch_size);
  v("learn.hidden", c.learn.hidden);
  v("learn.learning_rate", c.learn.learning_rate);
  v("learn.train_fraction", c.learn.train_fraction);
  v("learn.standardize", c.learn.standardize);

  v("seed", c.seed);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_value(const std::string& text, double& out) { return parse_number(text, out); }
bool parse_value(const std::string& text, int& out) { return parse_number(text, out); }
bool parse_value(const std::string& text, std::uint64_t& out) { return parse_number(text, out); }

bool parse_value(const std::string& text, bool& out) {
  if (text == "true" || text == "1") { out = true; return true; }
  if (text == "false" || text == "0") { out = false; return true; }
  return false;
}

bool parse_value(const std::string& text, Rgb& out) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) return false;
  int ch[3];
  for (int i = 0; i < 3; ++i) {
    if (!parse_number(parts[i], ch[i]) || ch[i] < 0 || ch[i] > 255) return false;
  }
  out = {static_cast<std::uint8_t>(ch[0]), static_cast<std::uint8_t>(ch[1]),
         static_cast<std::uint8_t>(ch[2])};
  return true;
}

// "v0:a0, v1:a1, ..." ; empty string clears the curve.
bool parse_value(const std::string& text, std::vector<CurvePoint>& out) {
  out.clear();
  if (text.empty()) return true;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) return false;
    CurvePoint p;
    if (!parse_number(trim(item.substr(0, colon)), p.voltage)) return false;
    if (!parse_number(trim(item.substr(colon + 1)), p.angle)) return false;
    out.push_back(p);
  }
  return true;
}

std::string format_value(double v) { return format_double(v); }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(const Rgb& v) {
  return std::to_string(v.r) + "," + std::to_string(v.g) + "," + std::to_string(v.b);
}
std::string format_value(const std::vector<CurvePoint>& curve) {
  std::string out;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i) out += ", ";
    out += format_value(curve[i].voltage) + ":" + format_value(curve[i].angle);
  }
  return out;
}

void check(std::vector<Violation>& out, bool ok, const char* field, const std::string& message) {
  if (!ok) out.push_back({field, message});
}

}  // namespace

double ArrayGeometry::azimuth(int i) const {
  return azimuth_offset + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n_whiskers);
}

std::vector<double> ArrayGeometry::azimuths() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(n_whiskers, 0)));
  for (int i = 0; i < n_whiskers; ++i) out[static_cast<std::size_t>(i)] = azimuth(i);
  return out;
}

std::vector<Violation> validate(const SensorConfig& c) {
  std::vector<Violation> v;
  const auto& g = c.geometry;
  check(v, g.n_whiskers >= 1, "geometry.n_whiskers", "must be at least 1");
  check(v, g.ring_radius >= 0.0, "geometry.ring_radius", "must be non-negative");
  check(v, g.ring_radius < g.membrane_inradius, "geometry.ring_radius",
        "must be smaller than geometry.membrane_inradius");
  check(v, g.l_l > 0.0, "geometry.l_l", "must be positive");
  check(v, g.l_u > 0.0, "geometry.l_u", "must be positive");
  check(v, g.l_u + g.l_l <= g.whisker_total_len, "geometry.whisker_total_len",
        "must be at least l_u + l_l");
  check(v, g.membrane_thickness > 0.0, "geometry.membrane_thickness", "must be positive");
  check(v, g.whisker_diameter > 0.0, "geometry.whisker_diameter", "must be positive");
  check(v, g.marker_diameter > 0.0, "geometry.marker_diameter", "must be positive");
  check(v, g.n_whiskers >= 1 && g.azimuth_offset >= 0.0 && g.azimuth_offset < 2.0 * kPi / g.n_whiskers,
        "geometry.azimuth_offset", "must lie in [0, 2pi/n_whiskers)");
  const bool geometry_ok = v.empty();

  const auto& cam = c.camera;
  check(v, cam.width_px > 0 && cam.height_px > 0, "camera.width_px", "image size must be positive");
  check(v, cam.k > 0.0, "camera.k", "must be positive");
  if (geometry_ok && cam.k > 0.0 && cam.width_px > 0 && cam.height_px > 0) {
    const double r = marker_radius_px(g, cam);
    for (const auto& p : marker_ring_positions(g, cam)) {
      if (p.x - r < 0.0 || p.y - r < 0.0 || p.x + r > cam.width_px - 1 ||
          p.y + r > cam.height_px - 1) {
        v.push_back({"camera.k", "neutral marker disc falls outside the image"});
        break;
      }
    }
  }

  const auto& a = c.actuation;
  check(v, a.gain >= 0.0, "actuation.gain", "must be non-negative");
  check(v, a.spring_stiffness > 0.0, "actuation.spring_stiffness", "must be positive");
  check(v, a.damping > 0.0, "actuation.damping", "must be positive");
  check(v, a.max_voltage > 0.0, "actuation.max_voltage", "must be positive");
  check(v, a.max_tilt > 0.0 && a.max_tilt < kPi / 2.0, "actuation.max_tilt",
        "must lie in (0, pi/2)");
  bool curve_ok = true;
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    const auto& p = a.curve[i];
    if (p.voltage < 0.0 || p.angle < 0.0 || p.angle >= kPi / 2.0) curve_ok = false;
    if (i > 0 && (p.voltage <= a.curve[i - 1].voltage || p.angle < a.curve[i - 1].angle))
      curve_ok = false;
  }
  if (!a.curve.empty() && (a.curve.front().voltage != 0.0 || a.curve.front().angle != 0.0))
    curve_ok = false;
  check(v, curve_ok, "actuation.curve",
        "must start at 0:0, have increasing voltages and non-decreasing angles below pi/2");

  const auto& vis = c.vision;
  check(v, vis.hue_lo >= 0.0 && vis.hue_lo <= 360.0, "vision.hue_lo", "must lie in [0, 360]");
  check(v, vis.hue_hi >= 0.0 && vis.hue_hi <= 360.0, "vision.hue_hi", "must lie in [0, 360]");
  check(v, vis.sat_min >= 0.0 && vis.sat_min <= 1.0, "vision.sat_min", "must lie in [0, 1]");
  check(v, vis.val_min >= 0.0 && vis.val_min <= 1.0, "vision.val_min", "must lie in [0, 1]");
  check(v, vis.erosion_kernel >= 1, "vision.erosion_kernel", "must be at least 1");
  check(v, vis.min_area >= 1, "vision.min_area", "must be at least 1");
  check(v, vis.connectivity == 4 || vis.connectivity == 8, "vision.connectivity",
        "must be 4 or 8");
  check(v, vis.max_match_dist > 0.0, "vision.max_match_dist", "must be positive");

  const auto& r = c.render;
  check(v, r.pixel_noise_sigma >= 0.0, "render.pixel_noise_sigma", "must be non-negative");
  check(v, r.streaks_per_marker >= 0, "render.streaks_per_marker", "must be non-negative");
  check(v, r.wire_gap_px >= 0, "render.wire_gap_px", "must be non-negative");
  check(v, r.aa_samples >= 1, "render.aa_samples", "must be at least 1");

  const auto& gr = c.grasp;
  check(v, gr.safety_factor > 0.0, "grasp.safety_factor", "must be positive");
  check(v, gr.imbalance_frac >= 0.0, "grasp.imbalance_frac", "must be non-negative");
  check(v, gr.imbalance_floor >= 0.0, "grasp.imbalance_floor", "must be non-negative");
  check(v, gr.com_tolerance >= 0.0, "grasp.com_tolerance", "must be non-negative");
  check(v, gr.force_cap > 0.0, "grasp.force_cap", "must be positive");
  check(v, gr.jitter_sigma >= 0.0, "grasp.jitter_sigma", "must be non-negative");
  check(v, gr.max_slide >= 0.0, "grasp.max_slide", "must be non-negative");

  const auto& l = c.learn;
  check(v, l.epochs >= 0, "learn.epochs", "must be non-negative");
  check(v, l.batch_size >= 1, "learn.batch_size", "must be at least 1");
  check(v, l.hidden >= 1, "learn.hidden", "must be at least 1");
  check(v, l.learning_rate > 0.0, "learn.learning_rate", "must be positive");
  check(v, l.train_fraction > 0.0 && l.train_fraction < 1.0, "learn.train_fraction",
        "must lie in (0, 1)");
  return v;
}

SensorConfig parse_config(const std::string& text) {
  SensorConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");

    bool known = false;
    visit_fields(config, [&](const char* name, auto& field) {
      if (key != name) return;
      known = true;
      if (!parse_value(value, field))
        throw ConfigError(where + "invalid value '" + value + "' for '" + key + "'");
    });
    if (!known) throw ConfigError(where + "unknown key '" + key + "'");
  }
  return config;
}

SensorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  SensorConfig config;
  try {
    config = parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto violations = validate(config);
  if (!violations.empty()) {
    std::string msg = path.string() + ": invalid configuration:";
    for (const auto& v : violations) msg += "\n  " + v.field + ": " + v.message;
    throw ConfigError(msg);
  }
  return config;
}

std::string format_config(const SensorConfig& config) {
  std::string out;
  visit_fields(config, [&](const char* name, const auto& field) {
    out += name;
    out += " = ";
    out += format_value(field);
    out += '\n';
  });
  return out;
}

void save_config(const SensorConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << format_config(config);
}

std::vector<Vec2> marker_ring_positions(const ArrayGeometry& geometry, const CameraModel& camera) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(geometry.n_whiskers));
  const double radius_px = geometry.ring_radius / camera.k;
  for (int i = 0; i < geometry.n_whiskers; ++i) {
    const double a = geometry.azimuth(i);
    out.push_back(camera.center_px + radius_px * Vec2{std::cos(a), std::sin(a)});
  }
  return out;
}

std::vector<Vec2> neutral_marker_positions(const ArrayGeometry& geometry,
                                           const CameraModel& camera) {
  if (!(camera.k > 0.0)) throw ConfigError("camera.k must be positive");
  auto out = marker_ring_positions(geometry, camera);
  const double r = marker_radius_px(geometry, camera);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto p = out[i];
    if (p.x - r < 0.0 || p.y - r < 0.0 || p.x + r > camera.width_px - 1 ||
        p.y + r > camera.height_px - 1) {
      throw ConfigError("marker " + std::to_string(i) + " at (" + format_value(p.x) + ", " +
                        format_value(p.y) + ") is outside the " +
                        std::to_string(camera.width_px) + "x" +
                        std::to_string(camera.height_px) + " frame");
    }
  }
  return out;
}

double marker_radius_px(const ArrayGeometry& geometry, const CameraModel& camera) {
  return 0.5 * geometry.marker_diameter / camera.k;
}

}  // namespace whisker
