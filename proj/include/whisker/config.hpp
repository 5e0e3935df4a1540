#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "whisker/geometry.hpp"

namespace whisker {

// Lengths are millimetres, angles radians, forces newtons, masses grams.

struct ArrayGeometry {
  int n_whiskers = 8;
  double ring_radius = 12.0;
  double whisker_total_len = 69.0;
  double l_u = 63.0;  // rod length above the pivot
  double l_l = 4.5;   // rod length below the pivot (pivot at membrane mid-plane)
  double membrane_thickness = 3.0;
  double membrane_inradius = 16.0;
  double whisker_diameter = 1.0;
  double marker_diameter = 4.0;
  // Azimuth of whisker 0; whisker i sits at azimuth_offset + i * 2pi / n.
  double azimuth_offset = 0.0;

  double azimuth(int i) const;
  std::vector<double> azimuths() const;

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

// Orthographic camera looking along the whisker axis at the marker plane.
// Image +x is sensor-frame +x, image +y is sensor-frame +y.
struct CameraModel {
  int width_px = 640;
  int height_px = 480;
  double k = 0.08;  // mm per pixel
  Vec2 center_px{320.0, 240.0};

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

struct CurvePoint {
  double voltage = 0.0;
  double angle = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct ActuationParams {
  double gain = 0.06;             // rad per volt, steady state
  double spring_stiffness = 2.0;  // N*mm/rad
  double damping = 0.1;           // N*mm*s/rad
  double max_voltage = 5.0;
  double coil_resistance = 7.0;  // ohm, informational
  double max_tilt = 1.2;         // rad; hard mechanical limit for any tilt
  // Optional tabulated steady-state curve for V >= 0 (odd extension for V < 0).
  // Replaces the linear gain model when non-empty.
  std::vector<CurvePoint> curve;

  double time_constant() const { return damping / spring_stiffness; }

  friend bool operator==(const ActuationParams&, const ActuationParams&) = default;
};

struct VisionParams {
  double hue_lo = 10.0;   // degrees; red band is [0, hue_lo] U [hue_hi, 360)
  double hue_hi = 350.0;
  double sat_min = 0.5;
  double val_min = 0.3;
  int erosion_kernel = 10;
  int min_area = 50;
  int connectivity = 8;
  double max_match_dist = 60.0;  // px

  friend bool operator==(const VisionParams&, const VisionParams&) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RenderOptions {
  Rgb marker_rgb{220, 30, 30};
  Rgb background_rgb{40, 40, 40};
  bool wire_noise = true;
  int streaks_per_marker = 2;
  int wire_gap_px = 3;  // streaks start this far outside the disc rim
  double pixel_noise_sigma = 0.0;
  bool antialias = true;
  int aa_samples = 8;  // per axis, for boundary pixels

  friend bool operator==(const RenderOptions&, const RenderOptions&) = default;
};

// Calibration of the grasp success model; values are tuning, not measurements.
struct GraspTuning {
  double safety_factor = 1.0;
  double imbalance_frac = 0.3;   // of m*g
  double imbalance_floor = 5e-5;  // N
  double com_tolerance = 1.5;    // mm, contact line to COM (two-contact grasps)
  double force_cap = 0.05;       // N, peak normal force bound ("preserved intact")
  double jitter_sigma = 2.0;     // mm, object placement offset
  double max_slide = 12.0;       // mm, lateral settling limit

  friend bool operator==(const GraspTuning&, const GraspTuning&) = default;
};

struct LearnSettings {
  int epochs = 10;
  int batch_size = 32;
  int hidden = 32;
  double learning_rate = 0.01;
  double train_fraction = 0.7;
  // Train on z-scored features; the scaling is folded into the first layer
  // afterwards, so the saved model still takes raw mm features.
  bool standardize = true;

  friend bool operator==(const LearnSettings&, const LearnSettings&) = default;
};

struct SensorConfig {
  ArrayGeometry geometry;
  CameraModel camera;
  ActuationParams actuation;
  VisionParams vision;
  RenderOptions render;
  GraspTuning grasp;
  LearnSettings learn;
  std::uint64_t seed = 0;

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

struct Violation {
  std::string field;
  std::string message;
};

std::vector<Violation> validate(const SensorConfig& config);

// Parses the flat "dotted.key = value" format. Unknown keys, duplicates and
// malformed values raise ConfigError with the 1-based line number. Does not
// validate.
SensorConfig parse_config(const std::string& text);
// parse_config + validate; violations raise ConfigError naming the fields.
SensorConfig load_config(const std::filesystem::path& path);
std::string format_config(const SensorConfig& config);
void save_config(const SensorConfig& config, const std::filesystem::path& path);

// Pixel position of every marker at rest, straight from the ring formula.
std::vector<Vec2> marker_ring_positions(const ArrayGeometry& geometry, const CameraModel& camera);
// Same, but raises ConfigError when a marker disc is not fully inside the frame.
std::vector<Vec2> neutral_marker_positions(const ArrayGeometry& geometry,
                                           const CameraModel& camera);
double marker_radius_px(const ArrayGeometry& geometry, const CameraModel& camera);

}  // namespace whisker
