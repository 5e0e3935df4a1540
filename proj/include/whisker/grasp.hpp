#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "whisker/config.hpp"
#include "whisker/rng.hpp"
#include "whisker/simworld.hpp"

namespace whisker::grasp {

inline constexpr double kGravity = 9.81;  // m/s^2

// Active whiskers for the 8 / 4 / 2 configurations: all, every other one,
// and one diametrically opposed pair. Throws UsageError for other counts.
std::vector<bool> whisker_mask(int count, int n_whiskers = 8);
int active_count(const std::vector<bool>& mask);

struct GraspConfig {
  std::vector<bool> active = whisker_mask(8);
  double voltage = 3.0;
  double descend_clearance_mm = 2.0;  // whisker tips to table at the lowest point
  double lift_mm = 30.0;
  double hold_s = 1.0;
  int trials_per_object = 20;

  // Trace timing.
  double frame_dt = 1.0 / 30.0;
  int retract_frames = 15;
  int lift_frames = 15;
  int release_frames = 15;

  bool capture_scene = false;  // keep a JSON snapshot of the scene at the lift

  int hold_frames() const;
  int frame_count() const;
};

// Throws ContractError: empty mask, wrong size, a 4-mask that is not
// alternating, a 2-mask that is not opposed, or bad timing values.
void validate(const GraspConfig& config, int n_whiskers);

enum class FailureMode { none, slip, force_imbalance, no_contact };
const char* to_string(FailureMode mode);

struct CheckResult {
  bool success = false;
  FailureMode mode = FailureMode::no_contact;
};

// Quasi-static hold test on the settled contacts (forces in N, positions in
// mm, normals pointing out of the object):
//   (a) sum mu*N >= m*g*safety, else slip
//   (b) |net horizontal contact force| <= imbalance_frac*m*g + floor
//   (c) with exactly two contacts, the line through them passes within
//       com_tolerance of the centre of mass
// The first violated condition is reported.
CheckResult success_check(std::span<const sim::Contact> contacts, const sim::RigidObject& object,
                          const GraspTuning& tuning);

// Net horizontal force the rods exert on the object, N.
Vec2 net_lateral_force(std::span<const sim::Contact> contacts);

struct GraspOutcome {
  bool success = false;
  FailureMode failure_mode = FailureMode::no_contact;
  // trace[frame][whisker]: marker displacement magnitude, mm.
  std::vector<std::vector<double>> trace;
  // Frames of the retract, lift and release commands.
  std::array<int, 3> phase_markers{};
  double peak_force = 0.0;  // N, largest single-rod normal force
  int contacts = 0;         // at the moment of lifting
  double slide_mm = 0.0;    // lateral settling of the object before lifting
  std::uint64_t seed = 0;
  nlohmann::json lift_scene;  // null unless capture_scene
};

// One descend / retract / lift / hold / release attempt. The object pose is
// jittered from rng; everything else is deterministic.
GraspOutcome run_grasp_trial(const sim::RigidObject& object, const GraspConfig& config,
                             const SensorConfig& sensor, Rng& rng);

// Catalogue used by the campaign, in table order.
std::vector<sim::RigidObject> grasp_objects();
// Throws UsageError for an unknown name; "all" is not accepted here.
sim::RigidObject grasp_object(const std::string& name);

// Per-trial seed; depends on the object name and trial index only, so a
// single-trial run reproduces the matching trial of a full campaign.
std::uint64_t trial_seed(std::uint64_t master, const std::string& object_name, int trial);

struct CampaignReport {
  std::vector<std::string> objects;
  std::vector<int> whisker_counts;
  int trials = 0;
  // [object][config]
  std::vector<std::vector<int>> successes;
  std::vector<std::vector<std::vector<GraspOutcome>>> outcomes;

  double percent(std::size_t object, std::size_t config) const;
  // Mean of the per-object percentages.
  double aggregate(std::size_t config) const;
};

// Throws ContractError when trials < 1 or either list is empty.
CampaignReport run_campaign(std::span<const sim::RigidObject> objects,
                            std::span<const int> whisker_counts, int trials,
                            const GraspConfig& base, const SensorConfig& sensor,
                            std::uint64_t master_seed, int jobs = 1);

struct TraceStats {
  std::vector<std::vector<double>> mean;   // [frame][whisker]
  std::vector<std::vector<double>> sigma;  // sample standard deviation
  std::array<int, 3> phase_markers{};
  std::size_t trials = 0;

  double mean_sigma() const;  // averaged over frames and whiskers
};

// Needs at least two outcomes with equal trace shapes (ContractError).
TraceStats trace_stats(std::span<const GraspOutcome> outcomes);

std::string campaign_csv(const CampaignReport& report);
std::string traces_csv(const CampaignReport& report);
std::string stats_csv(const CampaignReport& report);
nlohmann::json phase_markers_json(const CampaignReport& report);

}  // namespace whisker::grasp
