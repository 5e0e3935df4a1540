#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "whisker/config.hpp"
#include "whisker/rng.hpp"
#include "whisker/simworld.hpp"

namespace whisker::learn {

inline constexpr int kNumClasses = 5;
const std::array<std::string, kNumClasses>& class_names();

// How one sample was produced.
struct Provenance {
  int rotation_deg = 0;    // sensor yaw
  int direction = 0;       // approach direction index, 0..3 (multiples of 90 deg)
  double distance_mm = 0;  // final sensor-axis to object-centre distance
  int trial = 0;
  std::uint64_t seed = 0;
  int augment = 0;  // 45 deg rotation applied, 0..7
};

// features: per-whisker tracked displacement in mm, (x0, y0, x1, y1, ...).
struct LabeledSample {
  std::vector<double> features;
  int label = 0;
  Provenance provenance;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::size_t size() const { return samples.size(); }
  std::array<std::size_t, kNumClasses> class_counts() const;
};

// ---- data collection ---------------------------------------------------

// Shipped object suite, in label order: yuanbao, eraser, light bulb, plastic
// cherry, plastic strawberry. Shapes are primitive-built look-alikes.
std::vector<sim::RigidObject> classification_objects();

enum class FeatureSource {
  tracked,       // render the markers and run the vision pipeline
  ground_truth,  // marker displacement straight from the simulator
};

struct Protocol {
  int rotations = 6;
  double rotation_step_deg = 60.0;
  int trials = 5;
  std::array<double, 2> distances_mm{30.0, 10.0};
  int directions = 4;
  double tip_clearance_mm = 3.0;  // whisker tips above the table
  double approach_step_mm = 1.0;
  int settle_steps = 15;
  double jitter_mm = 0.5;    // object placement noise (sigma)
  double jitter_yaw = 0.035; // rad (sigma)
  FeatureSource source = FeatureSource::tracked;

  int samples_per_object() const { return rotations * trials; }
};

struct Approach {
  int rotation_index = 0;
  int trial = 0;
};

// Direction index and final distance of an approach. Both depend on the
// rotation only; the trials at one rotation are repeats that differ by
// placement jitter. Rotations 0..5 give directions 0,1,2,3,0,1 and distances
// 30,30,10,10,30,30 mm, so each axis of the object is met at both distances.
int approach_direction(const Protocol& protocol, Approach a);
double approach_distance(const Protocol& protocol, Approach a);

std::uint64_t sample_seed(std::uint64_t master_seed, int label, Approach a);
// The settled scene of one approach (object jitter drawn from `seed`).
sim::Scene approach_scene(const sim::RigidObject* object, Approach a, const Protocol& protocol,
                          const SensorConfig& config, std::uint64_t seed);

// One approach: the sensor is lowered to tip clearance beside the object,
// moved horizontally towards it until the array axis is at the chosen
// distance from the object centre, and allowed to settle. object may be null
// (control run; the feature is all zeros).
LabeledSample collect_sample(const sim::RigidObject* object, int label, Approach a,
                             const Protocol& protocol, const SensorConfig& config,
                             std::uint64_t master_seed);

// rotations x trials samples per object, labels = index in `objects`.
Dataset collect_classification_dataset(std::span<const sim::RigidObject> objects,
                                       const Protocol& protocol, const SensorConfig& config,
                                       std::uint64_t master_seed, int jobs = 1);

// Whisker i's displacement moves to whisker (i + j) mod 8 rotated by j*45 deg.
std::vector<double> rotate_features(std::span<const double> features, int j);
// Every sample in 8 copies (j = 0..7, j = 0 first). Needs 16 features.
Dataset augment_rotation_45(const Dataset& dataset);

// Stratified: round(train_fraction * n_c) of each class go to train. Order
// within each output follows the input order.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, Rng& rng);

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string dataset_csv(const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

// ---- model ----------------------------------------------------------------

struct MlpParams {
  int inputs = 16;
  int hidden = 32;
  int outputs = kNumClasses;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // outputs x hidden
  std::vector<double> b2;  // outputs

  MlpParams() = default;
  MlpParams(int in, int hid, int out);  // zero-initialised

  std::array<std::vector<double>*, 4> blocks() { return {&w1, &b1, &w2, &b2}; }
  std::array<const std::vector<double>*, 4> blocks() const { return {&w1, &b1, &w2, &b2}; }
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Weights and biases uniform in +-1/sqrt(fan_in).
MlpParams init_params(int inputs, int hidden, int outputs, Rng& rng);

struct ForwardCache {
  std::vector<double> pre;     // W1 x + b1
  std::vector<double> hidden;  // relu(pre)
};

// logits = W2 relu(W1 x + b1) + b2. Throws ContractError on a size mismatch
// or a non-finite input.
std::vector<double> mlp_forward(std::span<const double> x, const MlpParams& params,
                                ForwardCache* cache = nullptr);

struct LossGrad {
  double loss = 0.0;                       // mean over the batch
  std::vector<std::vector<double>> dlogits;  // (softmax - onehot) / batch
};
LossGrad cross_entropy_loss_and_grad(const std::vector<std::vector<double>>& logits,
                                     std::span<const int> labels);

// Mean cross-entropy over a batch and its gradient w.r.t. every parameter.
double loss_and_param_grad(const MlpParams& params, std::span<const std::vector<double>> xs,
                           std::span<const int> labels, MlpParams& grad);

struct AdamHyper {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpParams m;
  MlpParams v;
};
AdamState make_adam_state(const MlpParams& params);
// t counts from 1.
void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state, int t,
               const AdamHyper& hyper = {});

// Little-endian: "WMLP", u32 version (1), u32 inputs, hidden, outputs, then
// w1, b1, w2, b2 as row-major float64.
std::string encode_model(const MlpParams& params);
MlpParams decode_model(const std::string& bytes);  // FormatError on bad input
void write_model(const MlpParams& params, const std::filesystem::path& path);
MlpParams read_model(const std::filesystem::path& path);

// ---- training ---------------------------------------------------------------

using Confusion = std::array<std::array<int, kNumClasses>, kNumClasses>;  // [true][predicted]

struct Evaluation {
  double accuracy = 0.0;
  Confusion confusion{};
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean training loss per epoch
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  Confusion confusion{};
};

struct TrainResult {
  MlpParams params;
  TrainReport report;
};

int predict(const MlpParams& params, std::span<const double> x);
Evaluation evaluate(const MlpParams& params, const Dataset& test);

// Mini-batch Adam on cross-entropy; batches are reshuffled every epoch from
// an Rng seeded with `seed`. With settings.standardize the network sees
// z-scored features during training and the returned parameters have the
// scaling folded into W1 and b1. If `test` is given the report carries its
// accuracy and confusion matrix. Throws TrainingError when the loss stops
// being finite.
TrainResult train(const Dataset& train_set, const LearnSettings& settings, std::uint64_t seed,
                  const Dataset* test = nullptr);

// Same dataset with labels permuted at random (null-model control).
Dataset shuffle_labels(const Dataset& dataset, Rng& rng);

std::string confusion_csv(const Confusion& confusion);

// ---- experiment -------------------------------------------------------------

struct ClassificationRun {
  Dataset raw;        // 30 per object
  Dataset augmented;  // x8
  Dataset train;
  Dataset test;
  TrainResult result;
  // Shuffled-label control: test accuracy of each retrained null model and
  // their mean. A single shuffle is noisy because whole clusters of similar
  // samples fall to one random class, so several are averaged.
  std::vector<double> control_accuracy;
  double control_mean = 0.0;
};

// augment -> split only (train and test filled, no training).
ClassificationRun prepare_classification(Dataset raw, const SensorConfig& config,
                                         std::uint64_t seed);

// collect -> augment -> split -> train -> evaluate. Split and control
// shuffles use child streams of `seed`; training uses `seed` itself.
ClassificationRun run_classification(Dataset raw, const SensorConfig& config, std::uint64_t seed,
                                     int jobs = 1, int controls = 10);
ClassificationRun run_classification(std::span<const sim::RigidObject> objects,
                                     const Protocol& protocol, const SensorConfig& config,
                                     std::uint64_t seed, int jobs = 1, int controls = 10);

}  // namespace whisker::learn
