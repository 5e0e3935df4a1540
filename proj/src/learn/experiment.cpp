#include "whisker/learn.hpp"
#include "whisker/parallel.hpp"

namespace whisker::learn {

ClassificationRun run_classification(std::span<const sim::RigidObject> objects,
                                     const Protocol& protocol, const SensorConfig& config,
                                     std::uint64_t seed, int jobs, int controls) {
  return run_classification(collect_classification_dataset(objects, protocol, config, seed, jobs),
                            config, seed, jobs, controls);
}

ClassificationRun prepare_classification(Dataset raw, const SensorConfig& config,
                                         std::uint64_t seed) {
  ClassificationRun run;
  run.raw = std::move(raw);
  run.augmented = augment_rotation_45(run.raw);
  Rng split_rng(derive_seed(seed, {7}));
  std::tie(run.train, run.test) = split(run.augmented, config.learn.train_fraction, split_rng);
  return run;
}

ClassificationRun run_classification(Dataset raw, const SensorConfig& config, std::uint64_t seed,
                                     int jobs, int controls) {
  ClassificationRun run = prepare_classification(std::move(raw), config, seed);
  run.result = train(run.train, config.learn, seed, &run.test);

  run.control_accuracy.assign(static_cast<std::size_t>(std::max(0, controls)), 0.0);
  parallel_for(run.control_accuracy.size(), jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {8, i}));
    const Dataset shuffled = shuffle_labels(run.train, rng);
    run.control_accuracy[i] =
        train(shuffled, config.learn, derive_seed(seed, {9, i}), &run.test).report.test_accuracy;
  });
  double sum = 0.0;
  for (double a : run.control_accuracy) sum += a;
  if (!run.control_accuracy.empty())
    run.control_mean = sum / static_cast<double>(run.control_accuracy.size());
  return run;
}

}  // namespace whisker::learn
