#include <cmath>
#include <sstream>

#include "whisker/errors.hpp"
#include "whisker/learn.hpp"

namespace whisker::learn {

int predict(const MlpParams& params, std::span<const double> x) {
  const auto logits = mlp_forward(x, params);
  int best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k)
    if (logits[k] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  return best;
}

Evaluation evaluate(const MlpParams& params, const Dataset& test) {
  if (test.samples.empty()) throw ContractError("evaluate: empty test set");
  Evaluation ev;
  int correct = 0;
  for (const auto& s : test.samples) {
    const int pred = predict(params, s.features);
    ++ev.confusion.at(static_cast<std::size_t>(s.label)).at(static_cast<std::size_t>(pred));
    if (pred == s.label) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.samples.size());
  return ev;
}

TrainResult train(const Dataset& train_set, const LearnSettings& settings, std::uint64_t seed,
                  const Dataset* test) {
  if (train_set.samples.empty()) throw ContractError("train: empty training set");
  if (settings.batch_size < 1 || settings.epochs < 0 || settings.hidden < 1)
    throw ContractError("train: bad settings");
  const int inputs = static_cast<int>(train_set.samples[0].features.size());

  // Per-feature z-scoring; constant features keep unit scale.
  const auto dim = static_cast<std::size_t>(inputs);
  std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
  if (settings.standardize) {
    const auto n = static_cast<double>(train_set.size());
    for (const auto& s : train_set.samples)
      for (std::size_t i = 0; i < dim; ++i) mean[i] += s.features[i] / n;
    std::vector<double> var(dim, 0.0);
    for (const auto& s : train_set.samples)
      for (std::size_t i = 0; i < dim; ++i) var[i] += (s.features[i] - mean[i]) * (s.features[i] - mean[i]) / n;
    for (std::size_t i = 0; i < dim; ++i) scale[i] = var[i] > 1e-12 ? std::sqrt(var[i]) : 1.0;
  }
  std::vector<std::vector<double>> inputs_z;
  inputs_z.reserve(train_set.size());
  for (const auto& s : train_set.samples) {
    std::vector<double> z(dim);
    for (std::size_t i = 0; i < dim; ++i) z[i] = (s.features[i] - mean[i]) / scale[i];
    inputs_z.push_back(std::move(z));
  }

  Rng init_rng(derive_seed(seed, {0}));
  Rng order_rng(derive_seed(seed, {1}));
  TrainResult result;
  result.params = init_params(inputs, settings.hidden, kNumClasses, init_rng);
  AdamState adam = make_adam_state(result.params);
  AdamHyper hyper;
  hyper.lr = settings.learning_rate;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(settings.batch_size);
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  MlpParams grad;
  int t = 0;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    shuffle(order, order_rng);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      xs.clear();
      ys.clear();
      for (std::size_t k = start; k < end; ++k) {
        xs.push_back(inputs_z[order[k]]);
        ys.push_back(train_set.samples[order[k]].label);
      }
      const double loss = loss_and_param_grad(result.params, xs, ys, grad);
      if (!std::isfinite(loss))
        throw TrainingError("training diverged (loss not finite) in epoch " +
                                std::to_string(epoch + 1),
                            epoch + 1);
      weighted += loss * static_cast<double>(end - start);
      adam_step(result.params, grad, adam, ++t, hyper);
    }
    result.report.epoch_loss.push_back(weighted / static_cast<double>(order.size()));
  }

  // W1 (x - mean)/scale + b1 == (W1/scale) x + (b1 - W1 mean/scale)
  auto& p = result.params;
  for (std::size_t j = 0; j < static_cast<std::size_t>(p.hidden); ++j) {
    for (std::size_t i = 0; i < dim; ++i) {
      double& w = p.w1[j * dim + i];
      w /= scale[i];
      p.b1[j] -= w * mean[i];
    }
  }

  result.report.train_accuracy = evaluate(result.params, train_set).accuracy;
  if (test != nullptr && !test->samples.empty()) {
    const Evaluation ev = evaluate(result.params, *test);
    result.report.test_accuracy = ev.accuracy;
    result.report.confusion = ev.confusion;
  }
  return result;
}

Dataset shuffle_labels(const Dataset& dataset, Rng& rng) {
  std::vector<int> labels;
  for (const auto& s : dataset.samples) labels.push_back(s.label);
  shuffle(labels, rng);
  Dataset out = dataset;
  for (std::size_t i = 0; i < labels.size(); ++i) out.samples[i].label = labels[i];
  return out;
}

std::string confusion_csv(const Confusion& confusion) {
  std::ostringstream os;
  os << "true\\predicted";
  for (const auto& name : class_names()) os << ',' << name;
  os << '\n';
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    os << class_names()[r];
    for (int v : confusion[r]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace whisker::learn
