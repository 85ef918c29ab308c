#include "flowforest/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "flowforest/parallel.hpp"
#include "flowforest/rng.hpp"

namespace flowforest::eval {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

size_t train_count(size_t n, double fraction) {
  return static_cast<size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::vector<uint8_t> TrainingSets::train_labels() const {
  std::vector<uint8_t> labels(train_idx.size());
  for (size_t i = 0; i < train_idx.size(); ++i) labels[i] = y[train_idx[i]];
  return labels;
}

std::vector<uint8_t> TrainingSets::test_labels() const {
  std::vector<uint8_t> labels(test_idx.size());
  for (size_t i = 0; i < test_idx.size(); ++i) labels[i] = y[test_idx[i]];
  return labels;
}

FeatureMatrix TrainingSets::test_malicious_matrix() const {
  std::vector<uint32_t> malicious;
  for (const uint32_t idx : test_idx) {
    if (y[idx] == 1) malicious.push_back(idx);
  }
  return x.select_rows(malicious);
}

TrainingSets build_training_sets(const FeatureMatrix& benign_pool, const FeatureMatrix& malicious,
                                 const ExperimentPlan& plan) {
  const size_t n_mal = malicious.rows();
  if (n_mal == 0) throw std::invalid_argument("no malicious flows for family " + plan.family);
  const auto n_ben =
      static_cast<size_t>(std::llround(plan.benign_ratio * static_cast<double>(n_mal)));
  if (benign_pool.rows() < n_ben) {
    throw std::runtime_error("insufficient benign pool for family " + plan.family + ": need " +
                             std::to_string(n_ben) + ", have " +
                             std::to_string(benign_pool.rows()));
  }

  TrainingSets sets;
  sets.n_malicious = n_mal;
  sets.n_benign = n_ben;

  Rng sample_rng(derive_seed(plan.seed, "benign-sample"));
  const std::vector<uint32_t> benign_sel =
      sample_rng.sample_without_replacement(static_cast<uint32_t>(benign_pool.rows()),
                                            static_cast<uint32_t>(n_ben));

  sets.x = malicious;
  sets.x.append_rows(benign_pool.select_rows(benign_sel));
  sets.y.assign(n_mal + n_ben, 0);
  std::fill(sets.y.begin(), sets.y.begin() + static_cast<std::ptrdiff_t>(n_mal), uint8_t{1});

  // Both classes split train_fraction / rest with the plan seed.
  auto split = [&](size_t offset, size_t count, const char* tag, std::vector<uint32_t>& train,
                   std::vector<uint32_t>& test) {
    std::vector<uint32_t> order(count);
    std::iota(order.begin(), order.end(), static_cast<uint32_t>(offset));
    Rng rng(derive_seed(plan.seed, tag));
    rng.shuffle(order);
    const size_t n_train = train_count(count, plan.train_fraction);
    train.insert(train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  };
  split(0, n_mal, "split-malicious", sets.train_idx, sets.test_idx);
  split(n_mal, n_ben, "split-benign", sets.train_idx, sets.test_idx);
  std::sort(sets.train_idx.begin(), sets.train_idx.end());
  std::sort(sets.test_idx.begin(), sets.test_idx.end());
  return sets;
}

ModelConfigs default_model_configs() {
  ModelConfigs configs;
  configs.undistilled.n_estimators = 763;
  configs.undistilled.criterion = Criterion::gini;
  configs.undistilled.max_features = MaxFeatures::sqrt();
  configs.undistilled.bootstrap = true;

  configs.condenser.n_estimators = 894;
  configs.condenser.criterion = Criterion::gini;
  configs.condenser.max_features = MaxFeatures::sqrt();
  configs.condenser.bootstrap = true;

  configs.receiver.n_estimators = 1352;
  configs.receiver.criterion = Criterion::mse;
  configs.receiver.max_features = MaxFeatures::half();
  configs.receiver.bootstrap = true;
  return configs;
}

FamilyExperiment run_family_training(const FeatureMatrix& benign_pool,
                                     const FeatureMatrix& malicious, const ExperimentPlan& plan,
                                     const ModelConfigs& configs, uint64_t schema_fingerprint,
                                     unsigned threads) {
  FamilyExperiment experiment;
  experiment.family = plan.family;
  experiment.sets = build_training_sets(benign_pool, malicious, plan);

  ModelConfigs seeded = configs;
  seeded.undistilled.rng_seed = derive_seed(plan.seed, "undistilled");
  seeded.condenser.rng_seed = derive_seed(plan.seed, "condenser");
  seeded.receiver.rng_seed = derive_seed(plan.seed, "receiver");

  const FeatureMatrix train_x = experiment.sets.train_matrix();
  const std::vector<uint8_t> train_y = experiment.sets.train_labels();

  auto start = std::chrono::steady_clock::now();
  experiment.undistilled = Forest::train_classifier(train_x, train_y, 2, seeded.undistilled,
                                                    schema_fingerprint, threads);
  experiment.timings.undistilled_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  experiment.distilled = distill::build_detector(experiment.sets.x, experiment.sets.y,
                                                 experiment.sets.train_idx, seeded.condenser,
                                                 seeded.receiver, schema_fingerprint,
                                                 plan.family, threads);
  experiment.timings.distilled_seconds = seconds_since(start);
  return experiment;
}

std::vector<uint8_t> DetectorRef::predict(const FeatureMatrix& data, unsigned threads) const {
  if (classifier != nullptr) return classifier->predict_classes(data, threads);
  if (distilled != nullptr) return distill::detect_batch(*distilled, data, threads);
  throw std::logic_error("DetectorRef is empty");
}

MetricsReport evaluate_detector(const DetectorRef& detector, const FeatureMatrix& x,
                                std::span<const uint8_t> y, unsigned threads) {
  const std::vector<uint8_t> predictions = detector.predict(x, threads);
  return compute_metrics(count_confusion(predictions, y));
}

std::vector<GridCell> run_adversarial_grid(std::span<const adversarial::AdversarialDataset> datasets,
                                           std::span<const DetectorRef> detectors,
                                           unsigned threads) {
  std::vector<GridCell> cells(datasets.size() * detectors.size());
  // Parallelism lives inside the per-dataset prediction; cells fill in a
  // fixed order so reports are stable.
  for (size_t d = 0; d < datasets.size(); ++d) {
    const auto& dataset = datasets[d];
    const std::vector<uint8_t> truth(dataset.samples.rows(), 1);
    for (size_t k = 0; k < detectors.size(); ++k) {
      const std::vector<uint8_t> predictions = detectors[k].predict(dataset.samples, threads);
      const ConfusionCounts counts = count_confusion(predictions, truth);
      GridCell& cell = cells[d * detectors.size() + k];
      cell.family = dataset.family;
      cell.group = dataset.group_id;
      cell.step = dataset.step_id;
      cell.detector = detectors[k].name;
      cell.n_samples = dataset.samples.rows();
      cell.tp = counts.tp;
      cell.fn = counts.fn;
      cell.detection_rate =
          static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    }
  }
  return cells;
}

RetrainingResult adversarial_retraining_baseline(
    const FamilyExperiment& experiment,
    std::span<const adversarial::AdversarialDataset> family_datasets,
    const TrainConfig& undistilled_config, unsigned threads) {
  if (family_datasets.empty()) {
    throw std::invalid_argument("adversarial retraining needs the family's datasets");
  }
  FeatureMatrix pool;
  for (const auto& dataset : family_datasets) {
    if (dataset.family != experiment.family) {
      throw std::invalid_argument("dataset family mismatch in retraining baseline");
    }
    pool.append_rows(dataset.samples);
  }

  const auto take = static_cast<size_t>(0.10 * static_cast<double>(pool.rows()));
  Rng rng(derive_seed(undistilled_config.rng_seed, "retrain-sample"));
  const std::vector<uint32_t> picks = rng.sample_without_replacement(
      static_cast<uint32_t>(pool.rows()), static_cast<uint32_t>(take));

  FeatureMatrix train_x = experiment.sets.train_matrix();
  std::vector<uint8_t> train_y = experiment.sets.train_labels();
  train_x.append_rows(pool.select_rows(picks));
  train_y.insert(train_y.end(), take, uint8_t{1});

  TrainConfig config = undistilled_config;
  config.rng_seed = derive_seed(undistilled_config.rng_seed, "retrained");

  RetrainingResult result;
  result.added_samples = take;
  result.model = Forest::train_classifier(train_x, train_y, 2, config,
                                          experiment.undistilled.schema_fingerprint(), threads);
  const DetectorRef ref{"Retrained", &result.model, nullptr};
  result.normal = evaluate_detector(ref, experiment.sets.test_matrix(),
                                    experiment.sets.test_labels(), threads);
  return result;
}

std::vector<size_t> remaining_feature_slots() {
  std::vector<size_t> removed(FeatureSchema::mutable_slots().begin(),
                              FeatureSchema::mutable_slots().end());
  removed.insert(removed.end(), FeatureSchema::dependent_slots().begin(),
                 FeatureSchema::dependent_slots().end());
  std::vector<size_t> kept;
  for (size_t slot = 0; slot < feat::kCount; ++slot) {
    if (std::find(removed.begin(), removed.end(), slot) == removed.end()) kept.push_back(slot);
  }
  return kept;
}

FeatureRemovalResult feature_removal_baseline(const FamilyExperiment& experiment,
                                              const TrainConfig& undistilled_config,
                                              unsigned threads) {
  FeatureRemovalResult result;
  result.kept_slots = remaining_feature_slots();

  const FeatureMatrix train_x = experiment.sets.train_matrix().select_cols(result.kept_slots);
  const std::vector<uint8_t> train_y = experiment.sets.train_labels();

  TrainConfig config = undistilled_config;
  config.rng_seed = derive_seed(undistilled_config.rng_seed, "feature-removal");
  result.model = Forest::train_classifier(train_x, train_y, 2, config,
                                          experiment.undistilled.schema_fingerprint(), threads);

  const FeatureMatrix test_x = experiment.sets.test_matrix().select_cols(result.kept_slots);
  const DetectorRef ref{"FeatureRemoval", &result.model, nullptr};
  result.normal = evaluate_detector(ref, test_x, experiment.sets.test_labels(), threads);
  return result;
}

}  // namespace flowforest::eval
