#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowforest/adversarial.hpp"
#include "flowforest/distill.hpp"
#include "flowforest/forest.hpp"
#include "flowforest/metrics.hpp"

// Experiment construction and evaluation: 20:1 benign sampling, 80/20
// splits, the normal-scenario comparison, the adversarial grid and the two
// baseline countermeasures.

namespace flowforest::eval {

struct ExperimentPlan {
  std::string family;
  double benign_ratio = 20.0;   // benign : malicious in every constructed set
  double train_fraction = 0.8;  // both classes split 80/20
  uint64_t seed = 0;            // family-scoped; see derive_seed
};

/// The per-family data layout: rows [0, n_malicious) are the family's
/// malicious flows, rows [n_malicious, n_malicious + n_benign) the sampled
/// benign flows. The Condenser trains on all rows; the Receiver/Undistilled
/// detectors train on train_idx and everything is tested on test_idx.
struct TrainingSets {
  FeatureMatrix x;
  std::vector<uint8_t> y;
  std::vector<uint32_t> train_idx;
  std::vector<uint32_t> test_idx;
  size_t n_malicious = 0;
  size_t n_benign = 0;

  FeatureMatrix train_matrix() const { return x.select_rows(train_idx); }
  FeatureMatrix test_matrix() const { return x.select_rows(test_idx); }
  std::vector<uint8_t> train_labels() const;
  std::vector<uint8_t> test_labels() const;
  /// Test-phase malicious rows only (the adversarial generator's input).
  FeatureMatrix test_malicious_matrix() const;
};

/// Samples ceil(ratio * |malicious|) benign rows uniformly without
/// replacement (plan seed), then splits both classes train_fraction /
/// (1 - train_fraction). Throws with the required count when the pool is
/// too small.
TrainingSets build_training_sets(const FeatureMatrix& benign_pool, const FeatureMatrix& malicious,
                                 const ExperimentPlan& plan);

struct ModelConfigs {
  TrainConfig undistilled;
  TrainConfig condenser;
  TrainConfig receiver;
};

/// Estimator counts, quality functions, split widths and bootstrap settings
/// used by the three forests.
ModelConfigs default_model_configs();

struct DetectorTimings {
  double undistilled_seconds = 0.0;
  double distilled_seconds = 0.0;  // Condenser + Receiver combined
};

struct FamilyExperiment {
  std::string family;
  TrainingSets sets;
  Forest undistilled;
  distill::DistilledDetector distilled;
  DetectorTimings timings;
};

/// Builds the sets and trains both detectors on the same training split
/// (hard labels for the Undistilled, probability labels for the Receiver).
/// Model seeds fan out from plan.seed per purpose.
FamilyExperiment run_family_training(const FeatureMatrix& benign_pool,
                                     const FeatureMatrix& malicious, const ExperimentPlan& plan,
                                     const ModelConfigs& configs, uint64_t schema_fingerprint,
                                     unsigned threads = 0);

/// Uniform detector handle for evaluation loops.
struct DetectorRef {
  std::string name;
  const Forest* classifier = nullptr;
  const distill::DistilledDetector* distilled = nullptr;

  std::vector<uint8_t> predict(const FeatureMatrix& data, unsigned threads) const;
};

MetricsReport evaluate_detector(const DetectorRef& detector, const FeatureMatrix& x,
                                std::span<const uint8_t> y, unsigned threads = 0);

struct NormalRow {
  std::string family;
  std::string detector;
  MetricsReport metrics;
};

struct GridCell {
  std::string family;
  std::string group;
  std::string step;
  std::string detector;
  size_t n_samples = 0;
  uint64_t tp = 0;
  uint64_t fn = 0;
  double detection_rate = 0.0;
};

/// Detection rate of every detector on every adversarial dataset. The
/// datasets hold only malicious samples, so DR = tp / (tp + fn) and
/// precision is undefined by construction.
std::vector<GridCell> run_adversarial_grid(std::span<const adversarial::AdversarialDataset> datasets,
                                           std::span<const DetectorRef> detectors,
                                           unsigned threads = 0);

struct RetrainingResult {
  Forest model;
  MetricsReport normal;
  size_t added_samples = 0;
};

/// Retrains the Undistilled configuration with the training set augmented by
/// floor(10% of the family's adversarial pool), sampled uniformly across all
/// (group, step) cells and labeled malicious.
RetrainingResult adversarial_retraining_baseline(
    const FamilyExperiment& experiment,
    std::span<const adversarial::AdversarialDataset> family_datasets,
    const TrainConfig& undistilled_config, unsigned threads = 0);

/// Feature slots that survive the feature-removal countermeasure: the four
/// directly perturbable slots and the five derived from them are dropped.
std::vector<size_t> remaining_feature_slots();

struct FeatureRemovalResult {
  Forest model;
  MetricsReport normal;
  std::vector<size_t> kept_slots;
};

FeatureRemovalResult feature_removal_baseline(const FamilyExperiment& experiment,
                                              const TrainConfig& undistilled_config,
                                              unsigned threads = 0);

}  // namespace flowforest::eval
