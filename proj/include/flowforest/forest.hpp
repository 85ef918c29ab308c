#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforest/features.hpp"

// From-scratch CART trees and random-forest ensembles. Classifier mode
// splits on Gini impurity and votes by majority; regressor mode splits on
// MSE and averages leaf means. Training is deterministic: given the same
// data, config and seed, the serialized model is byte-identical.

namespace flowforest {

enum class Criterion : uint8_t { gini = 0, mse = 1 };
enum class ForestMode : uint8_t { classifier = 0, regressor = 1 };

/// Features examined per split: ceil(sqrt(F)), ceil(F/2), all F, or an
/// explicit count.
struct MaxFeatures {
  enum class Kind : uint8_t { sqrt = 0, half = 1, all = 2, exact = 3 };
  Kind kind = Kind::sqrt;
  uint32_t count = 0;  // used when kind == exact

  static MaxFeatures sqrt() { return {Kind::sqrt, 0}; }
  static MaxFeatures half() { return {Kind::half, 0}; }
  static MaxFeatures all() { return {Kind::all, 0}; }
  static MaxFeatures exact(uint32_t n) { return {Kind::exact, n}; }

  uint32_t resolve(uint32_t n_features) const;
};

struct TrainConfig {
  uint32_t n_estimators = 100;
  Criterion criterion = Criterion::gini;
  MaxFeatures max_features = MaxFeatures::sqrt();
  bool bootstrap = true;
  uint32_t min_samples_split = 2;
  std::optional<uint32_t> max_depth;
  uint64_t rng_seed = 0;
};

/// One node of a tree. Internal nodes route x[feature] <= threshold to
/// `left`, otherwise `right`; leaves carry the class id (classifier) or the
/// mean target (regressor) in `value`.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double* row) const {
    uint32_t idx = 0;
    while (!nodes[idx].is_leaf()) {
      const TreeNode& n = nodes[idx];
      idx = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[idx].value;
  }
};

/// Weighted impurity decrease of a concrete split, per the quality function:
/// Gini impurity 1 - sum_k p_k^2, or variance for MSE. Used directly by the
/// public API and cross-checked against the training scan in the tests.
double split_quality(std::span<const double> targets_left, std::span<const double> targets_right,
                     Criterion criterion);

class Forest {
 public:
  /// Labels are class ids in [0, n_classes). Throws on empty data or on
  /// labels outside the range.
  static Forest train_classifier(const FeatureMatrix& data, std::span<const uint8_t> labels,
                                 uint32_t n_classes, const TrainConfig& config,
                                 uint64_t schema_fingerprint, unsigned threads = 0);

  static Forest train_regressor(const FeatureMatrix& data, std::span<const double> targets,
                                const TrainConfig& config, uint64_t schema_fingerprint,
                                unsigned threads = 0);

  ForestMode mode() const { return mode_; }
  uint32_t n_classes() const { return n_classes_; }
  uint32_t n_features() const { return n_features_; }
  const TrainConfig& config() const { return config_; }
  uint64_t schema_fingerprint() const { return schema_fingerprint_; }
  const std::vector<Tree>& trees() const { return trees_; }

  /// Throws when the caller's schema fingerprint does not match the one the
  /// model was trained with.
  void expect_fingerprint(uint64_t fingerprint) const;

  /// Majority vote over the per-tree outputs. Ties resolve to the lowest
  /// class id; the detector-level alert policy lives in distill::detect.
  uint32_t predict_class(std::span<const double> row) const;

  /// Per-tree votes as class ids, in tree order. One-hot indicator vectors
  /// are a trivial reshape of this.
  std::vector<uint32_t> per_tree_votes(std::span<const double> row) const;

  /// Mean per-tree indicator: fraction of trees voting each class.
  std::vector<double> vote_fractions(std::span<const double> row) const;

  /// Mean of the per-tree leaf values (regressor mode).
  double predict_value(std::span<const double> row) const;

  // Batch helpers; parallel over samples, outputs indexed by row.
  std::vector<uint8_t> predict_classes(const FeatureMatrix& data, unsigned threads = 0) const;
  std::vector<double> predict_values(const FeatureMatrix& data, unsigned threads = 0) const;
  std::vector<double> malicious_vote_fractions(const FeatureMatrix& data,
                                               unsigned threads = 0) const;

  void save(std::ostream& out) const;
  static Forest load(std::istream& in);

  /// Assembles a forest from externally built trees (tests build tiny
  /// hand-crafted ensembles this way).
  static Forest from_trees(ForestMode mode, uint32_t n_classes, uint32_t n_features,
                           std::vector<Tree> trees, const TrainConfig& config,
                           uint64_t schema_fingerprint);

 private:
  ForestMode mode_ = ForestMode::classifier;
  uint32_t n_classes_ = 2;
  uint32_t n_features_ = 0;
  uint64_t schema_fingerprint_ = 0;
  TrainConfig config_;
  std::vector<Tree> trees_;
};

}  // namespace flowforest
