#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flowforest/forest.hpp"

// Distillation pipeline: a Condenser classifier turns hard class labels into
// probability labels (the fraction of estimators voting malicious), and a
// Receiver regressor trained on those labels performs the detection through
// rounding at 0.5.

namespace flowforest::distill {

/// Fraction of Condenser trees voting malicious, one value per sample. Each
/// value is exactly (vote count) / n_estimators.
std::vector<double> generate_probability_labels(const Forest& condenser,
                                                const FeatureMatrix& data, unsigned threads = 0);

struct DistilledDetector {
  Forest condenser;
  Forest receiver;
  std::string family;

  void save(std::ostream& out) const;
  static DistilledDetector load(std::istream& in);
};

/// Trains the two-phase detector. The Condenser is trained on the full
/// dataset with the hard labels and probability labels are generated over
/// that same dataset; the Receiver is trained on the subset given by
/// train_indices against those labels. Throws if the data holds only one
/// class.
DistilledDetector build_detector(const FeatureMatrix& full_data,
                                 std::span<const uint8_t> hard_labels,
                                 std::span<const uint32_t> train_indices,
                                 const TrainConfig& condenser_cfg, const TrainConfig& receiver_cfg,
                                 uint64_t schema_fingerprint, std::string family,
                                 unsigned threads = 0);

struct Detection {
  double score = 0.0;  // Receiver output in [0, 1]
  bool malicious = false;
};

/// Rounds the Receiver score; exactly 0.5 resolves to malicious (in an IDS
/// the conservative direction is to alert).
Detection detect(const DistilledDetector& detector, std::span<const double> row);

/// Batch decisions (1 = malicious), same policy as detect().
std::vector<uint8_t> detect_batch(const DistilledDetector& detector, const FeatureMatrix& data,
                                  unsigned threads = 0);

}  // namespace flowforest::distill
