#include "flowforest/distill.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "flowforest/parallel.hpp"

namespace flowforest::distill {

namespace {

constexpr uint32_t kBundleMagic = 0x4646444cu;  // "FFDL"

void write_string(std::ostream& out, const std::string& s) {
  const auto n = static_cast<uint32_t>(s.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (!in || n > (1u << 20)) throw std::runtime_error("corrupt detector bundle");
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace

std::vector<double> generate_probability_labels(const Forest& condenser,
                                                const FeatureMatrix& data, unsigned threads) {
  if (condenser.mode() != ForestMode::classifier) {
    throw std::invalid_argument("probability labels require a classifier Condenser");
  }
  if (condenser.trees().empty()) throw std::invalid_argument("Condenser is untrained");
  return condenser.malicious_vote_fractions(data, threads);
}

DistilledDetector build_detector(const FeatureMatrix& full_data,
                                 std::span<const uint8_t> hard_labels,
                                 std::span<const uint32_t> train_indices,
                                 const TrainConfig& condenser_cfg, const TrainConfig& receiver_cfg,
                                 uint64_t schema_fingerprint, std::string family,
                                 unsigned threads) {
  bool saw_benign = false;
  bool saw_malicious = false;
  for (const uint8_t y : hard_labels) {
    saw_benign = saw_benign || y == 0;
    saw_malicious = saw_malicious || y == 1;
  }
  if (!saw_benign || !saw_malicious) {
    throw std::invalid_argument("build_detector requires samples of both classes");
  }

  DistilledDetector detector;
  detector.family = std::move(family);
  detector.condenser = Forest::train_classifier(full_data, hard_labels, 2, condenser_cfg,
                                                schema_fingerprint, threads);

  const std::vector<double> labels =
      generate_probability_labels(detector.condenser, full_data, threads);

  FeatureMatrix train_data = full_data.select_rows(train_indices);
  std::vector<double> train_labels(train_indices.size());
  for (size_t i = 0; i < train_indices.size(); ++i) train_labels[i] = labels[train_indices[i]];

  detector.receiver = Forest::train_regressor(train_data, train_labels, receiver_cfg,
                                              schema_fingerprint, threads);
  return detector;
}

Detection detect(const DistilledDetector& detector, std::span<const double> row) {
  Detection d;
  d.score = detector.receiver.predict_value(row);
  d.malicious = d.score >= 0.5;
  return d;
}

std::vector<uint8_t> detect_batch(const DistilledDetector& detector, const FeatureMatrix& data,
                                  unsigned threads) {
  std::vector<uint8_t> out(data.rows());
  parallel_for(0, data.rows(), threads, [&](size_t i) {
    std::vector<double> row(data.cols());
    data.copy_row(i, row.data());
    out[i] = detector.receiver.predict_value(row) >= 0.5 ? 1 : 0;
  });
  return out;
}

void DistilledDetector::save(std::ostream& out) const {
  out.write(reinterpret_cast<const char*>(&kBundleMagic), 4);
  write_string(out, family);
  condenser.save(out);
  receiver.save(out);
}

DistilledDetector DistilledDetector::load(std::istream& in) {
  uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  if (magic != kBundleMagic) throw std::runtime_error("not a distilled detector bundle");
  DistilledDetector d;
  d.family = read_string(in);
  d.condenser = Forest::load(in);
  d.receiver = Forest::load(in);
  if (d.condenser.schema_fingerprint() != d.receiver.schema_fingerprint()) {
    throw std::runtime_error("bundle forests disagree on the feature schema");
  }
  return d;
}

}  // namespace flowforest::distill
