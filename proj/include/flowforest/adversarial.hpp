#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flowforest/features.hpp"

// Adversarial dataset generation: every combination of a feature group
// (which of duration / outgoing bytes / incoming bytes / total packets is
// altered) and a fixed additive increment step, applied to test-phase
// malicious samples only.

namespace flowforest::adversarial {

/// One of the 15 groups of altered features.
struct FeatureGroup {
  const char* id;       // "1a" .. "4a"
  bool duration;
  bool src_bytes;       // outgoing bytes
  bool dst_bytes;       // incoming bytes
  bool tot_pkts;
};

/// One of the 9 increment steps. Duration is in seconds; the ceiling of
/// +120 s keeps altered flows under typical collector duration limits.
struct IncrementStep {
  const char* id;       // "I" .. "IX"
  double duration_inc;
  double src_bytes_inc;
  double dst_bytes_inc;
  double tot_pkts_inc;
};

std::span<const FeatureGroup> feature_groups();   // exactly 15
std::span<const IncrementStep> increment_steps(); // exactly 9

const FeatureGroup& group_by_id(const std::string& id);
const IncrementStep& step_by_id(const std::string& id);

struct AdversarialDataset {
  std::string family;
  std::string group_id;
  std::string step_id;
  FeatureMatrix samples;
  std::vector<uint32_t> provenance;  // row i came from source row provenance[i]
};

/// Increments the group's member slots by the step amounts and recomputes
/// the dependent slots; every other slot is returned bit-identical.
FeatureVector alter_sample(const FeatureVector& x, const FeatureGroup& g, const IncrementStep& s);

/// Applies alter_sample to every row of a family test set, order preserved.
/// Always starts from the originals (applying step I twice is not step II).
AdversarialDataset create_dataset(const FeatureMatrix& test_malicious, const std::string& family,
                                  const FeatureGroup& g, const IncrementStep& s);

/// The full grid: one dataset per (group, step, family), iterated
/// group-major. With all 6 families this yields exactly 810 datasets.
std::vector<AdversarialDataset> generate_all(
    const std::vector<std::pair<std::string, const FeatureMatrix*>>& family_test_sets);

/// Persists the samples as CSV (canonical feature order) plus a JSON sidecar
/// carrying family, group id, step id and provenance.
void save_dataset(const AdversarialDataset& dataset, const std::filesystem::path& csv_path);
AdversarialDataset load_dataset(const std::filesystem::path& csv_path);

}  // namespace flowforest::adversarial
