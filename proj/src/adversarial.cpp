#include "flowforest/adversarial.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flowforest/kernels.hpp"

namespace flowforest::adversarial {

namespace {

// Table of altered-feature groups: singles, pairs, triples and the full set.
constexpr std::array<FeatureGroup, 15> kGroups = {{
    {"1a", true, false, false, false},
    {"1b", false, true, false, false},
    {"1c", false, false, true, false},
    {"1d", false, false, false, true},
    {"2a", true, true, false, false},
    {"2b", true, false, true, false},
    {"2c", true, false, false, true},
    {"2d", false, true, false, true},
    {"2e", false, true, true, false},
    {"2f", false, false, true, true},
    {"3a", true, true, true, false},
    {"3b", true, true, false, true},
    {"3c", true, false, true, true},
    {"3d", false, true, true, true},
    {"4a", true, true, true, true},
}};

constexpr std::array<IncrementStep, 9> kSteps = {{
    {"I", 1, 1, 1, 1},
    {"II", 2, 2, 2, 2},
    {"III", 5, 8, 8, 5},
    {"IV", 10, 16, 16, 10},
    {"V", 15, 64, 64, 15},
    {"VI", 30, 128, 128, 20},
    {"VII", 45, 256, 256, 30},
    {"VIII", 60, 512, 512, 50},
    {"IX", 120, 1024, 1024, 100},
}};

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::span<const FeatureGroup> feature_groups() { return kGroups; }
std::span<const IncrementStep> increment_steps() { return kSteps; }

const FeatureGroup& group_by_id(const std::string& id) {
  for (const auto& g : kGroups) {
    if (id == g.id) return g;
  }
  throw std::invalid_argument("unknown feature group: " + id);
}

const IncrementStep& step_by_id(const std::string& id) {
  for (const auto& s : kSteps) {
    if (id == s.id) return s;
  }
  throw std::invalid_argument("unknown increment step: " + id);
}

FeatureVector alter_sample(const FeatureVector& x, const FeatureGroup& g, const IncrementStep& s) {
  FeatureVector out = x;
  if (g.duration) out[feat::kDuration] = x[feat::kDuration] + s.duration_inc;
  if (g.src_bytes) out[feat::kOutBytes] = x[feat::kOutBytes] + s.src_bytes_inc;
  if (g.dst_bytes) out[feat::kInBytes] = x[feat::kInBytes] + s.dst_bytes_inc;
  if (g.tot_pkts) out[feat::kTotPkts] = x[feat::kTotPkts] + s.tot_pkts_inc;
  recompute_derived(out);
  return out;
}

AdversarialDataset create_dataset(const FeatureMatrix& test_malicious, const std::string& family,
                                  const FeatureGroup& g, const IncrementStep& s) {
  if (test_malicious.rows() == 0) {
    throw std::invalid_argument("create_dataset: empty test set for family " + family);
  }
  AdversarialDataset dataset;
  dataset.family = family;
  dataset.group_id = g.id;
  dataset.step_id = s.id;
  dataset.samples = test_malicious;
  dataset.provenance.resize(test_malicious.rows());
  for (uint32_t i = 0; i < dataset.provenance.size(); ++i) dataset.provenance[i] = i;

  const size_t n = dataset.samples.rows();
  if (g.duration) {
    kern::add_constant(dataset.samples.col(feat::kDuration), s.duration_inc,
                       dataset.samples.col(feat::kDuration), n);
  }
  if (g.src_bytes) {
    kern::add_constant(dataset.samples.col(feat::kOutBytes), s.src_bytes_inc,
                       dataset.samples.col(feat::kOutBytes), n);
  }
  if (g.dst_bytes) {
    kern::add_constant(dataset.samples.col(feat::kInBytes), s.dst_bytes_inc,
                       dataset.samples.col(feat::kInBytes), n);
  }
  if (g.tot_pkts) {
    kern::add_constant(dataset.samples.col(feat::kTotPkts), s.tot_pkts_inc,
                       dataset.samples.col(feat::kTotPkts), n);
  }
  recompute_derived(dataset.samples);
  return dataset;
}

std::vector<AdversarialDataset> generate_all(
    const std::vector<std::pair<std::string, const FeatureMatrix*>>& family_test_sets) {
  std::vector<AdversarialDataset> all;
  all.reserve(kGroups.size() * kSteps.size() * family_test_sets.size());
  for (const auto& group : kGroups) {
    for (const auto& step : kSteps) {
      for (const auto& [family, test_set] : family_test_sets) {
        all.push_back(create_dataset(*test_set, family, group, step));
      }
    }
  }
  return all;
}

void save_dataset(const AdversarialDataset& dataset, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + csv_path.string());
  const auto& names = FeatureSchema::feature_names();
  for (size_t c = 0; c < names.size(); ++c) {
    out << (c ? "," : "") << names[c];
  }
  out << "\n";
  for (size_t r = 0; r < dataset.samples.rows(); ++r) {
    for (size_t c = 0; c < dataset.samples.cols(); ++c) {
      if (c) out << ',';
      out << format_double(dataset.samples.at(r, c));
    }
    out << "\n";
  }

  nlohmann::json sidecar;
  sidecar["family"] = dataset.family;
  sidecar["group"] = dataset.group_id;
  sidecar["step"] = dataset.step_id;
  sidecar["rows"] = dataset.samples.rows();
  sidecar["provenance"] = dataset.provenance;
  std::filesystem::path meta = csv_path;
  meta.replace_extension(".json");
  std::ofstream meta_out(meta, std::ios::binary);
  if (!meta_out) throw std::runtime_error("cannot write " + meta.string());
  meta_out << sidecar.dump(2) << "\n";
}

AdversarialDataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file " + csv_path.string());

  std::vector<FeatureVector> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FeatureVector v{};
    size_t col = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end && col < feat::kCount) {
      const char* comma = std::find(p, end, ',');
      double value = 0.0;
      const auto res = std::from_chars(p, comma, value);
      if (res.ec != std::errc{}) throw std::runtime_error("bad value in " + csv_path.string());
      v[col++] = value;
      p = comma + 1;
      if (comma == end) break;
    }
    if (col != feat::kCount) throw std::runtime_error("short row in " + csv_path.string());
    rows.push_back(v);
  }

  AdversarialDataset dataset;
  dataset.samples = FeatureMatrix(rows.size(), feat::kCount);
  for (size_t r = 0; r < rows.size(); ++r) dataset.samples.set_row(r, rows[r]);

  std::filesystem::path meta = csv_path;
  meta.replace_extension(".json");
  std::ifstream meta_in(meta, std::ios::binary);
  if (!meta_in) throw std::runtime_error("missing sidecar " + meta.string());
  nlohmann::json sidecar = nlohmann::json::parse(meta_in);
  dataset.family = sidecar.at("family").get<std::string>();
  dataset.group_id = sidecar.at("group").get<std::string>();
  dataset.step_id = sidecar.at("step").get<std::string>();
  dataset.provenance = sidecar.at("provenance").get<std::vector<uint32_t>>();
  return dataset;
}

}  // namespace flowforest::adversarial
