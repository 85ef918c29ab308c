#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforest/flow.hpp"

// The 20-feature numeric encoding of a flow and the frozen schema that maps
// categorical tokens to integer codes.

namespace flowforest {

namespace feat {
// Feature slots, in the canonical order. Slots 0..12 come straight from the
// record; 13 and 16..19 are derived from 6, 10, 11, 12.
enum : size_t {
  kSrcIpType = 0,    // 1 = RFC1918 private, 0 = public
  kDstIpType = 1,
  kSrcPort = 2,      // numeric port, -1 when the record has no usable port
  kDstPort = 3,
  kDirection = 4,    // 1 when the token carries a rightward indicator
  kConnState = 5,    // categorical code
  kDuration = 6,     // seconds
  kProtocol = 7,     // categorical code
  kSrcTos = 8,
  kDstTos = 9,
  kOutBytes = 10,    // source-to-destination bytes
  kInBytes = 11,     // destination-to-source bytes
  kTotPkts = 12,
  kTotBytes = 13,    // = out + in
  kSrcPortType = 14, // IANA range code
  kDstPortType = 15,
  kBytesPerSec = 16,
  kBytesPerPkt = 17,
  kPktsPerSec = 18,
  kByteRatio = 19,   // out/in, = out when in == 0
  kCount = 20
};
}  // namespace feat

using FeatureVector = std::array<double, feat::kCount>;

/// Numeric value used in the port slots when the record has no usable port.
inline constexpr double kNoPort = -1.0;

/// IANA port range codes.
enum class PortType : int { well_known = 0, registered = 1, dynamic_private = 2, none = 3 };

/// 0-1023 -> well_known, 1024-49151 -> registered, 49152-65535 ->
/// dynamic_private, no port -> none. Throws std::invalid_argument outside
/// [0, 65535].
PortType classify_port(std::optional<int> port);

/// "123" base 10, "0x0303" base 16; anything else (or out of port range)
/// has no usable numeric value.
std::optional<int> parse_port(const std::string& token);

bool is_private_ipv4(const std::string& addr);

/// Frozen token->code tables. Code 0 is reserved for tokens unseen at build
/// time; observed tokens get codes 1..k in lexicographic order so the schema
/// does not depend on corpus ordering.
struct FeatureSchema {
  std::map<std::string, int> protocol_codes;
  std::map<std::string, int> state_codes;

  static FeatureSchema build(std::span<const RawFlow> corpus);
  static FeatureSchema build(const std::vector<std::vector<RawFlow> const*>& groups);

  int protocol_code(const std::string& token) const;
  int state_code(const std::string& token) const;

  std::string to_text() const;
  static FeatureSchema from_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static FeatureSchema load(const std::filesystem::path& path);

  /// FNV-1a over the serialized text; stored in trained models so a model
  /// and its encoding travel together.
  uint64_t fingerprint() const;

  static const std::array<const char*, feat::kCount>& feature_names();
  /// Slots the adversary may alter directly / slots recomputed from them.
  static std::span<const size_t> mutable_slots();
  static std::span<const size_t> dependent_slots();
};

/// Column-major matrix of feature vectors (one column per feature slot).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  double& at(size_t row, size_t col) { return data_[col * rows_ + row]; }
  double at(size_t row, size_t col) const { return data_[col * rows_ + row]; }

  double* col(size_t c) { return data_.data() + c * rows_; }
  const double* col(size_t c) const { return data_.data() + c * rows_; }

  void copy_row(size_t row, double* out) const {
    for (size_t c = 0; c < cols_; ++c) out[c] = data_[c * rows_ + row];
  }

  FeatureVector row(size_t r) const;
  void set_row(size_t r, std::span<const double> values);

  FeatureMatrix select_rows(std::span<const uint32_t> indices) const;
  FeatureMatrix select_cols(std::span<const size_t> keep) const;
  void append_rows(const FeatureMatrix& other);

  bool operator==(const FeatureMatrix& other) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

/// Applies the derived-feature formulas in place (slots 13, 16..19 from
/// slots 6, 10, 11, 12). Idempotent. Zero denominators follow the policy
/// documented in kern::DerivedCols.
void recompute_derived(FeatureVector& v);
void recompute_derived(FeatureMatrix& m);

/// Extracts feature vectors against a frozen schema. Unknown categorical
/// tokens map to code 0 and bump the warning counter.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureSchema schema) : schema_(std::move(schema)) {}

  FeatureVector extract(const RawFlow& flow) const;
  FeatureMatrix extract_all(std::span<const RawFlow> flows, unsigned threads = 0) const;

  const FeatureSchema& schema() const { return schema_; }
  uint64_t unknown_token_warnings() const { return warnings_.load(); }

 private:
  FeatureSchema schema_;
  mutable std::atomic<uint64_t> warnings_{0};
};

}  // namespace flowforest
