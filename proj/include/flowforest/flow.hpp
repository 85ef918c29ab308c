#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Ingestion of binetflow-style CSV exports: parsing, ground-truth labeling
// and partitioning into the benign pool and per-botnet-family sets.

namespace flowforest {

/// One parsed netflow record. Ports stay strings at this layer because real
/// exports contain hex and empty ports for ICMP traffic; numeric decoding
/// happens during feature extraction.
struct RawFlow {
  std::string start_time;
  double duration = 0.0;
  std::string protocol;
  std::string src_addr;
  std::string src_port;
  std::string direction;
  std::string dst_addr;
  std::string dst_port;
  std::string conn_state;
  int src_tos = 0;
  int dst_tos = 0;
  uint64_t tot_pkts = 0;
  uint64_t tot_bytes = 0;
  uint64_t src_bytes = 0;
  std::string label_text;

  uint64_t dst_bytes() const { return tot_bytes - src_bytes; }
};

enum class FlowClass : uint8_t { benign = 0, malicious = 1 };

struct FlowLabel {
  FlowClass cls = FlowClass::benign;
  std::string family;  // non-empty iff cls == malicious
};

/// Maps RawFlow fields to CSV column names. The default matches the CTU-13
/// binetflow header; a remap file (key=value lines, keys below) overrides
/// individual entries.
struct ColumnSchema {
  std::string start_time = "StartTime";
  std::string duration = "Dur";
  std::string protocol = "Proto";
  std::string src_addr = "SrcAddr";
  std::string src_port = "Sport";
  std::string direction = "Dir";
  std::string dst_addr = "DstAddr";
  std::string dst_port = "Dport";
  std::string conn_state = "State";
  std::string src_tos = "sTos";
  std::string dst_tos = "dTos";
  std::string tot_pkts = "TotPkts";
  std::string tot_bytes = "TotBytes";
  std::string src_bytes = "SrcBytes";
  std::string label = "Label";

  static ColumnSchema load(const std::filesystem::path& remap_file);
};

struct ParseError {
  size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

struct ParseResult {
  std::vector<RawFlow> flows;
  std::vector<ParseError> errors;
  size_t total_rows = 0;  // data rows seen, valid or not
};

/// Raised when the header is missing a mandatory column (or the file cannot
/// be read at all).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one CSV export. Malformed rows go to the error report with their
/// line numbers; they are never silently dropped.
ParseResult parse_flow_file(const std::filesystem::path& path, const ColumnSchema& schema);

/// Scenario id -> botnet family. Default covers the 13 CTU-13 scenarios.
struct FamilyMap {
  std::map<int, std::string> scenario_to_family;

  static FamilyMap default_ctu13();
  static FamilyMap load(const std::filesystem::path& path);  // key=value lines
  const std::string& family_for(int scenario) const;
};

enum class LabelKind : uint8_t { benign, malicious, unlabeled };

struct LabelOutcome {
  LabelKind kind = LabelKind::unlabeled;
  std::string family;
};

/// Case-insensitive substring rules: "botnet"/"cnc" -> malicious (family from
/// the scenario map), "normal"/"background" -> benign, anything else ->
/// unlabeled. Malicious checks run first because botnet label strings may
/// embed other words.
LabelOutcome label_flow(const RawFlow& flow, const std::string& scenario_family);

/// Families excluded from every partition (too few samples to evaluate).
inline constexpr const char* kExcludedFamily = "Sogou";

struct FlowPartition {
  std::vector<RawFlow> benign;
  std::map<std::string, std::vector<RawFlow>> by_family;
  size_t excluded = 0;   // flows of excluded families
  size_t unlabeled = 0;  // label text matched no rule

  size_t total() const;
};

FlowPartition partition_by_family(const std::vector<std::pair<RawFlow, FlowLabel>>& flows);

/// Streaming variant used by ingestion: labels each flow of one scenario and
/// appends it to the right partition bucket.
void label_into_partition(std::vector<RawFlow>&& flows, const std::string& scenario_family,
                          FlowPartition& out);

}  // namespace flowforest
