#include "flowforest/flow.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace flowforest {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains_ci(const std::string& haystack, const std::string& needle_lower) {
  return lower(haystack).find(needle_lower) != std::string::npos;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return value;
}

std::optional<uint64_t> parse_u64(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  uint64_t value = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return value;
}

// Argus leaves ToS blank for some protocols; 0 is the dominant legitimate
// value, so blanks default to 0.
std::optional<int> parse_tos(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return 0;
  const auto v = parse_double(s);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<std::string> read_remap_value(const std::string& key,
                                            const std::map<std::string, std::string>& kv) {
  const auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw SchemaError("malformed line (expected key=value): " + t);
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

}  // namespace

ColumnSchema ColumnSchema::load(const std::filesystem::path& remap_file) {
  ColumnSchema schema;
  const auto kv = read_kv_file(remap_file);
  auto apply = [&](const char* key, std::string& slot) {
    if (const auto v = read_remap_value(key, kv)) slot = *v;
  };
  apply("start_time", schema.start_time);
  apply("duration", schema.duration);
  apply("protocol", schema.protocol);
  apply("src_addr", schema.src_addr);
  apply("src_port", schema.src_port);
  apply("direction", schema.direction);
  apply("dst_addr", schema.dst_addr);
  apply("dst_port", schema.dst_port);
  apply("conn_state", schema.conn_state);
  apply("src_tos", schema.src_tos);
  apply("dst_tos", schema.dst_tos);
  apply("tot_pkts", schema.tot_pkts);
  apply("tot_bytes", schema.tot_bytes);
  apply("src_bytes", schema.src_bytes);
  apply("label", schema.label);
  return schema;
}

ParseResult parse_flow_file(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open flow file: " + path.string());

  std::string header_line;
  if (!std::getline(in, header_line)) throw SchemaError("empty flow file: " + path.string());
  const auto header = split_csv_line(header_line);

  auto column_index = [&](const std::string& name) -> size_t {
    for (size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw SchemaError("missing mandatory column '" + name + "' in " + path.string());
  };

  const size_t c_start = column_index(schema.start_time);
  const size_t c_dur = column_index(schema.duration);
  const size_t c_proto = column_index(schema.protocol);
  const size_t c_saddr = column_index(schema.src_addr);
  const size_t c_sport = column_index(schema.src_port);
  const size_t c_dir = column_index(schema.direction);
  const size_t c_daddr = column_index(schema.dst_addr);
  const size_t c_dport = column_index(schema.dst_port);
  const size_t c_state = column_index(schema.conn_state);
  const size_t c_stos = column_index(schema.src_tos);
  const size_t c_dtos = column_index(schema.dst_tos);
  const size_t c_pkts = column_index(schema.tot_pkts);
  const size_t c_bytes = column_index(schema.tot_bytes);
  const size_t c_sbytes = column_index(schema.src_bytes);
  const size_t c_label = column_index(schema.label);

  ParseResult result;
  std::string line;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.total_rows;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      result.errors.push_back({line_no, "column count mismatch (" +
                                            std::to_string(fields.size()) + " vs " +
                                            std::to_string(header.size()) + ")"});
      continue;
    }

    RawFlow flow;
    flow.start_time = trim(fields[c_start]);
    flow.protocol = trim(fields[c_proto]);
    flow.src_addr = trim(fields[c_saddr]);
    flow.src_port = trim(fields[c_sport]);
    flow.direction = trim(fields[c_dir]);
    flow.dst_addr = trim(fields[c_daddr]);
    flow.dst_port = trim(fields[c_dport]);
    flow.conn_state = trim(fields[c_state]);
    flow.label_text = trim(fields[c_label]);

    const auto dur = parse_double(fields[c_dur]);
    if (!dur) {
      result.errors.push_back({line_no, "unparseable duration '" + trim(fields[c_dur]) + "'"});
      continue;
    }
    if (*dur < 0.0) {
      result.errors.push_back({line_no, "negative duration"});
      continue;
    }
    flow.duration = *dur;

    const auto pkts = parse_u64(fields[c_pkts]);
    const auto bytes = parse_u64(fields[c_bytes]);
    const auto sbytes = parse_u64(fields[c_sbytes]);
    if (!pkts || !bytes || !sbytes) {
      result.errors.push_back({line_no, "unparseable packet/byte count"});
      continue;
    }
    if (*pkts < 1) {
      result.errors.push_back({line_no, "flow with zero packets"});
      continue;
    }
    if (*sbytes > *bytes) {
      result.errors.push_back({line_no, "byte inconsistency (SrcBytes > TotBytes)"});
      continue;
    }
    flow.tot_pkts = *pkts;
    flow.tot_bytes = *bytes;
    flow.src_bytes = *sbytes;

    const auto stos = parse_tos(fields[c_stos]);
    const auto dtos = parse_tos(fields[c_dtos]);
    if (!stos || !dtos) {
      result.errors.push_back({line_no, "unparseable ToS field"});
      continue;
    }
    flow.src_tos = *stos;
    flow.dst_tos = *dtos;

    result.flows.push_back(std::move(flow));
  }
  return result;
}

FamilyMap FamilyMap::default_ctu13() {
  FamilyMap map;
  map.scenario_to_family = {{1, "Neris"},  {2, "Neris"},   {3, "Rbot"},  {4, "Rbot"},
                            {5, "Virut"},  {6, "Menti"},   {7, "Sogou"}, {8, "Murlo"},
                            {9, "Neris"},  {10, "Rbot"},   {11, "Rbot"}, {12, "NSIS.ay"},
                            {13, "Virut"}};
  return map;
}

FamilyMap FamilyMap::load(const std::filesystem::path& path) {
  FamilyMap map;
  for (const auto& [key, value] : read_kv_file(path)) {
    int scenario = 0;
    const auto* end = key.data() + key.size();
    const auto res = std::from_chars(key.data(), end, scenario);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw SchemaError("bad scenario id in family map: " + key);
    }
    map.scenario_to_family[scenario] = value;
  }
  return map;
}

const std::string& FamilyMap::family_for(int scenario) const {
  const auto it = scenario_to_family.find(scenario);
  if (it == scenario_to_family.end()) {
    throw SchemaError("scenario " + std::to_string(scenario) + " missing from family map");
  }
  return it->second;
}

LabelOutcome label_flow(const RawFlow& flow, const std::string& scenario_family) {
  // Malicious first: CTU label strings like "From-Botnet-V42-..." would not
  // match the benign rules anyway, but the order makes the precedence
  // explicit.
  if (contains_ci(flow.label_text, "botnet") || contains_ci(flow.label_text, "cnc")) {
    return {LabelKind::malicious, scenario_family};
  }
  if (contains_ci(flow.label_text, "normal") || contains_ci(flow.label_text, "background")) {
    return {LabelKind::benign, {}};
  }
  return {LabelKind::unlabeled, {}};
}

size_t FlowPartition::total() const {
  size_t n = benign.size() + excluded + unlabeled;
  for (const auto& [family, flows] : by_family) n += flows.size();
  return n;
}

FlowPartition partition_by_family(const std::vector<std::pair<RawFlow, FlowLabel>>& flows) {
  FlowPartition out;
  for (const auto& [flow, label] : flows) {
    if (label.cls == FlowClass::benign) {
      out.benign.push_back(flow);
    } else if (label.family == kExcludedFamily) {
      ++out.excluded;
    } else {
      out.by_family[label.family].push_back(flow);
    }
  }
  return out;
}

void label_into_partition(std::vector<RawFlow>&& flows, const std::string& scenario_family,
                          FlowPartition& out) {
  for (auto& flow : flows) {
    const LabelOutcome outcome = label_flow(flow, scenario_family);
    switch (outcome.kind) {
      case LabelKind::benign:
        out.benign.push_back(std::move(flow));
        break;
      case LabelKind::malicious:
        if (outcome.family == kExcludedFamily) {
          ++out.excluded;
        } else {
          out.by_family[outcome.family].push_back(std::move(flow));
        }
        break;
      case LabelKind::unlabeled:
        ++out.unlabeled;
        break;
    }
  }
  flows.clear();
}

}  // namespace flowforest
