#include "flowforest/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flowforest/kernels.hpp"
#include "flowforest/parallel.hpp"
#include "flowforest/rng.hpp"

namespace flowforest {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

PortType classify_port(std::optional<int> port) {
  if (!port) return PortType::none;
  const int p = *port;
  if (p < 0 || p > 65535) throw std::invalid_argument("port out of range: " + std::to_string(p));
  if (p <= 1023) return PortType::well_known;
  if (p <= 49151) return PortType::registered;
  return PortType::dynamic_private;
}

std::optional<int> parse_port(const std::string& token) {
  if (token.empty()) return std::nullopt;
  int value = 0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  std::from_chars_result res{};
  if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) {
    res = std::from_chars(begin + 2, end, value, 16);
  } else {
    res = std::from_chars(begin, end, value, 10);
  }
  if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  if (value < 0 || value > 65535) return std::nullopt;
  return value;
}

bool is_private_ipv4(const std::string& addr) {
  std::array<int, 4> octets{};
  const char* p = addr.data();
  const char* end = addr.data() + addr.size();
  for (int i = 0; i < 4; ++i) {
    const auto res = std::from_chars(p, end, octets[i]);
    if (res.ec != std::errc{}) return false;
    p = res.ptr;
    if (i < 3) {
      if (p == end || *p != '.') return false;
      ++p;
    }
  }
  if (p != end) return false;
  for (const int o : octets) {
    if (o < 0 || o > 255) return false;
  }
  // RFC1918: 10/8, 172.16/12, 192.168/16.
  if (octets[0] == 10) return true;
  if (octets[0] == 172 && octets[1] >= 16 && octets[1] <= 31) return true;
  if (octets[0] == 192 && octets[1] == 168) return true;
  return false;
}

namespace {

FeatureSchema schema_from_tokens(const std::set<std::string>& protocols,
                                 const std::set<std::string>& states) {
  FeatureSchema schema;
  int code = 1;
  for (const auto& token : protocols) schema.protocol_codes[token] = code++;
  code = 1;
  for (const auto& token : states) schema.state_codes[token] = code++;
  return schema;
}

}  // namespace

FeatureSchema FeatureSchema::build(std::span<const RawFlow> corpus) {
  std::set<std::string> protocols;
  std::set<std::string> states;
  for (const auto& flow : corpus) {
    protocols.insert(lower(flow.protocol));
    states.insert(flow.conn_state);
  }
  return schema_from_tokens(protocols, states);
}

FeatureSchema FeatureSchema::build(const std::vector<std::vector<RawFlow> const*>& groups) {
  std::set<std::string> protocols;
  std::set<std::string> states;
  for (const auto* group : groups) {
    for (const auto& flow : *group) {
      protocols.insert(lower(flow.protocol));
      states.insert(flow.conn_state);
    }
  }
  return schema_from_tokens(protocols, states);
}

int FeatureSchema::protocol_code(const std::string& token) const {
  const auto it = protocol_codes.find(lower(token));
  return it == protocol_codes.end() ? 0 : it->second;
}

int FeatureSchema::state_code(const std::string& token) const {
  const auto it = state_codes.find(token);
  return it == state_codes.end() ? 0 : it->second;
}

std::string FeatureSchema::to_text() const {
  std::ostringstream out;
  out << "# flowforest feature schema\n";
  out << "# code 0 is reserved for unseen tokens\n";
  for (const auto& [token, code] : protocol_codes) out << "protocol." << token << "=" << code << "\n";
  for (const auto& [token, code] : state_codes) out << "state." << token << "=" << code << "\n";
  return out.str();
}

FeatureSchema FeatureSchema::from_text(const std::string& text) {
  FeatureSchema schema;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad schema line: " + line);
    const std::string key = line.substr(0, eq);
    const int code = std::stoi(line.substr(eq + 1));
    if (key.rfind("protocol.", 0) == 0) {
      schema.protocol_codes[key.substr(9)] = code;
    } else if (key.rfind("state.", 0) == 0) {
      schema.state_codes[key.substr(6)] = code;
    } else {
      throw std::runtime_error("unknown schema key: " + key);
    }
  }
  return schema;
}

void FeatureSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write schema file: " + path.string());
  out << to_text();
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read schema file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

uint64_t FeatureSchema::fingerprint() const { return fnv1a64(to_text()); }

const std::array<const char*, feat::kCount>& FeatureSchema::feature_names() {
  static const std::array<const char*, feat::kCount> names = {
      "src_ip_type",   "dst_ip_type",   "src_port",      "dst_port",     "direction",
      "conn_state",    "duration",      "protocol",      "src_tos",      "dst_tos",
      "out_bytes",     "in_bytes",      "tot_pkts",      "tot_bytes",    "src_port_type",
      "dst_port_type", "bytes_per_sec", "bytes_per_pkt", "pkts_per_sec", "byte_ratio"};
  return names;
}

std::span<const size_t> FeatureSchema::mutable_slots() {
  static const size_t slots[] = {feat::kDuration, feat::kOutBytes, feat::kInBytes, feat::kTotPkts};
  return slots;
}

std::span<const size_t> FeatureSchema::dependent_slots() {
  static const size_t slots[] = {feat::kTotBytes, feat::kBytesPerSec, feat::kBytesPerPkt,
                                 feat::kPktsPerSec, feat::kByteRatio};
  return slots;
}

FeatureVector FeatureMatrix::row(size_t r) const {
  FeatureVector v{};
  if (cols_ != feat::kCount) throw std::logic_error("row() requires a 20-column matrix");
  copy_row(r, v.data());
  return v;
}

void FeatureMatrix::set_row(size_t r, std::span<const double> values) {
  for (size_t c = 0; c < cols_; ++c) at(r, c) = values[c];
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const uint32_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (size_t c = 0; c < cols_; ++c) {
    const double* src = col(c);
    double* dst = out.col(c);
    for (size_t i = 0; i < indices.size(); ++i) dst[i] = src[indices[i]];
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_cols(std::span<const size_t> keep) const {
  FeatureMatrix out(rows_, keep.size());
  for (size_t c = 0; c < keep.size(); ++c) {
    const double* src = col(keep[c]);
    std::copy(src, src + rows_, out.col(c));
  }
  return out;
}

void FeatureMatrix::append_rows(const FeatureMatrix& other) {
  if (rows_ == 0 && cols_ == 0) {
    *this = other;
    return;
  }
  if (other.cols_ != cols_) throw std::logic_error("append_rows: column count mismatch");
  FeatureMatrix merged(rows_ + other.rows_, cols_);
  for (size_t c = 0; c < cols_; ++c) {
    const double* a = col(c);
    const double* b = other.col(c);
    double* dst = merged.col(c);
    std::copy(a, a + rows_, dst);
    std::copy(b, b + other.rows_, dst + rows_);
  }
  *this = std::move(merged);
}

void recompute_derived(FeatureVector& v) {
  kern::DerivedCols cols{&v[feat::kDuration], &v[feat::kOutBytes],     &v[feat::kInBytes],
                         &v[feat::kTotPkts],  &v[feat::kTotBytes],     &v[feat::kBytesPerSec],
                         &v[feat::kBytesPerPkt], &v[feat::kPktsPerSec], &v[feat::kByteRatio]};
  kern::recompute_derived(cols, 1);
}

void recompute_derived(FeatureMatrix& m) {
  if (m.cols() != feat::kCount) throw std::logic_error("recompute_derived: 20 columns required");
  kern::DerivedCols cols{m.col(feat::kDuration),    m.col(feat::kOutBytes),
                         m.col(feat::kInBytes),     m.col(feat::kTotPkts),
                         m.col(feat::kTotBytes),    m.col(feat::kBytesPerSec),
                         m.col(feat::kBytesPerPkt), m.col(feat::kPktsPerSec),
                         m.col(feat::kByteRatio)};
  kern::recompute_derived(cols, m.rows());
}

FeatureVector FeatureExtractor::extract(const RawFlow& flow) const {
  FeatureVector v{};
  v[feat::kSrcIpType] = is_private_ipv4(flow.src_addr) ? 1.0 : 0.0;
  v[feat::kDstIpType] = is_private_ipv4(flow.dst_addr) ? 1.0 : 0.0;

  const auto sport = parse_port(flow.src_port);
  const auto dport = parse_port(flow.dst_port);
  v[feat::kSrcPort] = sport ? static_cast<double>(*sport) : kNoPort;
  v[feat::kDstPort] = dport ? static_cast<double>(*dport) : kNoPort;
  v[feat::kSrcPortType] = static_cast<double>(static_cast<int>(classify_port(sport)));
  v[feat::kDstPortType] = static_cast<double>(static_cast<int>(classify_port(dport)));

  v[feat::kDirection] = flow.direction.find("->") != std::string::npos ? 1.0 : 0.0;

  const int state = schema_.state_code(flow.conn_state);
  const int proto = schema_.protocol_code(flow.protocol);
  if (state == 0 || proto == 0) warnings_.fetch_add(1, std::memory_order_relaxed);
  v[feat::kConnState] = static_cast<double>(state);
  v[feat::kProtocol] = static_cast<double>(proto);

  v[feat::kDuration] = flow.duration;
  v[feat::kSrcTos] = static_cast<double>(flow.src_tos);
  v[feat::kDstTos] = static_cast<double>(flow.dst_tos);
  v[feat::kOutBytes] = static_cast<double>(flow.src_bytes);
  v[feat::kInBytes] = static_cast<double>(flow.dst_bytes());
  v[feat::kTotPkts] = static_cast<double>(flow.tot_pkts);

  recompute_derived(v);
  return v;
}

FeatureMatrix FeatureExtractor::extract_all(std::span<const RawFlow> flows,
                                            unsigned threads) const {
  FeatureMatrix m(flows.size(), feat::kCount);
  parallel_for(0, flows.size(), threads, [&](size_t i) {
    const FeatureVector v = extract(flows[i]);
    m.set_row(i, v);
  });
  return m;
}

}  // namespace flowforest
