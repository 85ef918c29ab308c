#include "flowforest/store.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace flowforest {

namespace {

constexpr uint32_t kStoreMagic = 0x46465354u;  // "FFST"
constexpr uint32_t kStoreVersion = 1;

void put_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void put_i32(std::ostream& out, int32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t get_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t get_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
int32_t get_i32(std::istream& in) {
  int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const uint32_t n = get_u32(in);
  if (!in || n > (1u << 24)) throw std::runtime_error("corrupt flow store (string length)");
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

// Columns are written one after another over the whole group.
void put_flow_group(std::ostream& out, const std::vector<RawFlow>& flows) {
  put_u64(out, flows.size());
  for (const auto& f : flows) put_string(out, f.start_time);
  for (const auto& f : flows) put_f64(out, f.duration);
  for (const auto& f : flows) put_string(out, f.protocol);
  for (const auto& f : flows) put_string(out, f.src_addr);
  for (const auto& f : flows) put_string(out, f.src_port);
  for (const auto& f : flows) put_string(out, f.direction);
  for (const auto& f : flows) put_string(out, f.dst_addr);
  for (const auto& f : flows) put_string(out, f.dst_port);
  for (const auto& f : flows) put_string(out, f.conn_state);
  for (const auto& f : flows) put_i32(out, f.src_tos);
  for (const auto& f : flows) put_i32(out, f.dst_tos);
  for (const auto& f : flows) put_u64(out, f.tot_pkts);
  for (const auto& f : flows) put_u64(out, f.tot_bytes);
  for (const auto& f : flows) put_u64(out, f.src_bytes);
  for (const auto& f : flows) put_string(out, f.label_text);
}

std::vector<RawFlow> get_flow_group(std::istream& in) {
  const uint64_t n = get_u64(in);
  if (!in || n > (1ull << 32)) throw std::runtime_error("corrupt flow store (group size)");
  std::vector<RawFlow> flows(n);
  for (auto& f : flows) f.start_time = get_string(in);
  for (auto& f : flows) f.duration = get_f64(in);
  for (auto& f : flows) f.protocol = get_string(in);
  for (auto& f : flows) f.src_addr = get_string(in);
  for (auto& f : flows) f.src_port = get_string(in);
  for (auto& f : flows) f.direction = get_string(in);
  for (auto& f : flows) f.dst_addr = get_string(in);
  for (auto& f : flows) f.dst_port = get_string(in);
  for (auto& f : flows) f.conn_state = get_string(in);
  for (auto& f : flows) f.src_tos = get_i32(in);
  for (auto& f : flows) f.dst_tos = get_i32(in);
  for (auto& f : flows) f.tot_pkts = get_u64(in);
  for (auto& f : flows) f.tot_bytes = get_u64(in);
  for (auto& f : flows) f.src_bytes = get_u64(in);
  for (auto& f : flows) f.label_text = get_string(in);
  if (!in) throw std::runtime_error("truncated flow store");
  return flows;
}

}  // namespace

void FlowStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write flow store: " + path.string());
  put_u32(out, kStoreMagic);
  put_u32(out, kStoreVersion);
  put_u64(out, counts.total_rows);
  put_u64(out, counts.parse_errors);
  put_u64(out, counts.unlabeled);
  put_u64(out, counts.excluded);
  put_flow_group(out, partition.benign);
  put_u32(out, static_cast<uint32_t>(partition.by_family.size()));
  for (const auto& [family, flows] : partition.by_family) {
    put_string(out, family);
    put_flow_group(out, flows);
  }
  if (!out) throw std::runtime_error("flow store write failed: " + path.string());
}

FlowStore FlowStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read flow store: " + path.string());
  if (get_u32(in) != kStoreMagic) throw std::runtime_error("not a flow store: " + path.string());
  if (get_u32(in) != kStoreVersion) throw std::runtime_error("unsupported flow store version");
  FlowStore store;
  store.counts.total_rows = get_u64(in);
  store.counts.parse_errors = get_u64(in);
  store.counts.unlabeled = get_u64(in);
  store.counts.excluded = get_u64(in);
  store.partition.benign = get_flow_group(in);
  store.partition.excluded = store.counts.excluded;
  store.partition.unlabeled = store.counts.unlabeled;
  const uint32_t n_families = get_u32(in);
  for (uint32_t i = 0; i < n_families; ++i) {
    std::string family = get_string(in);
    store.partition.by_family[family] = get_flow_group(in);
  }
  store.counts.benign = store.partition.benign.size();
  for (const auto& [family, flows] : store.partition.by_family) {
    store.counts.per_family[family] = flows.size();
  }
  return store;
}

}  // namespace flowforest
