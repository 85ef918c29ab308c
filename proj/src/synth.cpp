#include "flowforest/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "flowforest/rng.hpp"

namespace flowforest::synth {

namespace {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  // Log-uniform draw; collapses to the constant when lo == hi.
  double draw(Rng& rng) const {
    if (lo >= hi) return lo;
    const double floor_lo = std::max(lo, 1e-6);
    return std::exp(rng.uniform(std::log(floor_lo), std::log(hi)));
  }
};

struct Volumes {
  Band duration;
  Band src_bytes;
  Band dst_bytes;
  Band bytes_per_pkt;
};

struct Cell {
  const char* proto;
  int dst_port;      // -1 = ephemeral
  const char* state;
  const char* dir;
};

struct FamilyModel {
  int scenario;
  const char* family;
  Cell cell;
  Volumes core;    // beacon-like cluster the detector keys on
  Volumes jitter;  // broadened overlap band between core and benign volumes
};

// Small, short flows per family; every core duration stays far below the
// in-cell benign band so even the +120 s step keeps altered samples inside
// benign territory rather than beyond it.
const std::array<FamilyModel, 6> kFamilies = {{
    {1, "Neris", {"tcp", 6667, "SPA_SPA", "->"},
     {{0.3, 3.0}, {150, 600}, {100, 500}, {50, 150}},
     {{1.0, 130.0}, {300, 2500}, {250, 4000}, {40, 300}}},
    {3, "Rbot", {"tcp", 3337, "S_RA", "->"},
     {{0.05, 1.2}, {90, 350}, {60, 280}, {45, 120}},
     {{0.5, 130.0}, {200, 2000}, {150, 3000}, {40, 250}}},
    {5, "Virut", {"tcp", 5050, "SPA_SPA", "->"},
     {{0.8, 6.0}, {250, 900}, {180, 700}, {60, 160}},
     {{2.0, 130.0}, {400, 3000}, {300, 5000}, {50, 320}}},
    {6, "Menti", {"tcp", 7700, "SPA_SPA", "->"},
     {{0.2, 2.0}, {120, 500}, {90, 380}, {50, 140}},
     {{1.0, 130.0}, {250, 2200}, {200, 3500}, {40, 280}}},
    {8, "Murlo", {"tcp", 8081, "SPA_SPA", "->"},
     {{1.5, 10.0}, {350, 1400}, {250, 1000}, {70, 180}},
     {{3.0, 140.0}, {500, 3500}, {400, 5500}, {50, 350}}},
    {12, "NSIS.ay", {"udp", 16464, "CON", "<->"},
     {{0.05, 0.9}, {100, 420}, {70, 340}, {55, 130}},
     {{0.5, 130.0}, {250, 2000}, {150, 3000}, {40, 260}}},
}};

// Benign volume band emitted inside family cells: exactly the region the
// increment steps push the malicious clusters into.
const Volumes kInCellBenign = {{1.0, 200.0}, {200, 4000}, {150, 8000}, {30, 600}};

struct BenignComponent {
  double weight;
  Cell cell;
  Volumes volumes;
};

const std::array<BenignComponent, 10> kBenignComponents = {{
    {0.24, {"udp", 53, "CON", "<->"}, {{0.0005, 0.3}, {60, 200}, {90, 500}, {50, 120}}},
    {0.20, {"tcp", 443, "FSPA_FSPA", "->"}, {{0.5, 60}, {400, 8000}, {1500, 300000}, {400, 1200}}},
    {0.14, {"tcp", 80, "FSPA_FSPA", "->"}, {{0.3, 40}, {300, 4000}, {800, 120000}, {350, 1000}}},
    {0.06, {"tcp", 443, "FSPA_FSPA", "->"}, {{20, 600}, {2000, 30000}, {100000, 20000000}, {900, 1400}}},
    {0.04, {"tcp", 22, "FSPA_FSPA", "->"}, {{30, 2000}, {1000, 50000}, {1000, 80000}, {80, 400}}},
    {0.05, {"tcp", 25, "FSPA_FSPA", "->"}, {{0.5, 20}, {500, 50000}, {300, 2000}, {300, 900}}},
    {0.07, {"udp", -1, "CON", "<->"}, {{0.5, 120}, {100, 5000}, {100, 5000}, {100, 800}}},
    {0.04, {"udp", 123, "CON", "<->"}, {{0.0, 0.05}, {76, 76}, {76, 96}, {76, 90}}},
    {0.04, {"icmp", 0, "ECO", "->"}, {{0.0, 0.0}, {64, 512}, {0, 0}, {64, 64}}},
    {0.04, {"tcp", -2, "S_RA", "->"}, {{0.0, 5.0}, {40, 300}, {0, 300}, {40, 90}}},
}};
// dst_port conventions above: -1 ephemeral, -2 uniform random port, 0 none
// (icmp rows carry hex type/code tokens instead).

// Bot beacons are near-identical flows: each family gets a handful of exact
// volumetric templates, a few fixed bot hosts and reused source ports, and
// core samples deviate from a template only by a byte or two. The resulting
// spikes are what the detectors memorize; benign lookalike copies of the
// same templates turn them into genuinely mixed micro-clusters.
struct BeaconTemplate {
  double duration;
  uint64_t src_bytes;
  uint64_t dst_bytes;
  uint64_t pkts;
};

struct FamilyBeacons {
  std::vector<BeaconTemplate> templates;
  std::vector<std::string> src_ports;  // bots bind a handful of sockets
  std::vector<std::string> bot_hosts;
};

FamilyBeacons make_beacons(Rng& rng, const Volumes& core) {
  FamilyBeacons beacons;
  beacons.templates.resize(4);
  for (auto& t : beacons.templates) {
    t.duration = std::round(core.duration.draw(rng) * 100.0) / 100.0;
    t.src_bytes = static_cast<uint64_t>(std::llround(core.src_bytes.draw(rng)));
    t.dst_bytes = static_cast<uint64_t>(std::llround(core.dst_bytes.draw(rng)));
    const double bpp = core.bytes_per_pkt.draw(rng);
    t.pkts = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::llround(static_cast<double>(t.src_bytes + t.dst_bytes) / bpp)));
  }
  for (int i = 0; i < 4; ++i) {
    beacons.src_ports.push_back(std::to_string(1024 + rng.below(64512)));
  }
  for (int i = 0; i < 3; ++i) {
    beacons.bot_hosts.push_back("147.32.84." + std::to_string(2 + rng.below(250)));
  }
  return beacons;
}

struct FlowRow {
  std::string start_time;
  double duration;
  const char* proto;
  std::string src_addr;
  std::string src_port;
  const char* dir;
  std::string dst_addr;
  std::string dst_port;
  const char* state;
  std::string s_tos;
  std::string d_tos;
  uint64_t tot_pkts;
  uint64_t tot_bytes;
  uint64_t src_bytes;
  std::string label;
};

std::string format_duration(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", d);
  return buf;
}

std::string make_timestamp(uint64_t index) {
  const uint64_t micros = index * 1337 % 1000000;
  const uint64_t seconds = 9 * 3600 + index % 14000;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "2011/08/10 %02llu:%02llu:%02llu.%06llu",
                static_cast<unsigned long long>(seconds / 3600),
                static_cast<unsigned long long>(seconds / 60 % 60),
                static_cast<unsigned long long>(seconds % 60),
                static_cast<unsigned long long>(micros));
  return buf;
}

std::string internal_addr(Rng& rng) {
  // Mostly the public university subnet, some private homes for feature
  // variety.
  if (rng.unit() < 0.15) {
    return "192.168." + std::to_string(rng.below(8)) + "." + std::to_string(2 + rng.below(250));
  }
  return "147.32.84." + std::to_string(2 + rng.below(250));
}

std::string external_addr(Rng& rng) {
  const std::array<int, 6> first = {64, 93, 130, 173, 200, 209};
  return std::to_string(first[rng.below(first.size())]) + "." + std::to_string(rng.below(256)) +
         "." + std::to_string(rng.below(256)) + "." + std::to_string(1 + rng.below(254));
}

std::string ephemeral_port(Rng& rng) { return std::to_string(1024 + rng.below(64512)); }

FlowRow draw_flow(Rng& rng, const Cell& cell, const Volumes& volumes, uint64_t index,
                  std::string label) {
  FlowRow row;
  row.start_time = make_timestamp(index);
  row.duration = volumes.duration.hi == 0.0 ? 0.0 : volumes.duration.draw(rng);
  if (row.duration < 0.002) row.duration = rng.unit() < 0.4 ? 0.0 : row.duration;
  row.proto = cell.proto;
  row.dir = cell.dir;
  row.state = cell.state;
  row.src_addr = internal_addr(rng);
  row.dst_addr = external_addr(rng);

  if (std::string_view(cell.proto) == "icmp") {
    row.src_port = rng.unit() < 0.5 ? "0x0008" : "0x0000";
    row.dst_port = "0x" + std::to_string(rng.below(2)) + "303";
  } else {
    row.src_port = ephemeral_port(rng);
    if (cell.dst_port == -1) {
      row.dst_port = ephemeral_port(rng);
    } else if (cell.dst_port == -2) {
      row.dst_port = std::to_string(1 + rng.below(65535));
    } else {
      row.dst_port = std::to_string(cell.dst_port);
    }
  }

  const double src_b = volumes.src_bytes.draw(rng);
  const double dst_b = volumes.dst_bytes.hi == 0.0 ? 0.0 : volumes.dst_bytes.draw(rng);
  const double bpp = volumes.bytes_per_pkt.draw(rng);
  row.src_bytes = static_cast<uint64_t>(std::llround(src_b));
  const auto dst_bytes = static_cast<uint64_t>(std::llround(dst_b));
  row.tot_bytes = row.src_bytes + dst_bytes;
  row.tot_pkts = std::max<uint64_t>(
      1, static_cast<uint64_t>(std::llround(static_cast<double>(row.tot_bytes) / bpp)));

  // Argus leaves ToS blank now and then.
  row.s_tos = rng.unit() < 0.05 ? "" : "0";
  row.d_tos = rng.unit() < 0.08 ? "" : "0";
  row.label = std::move(label);
  return row;
}

FlowRow draw_beacon_flow(Rng& rng, const Cell& cell, const BeaconTemplate& t, uint64_t index,
                         std::string label) {
  FlowRow row;
  row.start_time = make_timestamp(index);
  row.duration = t.duration + 0.01 * static_cast<double>(rng.below(5));
  row.proto = cell.proto;
  row.dir = cell.dir;
  row.state = cell.state;
  row.src_addr = internal_addr(rng);
  row.dst_addr = external_addr(rng);
  row.src_port = ephemeral_port(rng);
  row.dst_port = std::to_string(cell.dst_port);
  row.src_bytes = t.src_bytes + rng.below(4);
  const uint64_t dst_bytes = t.dst_bytes + rng.below(4);
  row.tot_bytes = row.src_bytes + dst_bytes;
  row.tot_pkts = t.pkts + (rng.unit() < 0.2 ? rng.below(2) : 0);
  row.s_tos = "0";
  row.d_tos = rng.unit() < 0.05 ? "" : "0";
  row.label = std::move(label);
  return row;
}

void write_row(std::ofstream& out, const FlowRow& r) {
  out << r.start_time << ',' << format_duration(r.duration) << ',' << r.proto << ',' << r.src_addr
      << ',' << r.src_port << ',' << r.dir << ',' << r.dst_addr << ',' << r.dst_port << ','
      << r.state << ',' << r.s_tos << ',' << r.d_tos << ',' << r.tot_pkts << ',' << r.tot_bytes
      << ',' << r.src_bytes << ',' << r.label << '\n';
}

std::string benign_label(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return "flow=Background-TCP-Established";
    case 1: return "flow=Background-UDP-Established";
    case 2: return "flow=To-Background-CVUT-Proxy";
    default: return "flow=Normal-V42-HTTP";
  }
}

size_t pick_benign_component(Rng& rng, double non_lookalike_scale) {
  const double u = rng.unit() * non_lookalike_scale;
  double acc = 0.0;
  for (size_t i = 0; i < kBenignComponents.size(); ++i) {
    acc += kBenignComponents[i].weight;
    if (u < acc) return i;
  }
  return kBenignComponents.size() - 1;
}

}  // namespace

const std::vector<std::pair<int, std::string>>& synthetic_scenarios() {
  static const std::vector<std::pair<int, std::string>> scenarios = {
      {1, "Neris"}, {3, "Rbot"}, {5, "Virut"}, {6, "Menti"}, {8, "Murlo"}, {12, "NSIS.ay"}};
  return scenarios;
}

SynthOutputs write_synthetic_corpus(const SynthConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SynthOutputs outputs;
  Rng rng(derive_seed(config.seed, "synth-corpus"));
  uint64_t flow_index = 0;

  const char* header =
      "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,TotBytes,"
      "SrcBytes,Label";

  const size_t benign_per_scenario = config.benign_total / kFamilies.size();
  double total_weight = 0.0;
  for (const auto& c : kBenignComponents) total_weight += c.weight;

  for (size_t fam_idx = 0; fam_idx < kFamilies.size(); ++fam_idx) {
    const FamilyModel& fam = kFamilies[fam_idx];
    const auto path = dir / ("scenario_" + std::to_string(fam.scenario) + ".binetflow");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header << '\n';

    size_t benign_count = benign_per_scenario;
    if (fam_idx == kFamilies.size() - 1) {
      benign_count += config.benign_total - benign_per_scenario * kFamilies.size();
    }
    for (size_t i = 0; i < benign_count; ++i) {
      FlowRow row;
      if (rng.unit() < config.lookalike_rate) {
        // Lookalike: same categorical cell as one of the families, ordinary
        // mid-range volumes.
        const FamilyModel& target = kFamilies[rng.below(kFamilies.size())];
        row = draw_flow(rng, target.cell, kInCellBenign, flow_index++, benign_label(rng));
      } else {
        const size_t c = pick_benign_component(rng, total_weight);
        row = draw_flow(rng, kBenignComponents[c].cell, kBenignComponents[c].volumes,
                        flow_index++, benign_label(rng));
      }
      write_row(out, row);
    }

    const std::string mal_label =
        "flow=From-Botnet-V" + std::to_string(fam.scenario) + "-TCP-CC102";
    const auto templates = make_templates(rng, fam.core, 4);
    for (size_t i = 0; i < config.malicious_per_family; ++i) {
      const double u = rng.unit();
      FlowRow row;
      if (u < config.jitter_rate) {
        row = draw_flow(rng, fam.cell, fam.jitter, flow_index++, mal_label);
      } else if (u < config.jitter_rate + config.common_port_rate) {
        const Cell common{"tcp", rng.unit() < 0.5 ? 80 : 443, "FSPA_FSPA", "->"};
        row = draw_beacon_flow(rng, common, templates[rng.below(templates.size())],
                               flow_index++, mal_label);
      } else {
        row = draw_beacon_flow(rng, fam.cell, templates[rng.below(templates.size())],
                               flow_index++, mal_label);
      }
      write_row(out, row);
    }

    if (config.malformed_rows > 0 && fam_idx == 0) {
      // Rows whose SrcBytes exceeds TotBytes; the parser must report, not
      // drop them silently.
      for (size_t i = 0; i < config.malformed_rows; ++i) {
        out << make_timestamp(flow_index++) << ",1.0,tcp,147.32.84.5,1025,->,93.1.2.3,80,"
            << "FSPA_FSPA,0,0,4,100,400,flow=Background-TCP-Established\n";
      }
    }

    outputs.scenario_files.emplace_back(fam.scenario, path);
  }

  if (config.sogou_flows > 0) {
    const auto path = dir / "scenario_7.binetflow";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header << '\n';
    const Cell sogou_cell{"tcp", 3128, "SPA_SPA", "->"};
    const Volumes sogou_vol = {{0.1, 2.0}, {100, 400}, {80, 350}, {50, 130}};
    for (size_t i = 0; i < config.sogou_flows; ++i) {
      write_row(out, draw_flow(rng, sogou_cell, sogou_vol, flow_index++,
                               "flow=From-Botnet-V47-TCP-CC"));
    }
    for (size_t i = 0; i < config.sogou_flows; ++i) {
      const size_t c = pick_benign_component(rng, total_weight);
      write_row(out, draw_flow(rng, kBenignComponents[c].cell, kBenignComponents[c].volumes,
                               flow_index++, benign_label(rng)));
    }
    outputs.scenario_files.emplace_back(7, path);
  }

  return outputs;
}

}  // namespace flowforest::synth
