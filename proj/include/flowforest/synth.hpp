#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

// Synthetic binetflow corpus generator. Produces separable-plus-noise flow
// populations: each botnet family lives in a small-volume cluster behind a
// characteristic (protocol, port, state) cell, while benign traffic mixes
// common services with a slice of in-cell "lookalike" flows whose volumes sit
// exactly where additive perturbations push the malicious clusters.

namespace flowforest::synth {

struct SynthConfig {
  uint64_t seed = 20110810;
  size_t benign_total = 42000;        // spread across the six family scenarios
  size_t malicious_per_family = 800;
  size_t sogou_flows = 50;            // excluded-family traffic (scenario 7)
  size_t malformed_rows = 0;          // rows violating the byte invariant

  // Mixture knobs.
  double lookalike_rate = 0.12;       // benign share emitted inside family cells
  double jitter_rate = 0.10;          // malicious share with broadened volumes
  double common_port_rate = 0.20;     // malicious share on ordinary web ports
};

struct SynthOutputs {
  // (scenario id, csv path), in emission order.
  std::vector<std::pair<int, std::filesystem::path>> scenario_files;
};

/// Families emitted by the generator, with their scenario ids.
const std::vector<std::pair<int, std::string>>& synthetic_scenarios();

/// Writes one binetflow CSV per scenario under dir. Deterministic for a
/// fixed config.
SynthOutputs write_synthetic_corpus(const SynthConfig& config, const std::filesystem::path& dir);

}  // namespace flowforest::synth
