#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "flowforest/evaluation.hpp"
#include "flowforest/synth.hpp"

// Run configuration: one JSON file drives every command; CLI flags override
// individual keys. Referenced input files are checked when the config is
// loaded.

namespace flowforest {

struct DataConfig {
  std::filesystem::path store;         // ingested flow store (output of `ingest`)
  std::filesystem::path input_dir;     // directory of scenario_<n>.binetflow files
  std::vector<std::pair<std::filesystem::path, int>> scenario_files;  // explicit (path, id)
  std::filesystem::path scenario_family_map;  // key=value file; empty = CTU-13 default
  std::filesystem::path column_schema;        // column remap file; empty = binetflow default
};

struct PlanConfig {
  double benign_ratio = 20.0;
  double train_fraction = 0.8;
  std::vector<std::string> families;  // empty = every family in the store
};

struct RunConfig {
  uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::filesystem::path out_dir = "out";
  DataConfig data;
  PlanConfig plan;
  eval::ModelConfigs models;  // defaults when the config omits them
  std::vector<std::string> reports = {"normal", "grid", "retraining", "removal"};
  synth::SynthConfig synth;

  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace flowforest
