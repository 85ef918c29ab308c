#include "flowforest/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace flowforest {

namespace {

using nlohmann::json;

MaxFeatures parse_max_features(const json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    return MaxFeatures::exact(j.get<uint32_t>());
  }
  const auto s = j.get<std::string>();
  if (s == "sqrt") return MaxFeatures::sqrt();
  if (s == "half") return MaxFeatures::half();
  if (s == "all") return MaxFeatures::all();
  throw std::runtime_error("bad max_features value: " + s);
}

Criterion parse_criterion(const std::string& s) {
  if (s == "gini") return Criterion::gini;
  if (s == "mse") return Criterion::mse;
  throw std::runtime_error("bad criterion value: " + s);
}

void apply_train_config(const json& j, TrainConfig& config) {
  if (j.contains("n_estimators")) config.n_estimators = j.at("n_estimators").get<uint32_t>();
  if (j.contains("criterion")) config.criterion = parse_criterion(j.at("criterion"));
  if (j.contains("max_features")) config.max_features = parse_max_features(j.at("max_features"));
  if (j.contains("bootstrap")) config.bootstrap = j.at("bootstrap").get<bool>();
  if (j.contains("min_samples_split")) {
    config.min_samples_split = j.at("min_samples_split").get<uint32_t>();
  }
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
    config.max_depth = j.at("max_depth").get<uint32_t>();
  }
}

void require_exists(const std::filesystem::path& path, const char* what) {
  if (!path.empty() && !std::filesystem::exists(path)) {
    throw std::runtime_error(std::string(what) + " not found: " + path.string());
  }
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j = json::parse(in);

  RunConfig config;
  config.models = eval::default_model_configs();

  if (j.contains("seed")) config.seed = j.at("seed").get<uint64_t>();
  if (j.contains("threads")) config.threads = j.at("threads").get<unsigned>();
  if (j.contains("out_dir")) config.out_dir = j.at("out_dir").get<std::string>();

  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("store")) config.data.store = d.at("store").get<std::string>();
    if (d.contains("input_dir")) config.data.input_dir = d.at("input_dir").get<std::string>();
    if (d.contains("scenario_files")) {
      for (const json& entry : d.at("scenario_files")) {
        config.data.scenario_files.emplace_back(entry.at("path").get<std::string>(),
                                                entry.at("scenario").get<int>());
      }
    }
    if (d.contains("scenario_family_map")) {
      config.data.scenario_family_map = d.at("scenario_family_map").get<std::string>();
    }
    if (d.contains("column_schema")) {
      config.data.column_schema = d.at("column_schema").get<std::string>();
    }
  }

  if (j.contains("plan")) {
    const json& p = j.at("plan");
    if (p.contains("benign_ratio")) config.plan.benign_ratio = p.at("benign_ratio").get<double>();
    if (p.contains("train_fraction")) {
      config.plan.train_fraction = p.at("train_fraction").get<double>();
    }
    if (p.contains("families")) {
      config.plan.families = p.at("families").get<std::vector<std::string>>();
    }
  }

  if (j.contains("models")) {
    const json& m = j.at("models");
    if (m.contains("undistilled")) apply_train_config(m.at("undistilled"), config.models.undistilled);
    if (m.contains("condenser")) apply_train_config(m.at("condenser"), config.models.condenser);
    if (m.contains("receiver")) apply_train_config(m.at("receiver"), config.models.receiver);
  }

  if (j.contains("reports")) config.reports = j.at("reports").get<std::vector<std::string>>();

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    if (s.contains("seed")) config.synth.seed = s.at("seed").get<uint64_t>();
    if (s.contains("benign_total")) config.synth.benign_total = s.at("benign_total").get<size_t>();
    if (s.contains("malicious_per_family")) {
      config.synth.malicious_per_family = s.at("malicious_per_family").get<size_t>();
    }
    if (s.contains("sogou_flows")) config.synth.sogou_flows = s.at("sogou_flows").get<size_t>();
    if (s.contains("malformed_rows")) {
      config.synth.malformed_rows = s.at("malformed_rows").get<size_t>();
    }
    if (s.contains("lookalike_rate")) {
      config.synth.lookalike_rate = s.at("lookalike_rate").get<double>();
    }
    if (s.contains("jitter_rate")) config.synth.jitter_rate = s.at("jitter_rate").get<double>();
    if (s.contains("common_port_rate")) {
      config.synth.common_port_rate = s.at("common_port_rate").get<double>();
    }
  }

  // Input files named by the config must already exist; outputs (store,
  // out_dir) are created by the commands.
  for (const auto& [file, scenario] : config.data.scenario_files) {
    require_exists(file, "scenario file");
  }
  require_exists(config.data.scenario_family_map, "scenario-family map");
  require_exists(config.data.column_schema, "column schema remap");
  return config;
}

}  // namespace flowforest
