#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowforest/adversarial.hpp"
#include "flowforest/config.hpp"
#include "flowforest/distill.hpp"
#include "flowforest/evaluation.hpp"
#include "flowforest/flow.hpp"
#include "flowforest/parallel.hpp"
#include "flowforest/report.hpp"
#include "flowforest/rng.hpp"
#include "flowforest/store.hpp"
#include "flowforest/synth.hpp"

namespace fs = std::filesystem;
using namespace flowforest;

namespace {

/// Missing inputs exit with code 2 and name the paths.
struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Paths {
  fs::path out_dir;
  fs::path store;
  fs::path schema;
  fs::path models;
  fs::path adversarial;
  fs::path reports;
  fs::path synth;

  static Paths from(const RunConfig& config) {
    Paths p;
    p.out_dir = config.out_dir;
    p.store = config.data.store.empty() ? config.out_dir / "flows.store" : config.data.store;
    p.schema = config.out_dir / "feature_schema.txt";
    p.models = config.out_dir / "models";
    p.adversarial = config.out_dir / "adversarial";
    p.reports = config.out_dir / "reports";
    p.synth = config.out_dir / "synth";
    return p;
  }

  fs::path undistilled_model(const std::string& family) const {
    return models / (family + ".undistilled.ffm");
  }
  fs::path distilled_model(const std::string& family) const {
    return models / (family + ".distilled.ffm");
  }
  fs::path adversarial_csv(const std::string& family, const std::string& group,
                           const std::string& step) const {
    return adversarial / family / (group + "_" + step + ".csv");
  }
};

std::vector<std::pair<fs::path, int>> resolve_scenario_files(const RunConfig& config,
                                                             const Paths& paths) {
  std::vector<std::pair<fs::path, int>> files = config.data.scenario_files;
  fs::path dir = config.data.input_dir;
  if (dir.empty() && files.empty()) dir = paths.synth;  // default to the bundled generator output
  if (!dir.empty()) {
    if (!fs::exists(dir)) throw MissingInput("input directory not found: " + dir.string());
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".binetflow") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    for (const auto& file : found) {
      const std::string stem = file.stem().string();
      const auto underscore = stem.rfind('_');
      if (underscore == std::string::npos) continue;
      files.emplace_back(file, std::stoi(stem.substr(underscore + 1)));
    }
  }
  if (files.empty()) throw MissingInput("no scenario files configured or found");
  for (const auto& [file, scenario] : files) {
    if (!fs::exists(file)) throw MissingInput("scenario file not found: " + file.string());
  }
  return files;
}

std::vector<std::string> selected_families(const RunConfig& config, const FlowStore& store) {
  if (!config.plan.families.empty()) {
    for (const auto& family : config.plan.families) {
      if (store.partition.by_family.find(family) == store.partition.by_family.end()) {
        throw MissingInput("family not present in store: " + family);
      }
    }
    return config.plan.families;
  }
  std::vector<std::string> families;
  for (const auto& [family, flows] : store.partition.by_family) families.push_back(family);
  return families;
}

eval::ExperimentPlan family_plan(const RunConfig& config, const std::string& family) {
  eval::ExperimentPlan plan;
  plan.family = family;
  plan.benign_ratio = config.plan.benign_ratio;
  plan.train_fraction = config.plan.train_fraction;
  plan.seed = derive_seed(config.seed, family);
  return plan;
}

struct CorpusFeatures {
  FeatureSchema schema;
  uint64_t fingerprint = 0;
  FeatureMatrix benign;
  std::map<std::string, FeatureMatrix> malicious;
};

CorpusFeatures extract_corpus(const FlowStore& store, const FeatureSchema& schema,
                              unsigned threads) {
  CorpusFeatures corpus;
  corpus.schema = schema;
  corpus.fingerprint = schema.fingerprint();
  FeatureExtractor extractor(schema);
  corpus.benign = extractor.extract_all(store.partition.benign, threads);
  for (const auto& [family, flows] : store.partition.by_family) {
    corpus.malicious[family] = extractor.extract_all(flows, threads);
  }
  return corpus;
}

int cmd_synth(const RunConfig& config) {
  const Paths paths = Paths::from(config);
  synth::SynthConfig synth_config = config.synth;
  const auto outputs = synth::write_synthetic_corpus(synth_config, paths.synth);
  std::cout << "wrote " << outputs.scenario_files.size() << " scenario files under "
            << paths.synth.string() << "\n";
  return 0;
}

int cmd_ingest(const RunConfig& config) {
  const Paths paths = Paths::from(config);
  const auto files = resolve_scenario_files(config, paths);

  const ColumnSchema columns = config.data.column_schema.empty()
                                   ? ColumnSchema{}
                                   : ColumnSchema::load(config.data.column_schema);
  const FamilyMap family_map = config.data.scenario_family_map.empty()
                                   ? FamilyMap::default_ctu13()
                                   : FamilyMap::load(config.data.scenario_family_map);

  // Independent files parse concurrently; merging stays in file order.
  std::vector<ParseResult> parsed(files.size());
  parallel_for(0, files.size(), config.threads,
               [&](size_t i) { parsed[i] = parse_flow_file(files[i].first, columns); });

  FlowStore store;
  nlohmann::json file_reports = nlohmann::json::array();
  for (size_t i = 0; i < files.size(); ++i) {
    const auto& [file, scenario] = files[i];
    auto& result = parsed[i];
    store.counts.total_rows += result.total_rows;
    store.counts.parse_errors += result.errors.size();
    nlohmann::json fr;
    fr["path"] = file.string();
    fr["scenario"] = scenario;
    fr["rows"] = result.total_rows;
    fr["parsed"] = result.flows.size();
    fr["errors"] = nlohmann::json::array();
    for (size_t e = 0; e < result.errors.size() && e < 100; ++e) {
      fr["errors"].push_back({{"line", result.errors[e].line},
                              {"message", result.errors[e].message}});
    }
    file_reports.push_back(std::move(fr));
    label_into_partition(std::move(result.flows), family_map.family_for(scenario),
                         store.partition);
  }
  store.counts.benign = store.partition.benign.size();
  store.counts.unlabeled = store.partition.unlabeled;
  store.counts.excluded = store.partition.excluded;
  for (const auto& [family, flows] : store.partition.by_family) {
    store.counts.per_family[family] = flows.size();
  }

  fs::create_directories(paths.out_dir);
  store.save(paths.store);

  std::vector<std::vector<RawFlow> const*> groups;
  groups.push_back(&store.partition.benign);
  for (const auto& [family, flows] : store.partition.by_family) groups.push_back(&flows);
  const FeatureSchema schema = FeatureSchema::build(groups);
  schema.save(paths.schema);

  nlohmann::json report;
  report["total_rows"] = store.counts.total_rows;
  report["parse_errors"] = store.counts.parse_errors;
  report["unlabeled"] = store.counts.unlabeled;
  report["excluded"] = store.counts.excluded;
  report["benign"] = store.counts.benign;
  report["per_family"] = store.counts.per_family;
  report["files"] = std::move(file_reports);
  std::ofstream report_out(paths.out_dir / "ingest_report.json", std::ios::binary);
  report_out << report.dump(2) << "\n";

  std::cout << "ingested " << store.counts.total_rows << " rows: " << store.counts.benign
            << " benign, ";
  size_t malicious = 0;
  for (const auto& [family, count] : store.counts.per_family) malicious += count;
  std::cout << malicious << " malicious across " << store.counts.per_family.size()
            << " families, " << store.counts.excluded << " excluded, "
            << store.counts.parse_errors << " parse errors\n";
  return 0;
}

void require_store(const Paths& paths) {
  if (!fs::exists(paths.store)) {
    throw MissingInput("flow store not found (run `ingest` first): " + paths.store.string());
  }
  if (!fs::exists(paths.schema)) {
    throw MissingInput("feature schema not found (run `ingest` first): " + paths.schema.string());
  }
}

int cmd_train(const RunConfig& config, const std::string& mode) {
  const Paths paths = Paths::from(config);
  require_store(paths);
  const FlowStore store = FlowStore::load(paths.store);
  const FeatureSchema schema = FeatureSchema::load(paths.schema);
  const auto families = selected_families(config, store);
  const CorpusFeatures corpus = extract_corpus(store, schema, config.threads);

  fs::create_directories(paths.models);
  fs::create_directories(paths.reports);

  std::vector<report::TimingRow> timings;
  for (const auto& family : families) {
    const auto plan = family_plan(config, family);
    try {
      const eval::FamilyExperiment experiment =
          eval::run_family_training(corpus.benign, corpus.malicious.at(family), plan,
                                    config.models, corpus.fingerprint, config.threads);
      if (mode == "undistilled" || mode == "both") {
        std::ofstream out(paths.undistilled_model(family), std::ios::binary);
        experiment.undistilled.save(out);
        timings.push_back({family, "Undistilled", experiment.timings.undistilled_seconds});
      }
      if (mode == "distilled" || mode == "both") {
        std::ofstream out(paths.distilled_model(family), std::ios::binary);
        experiment.distilled.save(out);
        timings.push_back({family, "Distilled", experiment.timings.distilled_seconds});
      }
      std::cout << "trained " << family << " (undistilled "
                << experiment.timings.undistilled_seconds << " s, distilled "
                << experiment.timings.distilled_seconds << " s)\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "warning: skipping family " << family << ": " << e.what() << "\n";
    }
  }
  report::write_timings_csv(paths.reports / "training_times.csv", timings);
  return 0;
}

int cmd_adv_gen(const RunConfig& config, std::vector<std::string> families_filter,
                std::vector<std::string> groups_filter, std::vector<std::string> steps_filter) {
  const Paths paths = Paths::from(config);
  require_store(paths);
  const FlowStore store = FlowStore::load(paths.store);
  const FeatureSchema schema = FeatureSchema::load(paths.schema);
  auto families = families_filter.empty() ? selected_families(config, store) : families_filter;
  const CorpusFeatures corpus = extract_corpus(store, schema, config.threads);

  auto group_selected = [&](const std::string& id) {
    return groups_filter.empty() ||
           std::find(groups_filter.begin(), groups_filter.end(), id) != groups_filter.end();
  };
  auto step_selected = [&](const std::string& id) {
    return steps_filter.empty() ||
           std::find(steps_filter.begin(), steps_filter.end(), id) != steps_filter.end();
  };

  size_t written = 0;
  for (const auto& family : families) {
    const auto it = corpus.malicious.find(family);
    if (it == corpus.malicious.end()) throw MissingInput("family not in store: " + family);
    const auto plan = family_plan(config, family);
    const eval::TrainingSets sets = eval::build_training_sets(corpus.benign, it->second, plan);
    const FeatureMatrix test_malicious = sets.test_malicious_matrix();
    fs::create_directories(paths.adversarial / family);
    for (const auto& group : adversarial::feature_groups()) {
      if (!group_selected(group.id)) continue;
      for (const auto& step : adversarial::increment_steps()) {
        if (!step_selected(step.id)) continue;
        const auto dataset = adversarial::create_dataset(test_malicious, family, group, step);
        adversarial::save_dataset(dataset, paths.adversarial_csv(family, group.id, step.id));
        ++written;
      }
    }
  }
  std::cout << "wrote " << written << " adversarial datasets under "
            << paths.adversarial.string() << "\n";
  return 0;
}

bool report_requested(const std::vector<std::string>& reports, const std::string& name) {
  return std::find(reports.begin(), reports.end(), name) != reports.end();
}

int cmd_evaluate(const RunConfig& config, std::vector<std::string> reports_filter) {
  const Paths paths = Paths::from(config);
  const auto reports = reports_filter.empty() ? config.reports : reports_filter;
  const bool want_normal = report_requested(reports, "normal");
  const bool want_grid = report_requested(reports, "grid");
  const bool want_retraining = report_requested(reports, "retraining");
  const bool want_removal = report_requested(reports, "removal");
  const bool need_grid_cells = want_grid || want_retraining;

  // Enumerate every missing input before any work starts.
  std::vector<std::string> missing;
  if (!fs::exists(paths.store)) missing.push_back(paths.store.string());
  if (!fs::exists(paths.schema)) missing.push_back(paths.schema.string());

  FlowStore store;
  std::vector<std::string> families;
  if (missing.empty()) {
    store = FlowStore::load(paths.store);
    families = selected_families(config, store);
    for (const auto& family : families) {
      if (!fs::exists(paths.undistilled_model(family))) {
        missing.push_back(paths.undistilled_model(family).string());
      }
      if (!fs::exists(paths.distilled_model(family))) {
        missing.push_back(paths.distilled_model(family).string());
      }
      if (need_grid_cells) {
        for (const auto& group : adversarial::feature_groups()) {
          for (const auto& step : adversarial::increment_steps()) {
            const auto csv = paths.adversarial_csv(family, group.id, step.id);
            if (!fs::exists(csv)) missing.push_back(csv.string());
          }
        }
      }
    }
  }
  if (!missing.empty()) {
    std::string message = "missing inputs:";
    for (const auto& m : missing) message += "\n  " + m;
    throw MissingInput(message);
  }

  const FeatureSchema schema = FeatureSchema::load(paths.schema);
  const CorpusFeatures corpus = extract_corpus(store, schema, config.threads);
  fs::create_directories(paths.reports);

  std::vector<eval::NormalRow> normal_rows;
  std::vector<eval::GridCell> grid_cells;
  std::vector<report::RetrainingRow> retraining_rows;
  std::vector<report::RemovalRow> removal_rows;

  struct BaselineAcc {
    double sum_recall_normal = 0.0;
    std::optional<double> sum_p, sum_r, sum_f;
    size_t n = 0;
  };
  std::map<std::string, BaselineAcc> removal_acc;  // keyed by detector type
  std::map<std::string, double> retrain_normal_recall_sum;
  size_t n_families_done = 0;

  for (const auto& family : families) {
    const auto plan = family_plan(config, family);
    const eval::TrainingSets sets =
        eval::build_training_sets(corpus.benign, corpus.malicious.at(family), plan);

    std::ifstream und_in(paths.undistilled_model(family), std::ios::binary);
    Forest undistilled = Forest::load(und_in);
    undistilled.expect_fingerprint(corpus.fingerprint);
    std::ifstream dis_in(paths.distilled_model(family), std::ios::binary);
    distill::DistilledDetector distilled = distill::DistilledDetector::load(dis_in);
    distilled.receiver.expect_fingerprint(corpus.fingerprint);

    eval::FamilyExperiment experiment;
    experiment.family = family;
    experiment.sets = sets;
    experiment.undistilled = std::move(undistilled);
    experiment.distilled = std::move(distilled);

    const FeatureMatrix test_x = experiment.sets.test_matrix();
    const std::vector<uint8_t> test_y = experiment.sets.test_labels();

    const eval::DetectorRef undistilled_ref{"Undistilled", &experiment.undistilled, nullptr};
    const eval::DetectorRef distilled_ref{"Distilled", nullptr, &experiment.distilled};

    if (want_normal || want_retraining || want_removal) {
      normal_rows.push_back(
          {family, "Undistilled",
           eval::evaluate_detector(undistilled_ref, test_x, test_y, config.threads)});
      normal_rows.push_back(
          {family, "Distilled",
           eval::evaluate_detector(distilled_ref, test_x, test_y, config.threads)});
    }

    std::vector<adversarial::AdversarialDataset> datasets;
    if (need_grid_cells) {
      for (const auto& group : adversarial::feature_groups()) {
        for (const auto& step : adversarial::increment_steps()) {
          datasets.push_back(
              adversarial::load_dataset(paths.adversarial_csv(family, group.id, step.id)));
        }
      }
    }

    eval::RetrainingResult retraining;
    eval::FeatureRemovalResult removal;
    std::vector<eval::DetectorRef> grid_detectors = {undistilled_ref, distilled_ref};

    if (want_retraining) {
      TrainConfig base = config.models.undistilled;
      base.rng_seed = derive_seed(plan.seed, "undistilled");
      retraining = eval::adversarial_retraining_baseline(experiment, datasets, base,
                                                         config.threads);
      grid_detectors.push_back({"Retrained", &retraining.model, nullptr});
      retrain_normal_recall_sum["Retrained"] += retraining.normal.recall.value_or(0.0);
    }

    if (want_removal) {
      TrainConfig base = config.models.undistilled;
      base.rng_seed = derive_seed(plan.seed, "undistilled");
      removal = eval::feature_removal_baseline(experiment, base, config.threads);
      auto& acc = removal_acc["Undistilled (feature removal)"];
      acc.sum_p = acc.sum_p.value_or(0.0) + removal.normal.precision.value_or(0.0);
      acc.sum_r = acc.sum_r.value_or(0.0) + removal.normal.recall.value_or(0.0);
      acc.sum_f = acc.sum_f.value_or(0.0) + removal.normal.f1.value_or(0.0);
      ++acc.n;
    }

    if (need_grid_cells) {
      const auto cells =
          eval::run_adversarial_grid(datasets, grid_detectors, config.threads);
      grid_cells.insert(grid_cells.end(), cells.begin(), cells.end());
    }
    ++n_families_done;
    std::cout << "evaluated " << family << "\n";
  }

  const auto normal_with_avg = report::with_average_rows(normal_rows);
  auto normal_metric = [&](const std::string& detector,
                           auto member) -> std::optional<double> {
    for (const auto& row : normal_with_avg) {
      if (row.family == "Average" && row.detector == detector) return row.metrics.*member;
    }
    return std::nullopt;
  };

  if (want_normal) {
    report::write_normal_csv(paths.reports / "normal_metrics.csv", normal_with_avg);
  }

  report::GridAggregates aggregates;
  if (need_grid_cells) {
    aggregates = report::aggregate_grid(grid_cells);
    if (want_grid) {
      report::write_grid_csv(paths.reports / "adversarial_grid.csv", grid_cells);
      report::write_grid_aggregates_csv(paths.reports / "grid_aggregates.csv", aggregates);
      report::write_boxplots_csv(paths.reports / "grid_boxplots.csv", aggregates);
    }
  }

  if (want_retraining) {
    const auto grid_means = report::grid_mean_by_detector(grid_cells);
    retraining_rows.push_back({"Undistilled (retrained)",
                               retrain_normal_recall_sum["Retrained"] /
                                   static_cast<double>(n_families_done),
                               grid_means.at("Retrained")});
    retraining_rows.push_back({"Undistilled (baseline)",
                               normal_metric("Undistilled", &MetricsReport::recall).value_or(0.0),
                               grid_means.at("Undistilled")});
    retraining_rows.push_back({"Distilled",
                               normal_metric("Distilled", &MetricsReport::recall).value_or(0.0),
                               grid_means.at("Distilled")});
    report::write_retraining_csv(paths.reports / "retraining_comparison.csv", retraining_rows);
  }

  if (want_removal) {
    const auto& acc = removal_acc.at("Undistilled (feature removal)");
    report::RemovalRow removal_row;
    removal_row.detector_type = "Undistilled (feature removal)";
    removal_row.metrics.precision = *acc.sum_p / static_cast<double>(acc.n);
    removal_row.metrics.recall = *acc.sum_r / static_cast<double>(acc.n);
    removal_row.metrics.f1 = *acc.sum_f / static_cast<double>(acc.n);
    removal_rows.push_back(removal_row);

    report::RemovalRow baseline_row;
    baseline_row.detector_type = "Undistilled (baseline)";
    baseline_row.metrics.f1 = normal_metric("Undistilled", &MetricsReport::f1);
    baseline_row.metrics.precision = normal_metric("Undistilled", &MetricsReport::precision);
    baseline_row.metrics.recall = normal_metric("Undistilled", &MetricsReport::recall);
    removal_rows.push_back(baseline_row);

    report::RemovalRow distilled_row;
    distilled_row.detector_type = "Distilled";
    distilled_row.metrics.f1 = normal_metric("Distilled", &MetricsReport::f1);
    distilled_row.metrics.precision = normal_metric("Distilled", &MetricsReport::precision);
    distilled_row.metrics.recall = normal_metric("Distilled", &MetricsReport::recall);
    removal_rows.push_back(distilled_row);

    report::write_removal_csv(paths.reports / "feature_removal.csv", removal_rows);
  }

  report::write_summary_json(paths.reports / "summary.json", normal_with_avg,
                             need_grid_cells ? &aggregates : nullptr, retraining_rows,
                             removal_rows);
  std::cout << "reports written under " << paths.reports.string() << "\n";
  return 0;
}

int cmd_report(const RunConfig& config) {
  const Paths paths = Paths::from(config);
  const auto grid_path = paths.reports / "adversarial_grid.csv";
  const auto normal_path = paths.reports / "normal_metrics.csv";
  if (!fs::exists(grid_path)) throw MissingInput("grid report not found: " + grid_path.string());
  if (!fs::exists(normal_path)) {
    throw MissingInput("normal report not found: " + normal_path.string());
  }
  const auto cells = report::read_grid_csv(grid_path);
  const auto normal_rows = report::read_normal_csv(normal_path);
  const auto aggregates = report::aggregate_grid(cells);
  report::write_grid_aggregates_csv(paths.reports / "grid_aggregates.csv", aggregates);
  report::write_boxplots_csv(paths.reports / "grid_boxplots.csv", aggregates);
  report::write_summary_json(paths.reports / "summary.json", normal_rows, &aggregates, {}, {});
  std::cout << "aggregates regenerated under " << paths.reports.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowforest: distilled random-forest botnet detection toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");
  std::optional<uint64_t> seed_override;
  app.add_option("--seed", seed_override, "override the global seed");
  std::optional<std::string> out_dir_override;
  app.add_option("--out-dir", out_dir_override, "override the output directory");
  std::optional<unsigned> threads_override;
  app.add_option("--threads", threads_override, "worker threads (0 = all cores)");
  std::vector<std::string> families;
  app.add_option("--families", families, "restrict to these families")->delimiter(',');

  auto* synth_cmd = app.add_subcommand("synth", "write the bundled synthetic corpus");
  auto* ingest_cmd = app.add_subcommand("ingest", "parse, label and store flow CSVs");
  std::string schema_remap;
  ingest_cmd->add_option("--schema", schema_remap, "column remap file (key=value)");
  std::string scenario_family;
  ingest_cmd->add_option("--scenario-family", scenario_family,
                         "scenario->family map file (key=value)");
  std::string input_dir;
  ingest_cmd->add_option("--input-dir", input_dir, "directory of scenario_<n>.binetflow files");

  auto* train_cmd = app.add_subcommand("train", "train per-family detector bundles");
  std::string mode = "both";
  train_cmd->add_option("--mode", mode, "distilled | undistilled | both")
      ->check(CLI::IsMember({"distilled", "undistilled", "both"}));

  auto* adv_cmd = app.add_subcommand("adv-gen", "generate adversarial datasets");
  std::vector<std::string> groups, steps;
  adv_cmd->add_option("--groups", groups, "feature groups (default all 15)")->delimiter(',');
  adv_cmd->add_option("--steps", steps, "increment steps (default all 9)")->delimiter(',');

  auto* eval_cmd = app.add_subcommand("evaluate", "run evaluations and write reports");
  std::vector<std::string> reports;
  eval_cmd->add_option("--reports", reports, "normal,grid,retraining,removal")->delimiter(',');

  auto* report_cmd = app.add_subcommand("report", "recompute aggregates from existing reports");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) {
        std::cerr << "error: config file not found: " << config_path << "\n";
        return 2;
      }
      config = RunConfig::load(config_path);
    } else {
      config.models = eval::default_model_configs();
    }
    if (seed_override) config.seed = *seed_override;
    if (out_dir_override) config.out_dir = *out_dir_override;
    if (threads_override) config.threads = *threads_override;
    if (!families.empty()) config.plan.families = families;
    if (!schema_remap.empty()) config.data.column_schema = schema_remap;
    if (!scenario_family.empty()) config.data.scenario_family_map = scenario_family;
    if (!input_dir.empty()) config.data.input_dir = input_dir;

    if (synth_cmd->parsed()) return cmd_synth(config);
    if (ingest_cmd->parsed()) return cmd_ingest(config);
    if (train_cmd->parsed()) return cmd_train(config, mode);
    if (adv_cmd->parsed()) return cmd_adv_gen(config, config.plan.families, groups, steps);
    if (eval_cmd->parsed()) return cmd_evaluate(config, reports);
    if (report_cmd->parsed()) return cmd_report(config);
  } catch (const MissingInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
