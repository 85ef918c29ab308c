#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforest/evaluation.hpp"
#include "flowforest/metrics.hpp"

// Report assembly: aggregations over the adversarial grid and the CSV/JSON
// artifacts with stable filenames. All floating-point output uses the
// shortest round-trip representation so reruns are byte-identical.

namespace flowforest::report {

std::string format_double(double value);
std::string format_metric(const std::optional<double>& value);  // "NA" when undefined

/// Canonical emission order for increment steps (string order would put IX
/// before V).
std::span<const std::string> step_order();

struct GridAggregates {
  // detector -> key -> unweighted mean detection rate.
  std::map<std::string, std::map<std::string, double>> by_family;
  std::map<std::string, std::map<std::string, double>> by_group;
  std::map<std::string, std::map<std::string, double>> by_step;
  // detector -> group -> step -> mean over families.
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> by_group_step;
  // detector -> max - min of the per-step means.
  std::map<std::string, double> step_dispersion;
  // detector -> group -> five-number summary over the 9 per-step means.
  std::map<std::string, std::map<std::string, BoxplotStats>> group_boxplots;
  // detector -> family -> group -> five-number summary over the 9 steps.
  std::map<std::string, std::map<std::string, std::map<std::string, BoxplotStats>>>
      family_group_boxplots;
};

GridAggregates aggregate_grid(std::span<const eval::GridCell> cells);

/// Grid-averaged detection rate per detector (the adversarial recall used in
/// the retraining comparison).
std::map<std::string, double> grid_mean_by_detector(std::span<const eval::GridCell> cells);

/// Appends an "Average" row per detector (unweighted mean over families).
std::vector<eval::NormalRow> with_average_rows(std::vector<eval::NormalRow> rows);

struct TimingRow {
  std::string family;
  std::string detector;
  double seconds = 0.0;
};

struct RetrainingRow {
  std::string detector_type;
  double recall_normal = 0.0;
  double recall_adversarial = 0.0;
};

struct RemovalRow {
  std::string detector_type;
  MetricsReport metrics;
};

void write_normal_csv(const std::filesystem::path& path, std::span<const eval::NormalRow> rows);
std::vector<eval::NormalRow> read_normal_csv(const std::filesystem::path& path);

void write_timings_csv(const std::filesystem::path& path, std::span<const TimingRow> rows);

void write_grid_csv(const std::filesystem::path& path, std::span<const eval::GridCell> cells);
std::vector<eval::GridCell> read_grid_csv(const std::filesystem::path& path);

void write_grid_aggregates_csv(const std::filesystem::path& path, const GridAggregates& agg);
void write_boxplots_csv(const std::filesystem::path& path, const GridAggregates& agg);

void write_retraining_csv(const std::filesystem::path& path, std::span<const RetrainingRow> rows);
void write_removal_csv(const std::filesystem::path& path, std::span<const RemovalRow> rows);

/// One JSON document bundling every table above.
void write_summary_json(const std::filesystem::path& path,
                        std::span<const eval::NormalRow> normal_rows,
                        const GridAggregates* grid_aggregates,
                        std::span<const RetrainingRow> retraining_rows,
                        std::span<const RemovalRow> removal_rows);

}  // namespace flowforest::report
