#include "flowforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowforest {

MetricsReport compute_metrics(const ConfusionCounts& counts) {
  MetricsReport report;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) {
    report.precision = tp / static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn > 0) {
    report.recall = tp / static_cast<double>(counts.tp + counts.fn);
  }
  if (report.precision && report.recall && (*report.precision + *report.recall) > 0.0) {
    report.f1 = 2.0 * (*report.precision * *report.recall) / (*report.precision + *report.recall);
  }
  return report;
}

ConfusionCounts count_confusion(std::span<const uint8_t> predictions,
                                std::span<const uint8_t> truth) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("prediction/truth size mismatch");
  }
  return kern::count_confusion(predictions.data(), truth.data(), predictions.size());
}

namespace {

double percentile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BoxplotStats boxplot_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("boxplot_stats of an empty set");
  std::sort(values.begin(), values.end());
  BoxplotStats stats;
  stats.min = values.front();
  stats.q1 = percentile_sorted(values, 0.25);
  stats.median = percentile_sorted(values, 0.5);
  stats.q3 = percentile_sorted(values, 0.75);
  stats.max = values.back();
  return stats;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty set");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace flowforest
