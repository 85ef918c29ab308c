#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowforest/kernels.hpp"

namespace flowforest {

using ConfusionCounts = kern::Confusion;

/// Precision, detection rate (recall) and F1. A metric whose denominator is
/// zero is left unset rather than crashing or faking a value.
struct MetricsReport {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

/// Prec = TP/(TP+FP), DR = TP/(TP+FN), F1 = 2*Prec*DR/(Prec+DR). F1 is
/// undefined when either input is undefined or when Prec+DR == 0.
MetricsReport compute_metrics(const ConfusionCounts& counts);

ConfusionCounts count_confusion(std::span<const uint8_t> predictions,
                                std::span<const uint8_t> truth);

/// Five-number summary for boxplot emission.
struct BoxplotStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation over the sorted values (the convention
/// used by numpy's default percentile).
BoxplotStats boxplot_stats(std::vector<double> values);

double mean_of(std::span<const double> values);

}  // namespace flowforest
