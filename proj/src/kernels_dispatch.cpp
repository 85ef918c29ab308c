#include <cstdlib>

#include "flowforest/kernels.hpp"

namespace flowforest::kern {

namespace {

struct KernelTable {
  AddConstantFn add_constant;
  RecomputeDerivedFn recompute_derived;
  GiniPairScoresFn gini_pair_scores;
  MseGainScoresFn mse_gain_scores;
  CountConfusionFn count_confusion;
  bool is_avx2;
};

KernelTable select_kernels() {
  KernelTable t{scalar::add_constant, scalar::recompute_derived, scalar::gini_pair_scores,
                scalar::mse_gain_scores, scalar::count_confusion, false};
#if defined(FLOWFOREST_HAVE_AVX2_BUILD)
  if (__builtin_cpu_supports("avx2") && std::getenv("FLOWFOREST_DISABLE_AVX2") == nullptr) {
    t = {avx2::add_constant, avx2::recompute_derived, avx2::gini_pair_scores,
         avx2::mse_gain_scores, avx2::count_confusion, true};
  }
#endif
  return t;
}

const KernelTable& kernels() {
  static const KernelTable table = select_kernels();
  return table;
}

}  // namespace

bool avx2_enabled() { return kernels().is_avx2; }

void add_constant(const double* in, double c, double* out, size_t n) {
  kernels().add_constant(in, c, out, n);
}

void recompute_derived(const DerivedCols& cols, size_t n) { kernels().recompute_derived(cols, n); }

void gini_pair_scores(const double* prefix_ones, double total_ones, size_t n_total,
                      double* scores, size_t n_edges) {
  kernels().gini_pair_scores(prefix_ones, total_ones, n_total, scores, n_edges);
}

void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges) {
  kernels().mse_gain_scores(prefix_sum, total_sum, n_total, scores, n_edges);
}

Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n) {
  return kernels().count_confusion(pred, truth, n);
}

}  // namespace flowforest::kern
