#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops, provided as scalar reference kernels plus AVX2
// variants selected at runtime. Both paths are compiled without FP
// contraction and evaluate the same expression tree per element, so their
// outputs are bit-identical; the equivalence tests assert exactly that.
//
// Layout convention: all kernels operate on contiguous column arrays
// (one value per sample).

namespace flowforest::kern {

/// Column pointers for the derived-feature recompute:
///   tot = out + in
///   bps = dur > 0 ? tot / dur : 0
///   bpp = pkt > 0 ? tot / pkt : 0
///   pps = dur > 0 ? pkt / dur : 0
///   ratio = in > 0 ? out / in : out
struct DerivedCols {
  const double* duration;
  const double* out_bytes;
  const double* in_bytes;
  const double* packets;
  double* tot_bytes;
  double* bytes_per_sec;
  double* bytes_per_pkt;
  double* pkts_per_sec;
  double* byte_ratio;
};

/// out[i] = in[i] + c. in == out is allowed.
using AddConstantFn = void (*)(const double* in, double c, double* out, size_t n);
using RecomputeDerivedFn = void (*)(const DerivedCols& cols, size_t n);

/// Per-edge split scores for a node of n_total samples sorted by feature
/// value. Edge i separates the first i+1 samples from the rest
/// (i in [0, n_total-1)). Larger is better; the caller converts the winning
/// score into an impurity/variance decrease and applies the tie rules.
///
/// Binary Gini: scores[i] = (l0^2 + l1^2)/nl + (r0^2 + r1^2)/nr, where
/// l1 = prefix_ones[i] is the count of class-1 targets left of the edge.
using GiniPairScoresFn = void (*)(const double* prefix_ones, double total_ones,
                                  size_t n_total, double* scores, size_t n_edges);

/// MSE: scores[i] = SL^2/nl + SR^2/nr with SL = prefix_sum[i]. Equivalent to
/// ranking by weighted variance decrease (the sum-of-squares terms cancel).
using MseGainScoresFn = void (*)(const double* prefix_sum, double total_sum,
                                 size_t n_total, double* scores, size_t n_edges);

struct Confusion {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  uint64_t tn = 0;
};

/// pred/truth hold 0/1 bytes; positive = 1.
using CountConfusionFn = Confusion (*)(const uint8_t* pred, const uint8_t* truth, size_t n);

namespace scalar {
void add_constant(const double* in, double c, double* out, size_t n);
void recompute_derived(const DerivedCols& cols, size_t n);
void gini_pair_scores(const double* prefix_ones, double total_ones, size_t n_total,
                      double* scores, size_t n_edges);
void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges);
Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n);
}  // namespace scalar

#if defined(FLOWFOREST_HAVE_AVX2_BUILD)
namespace avx2 {
void add_constant(const double* in, double c, double* out, size_t n);
void recompute_derived(const DerivedCols& cols, size_t n);
void gini_pair_scores(const double* prefix_ones, double total_ones, size_t n_total,
                      double* scores, size_t n_edges);
void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges);
Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n);
}  // namespace avx2
#endif

/// True when the dispatched entry points route to the AVX2 variants
/// (requires an AVX2 build, a CPU that reports AVX2, and no
/// FLOWFOREST_DISABLE_AVX2 in the environment).
bool avx2_enabled();

// Dispatched entry points.
void add_constant(const double* in, double c, double* out, size_t n);
void recompute_derived(const DerivedCols& cols, size_t n);
void gini_pair_scores(const double* prefix_ones, double total_ones, size_t n_total,
                      double* scores, size_t n_edges);
void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges);
Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n);

}  // namespace flowforest::kern
