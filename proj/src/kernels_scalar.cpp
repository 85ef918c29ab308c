#include "flowforest/kernels.hpp"

namespace flowforest::kern::scalar {

void add_constant(const double* in, double c, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = in[i] + c;
}

void recompute_derived(const DerivedCols& cols, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double dur = cols.duration[i];
    const double out_b = cols.out_bytes[i];
    const double in_b = cols.in_bytes[i];
    const double pkt = cols.packets[i];
    const double tot = out_b + in_b;
    cols.tot_bytes[i] = tot;
    cols.bytes_per_sec[i] = dur > 0.0 ? tot / dur : 0.0;
    cols.bytes_per_pkt[i] = pkt > 0.0 ? tot / pkt : 0.0;
    cols.pkts_per_sec[i] = dur > 0.0 ? pkt / dur : 0.0;
    cols.byte_ratio[i] = in_b > 0.0 ? out_b / in_b : out_b;
  }
}

void gini_pair_scores(const double* prefix_ones, double total_ones, size_t n_total,
                      double* scores, size_t n_edges) {
  const double n = static_cast<double>(n_total);
  for (size_t i = 0; i < n_edges; ++i) {
    const double nl = static_cast<double>(i + 1);
    const double nr = n - nl;
    const double l1 = prefix_ones[i];
    const double l0 = nl - l1;
    const double r1 = total_ones - l1;
    const double r0 = nr - r1;
    scores[i] = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr;
  }
}

void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges) {
  const double n = static_cast<double>(n_total);
  for (size_t i = 0; i < n_edges; ++i) {
    const double nl = static_cast<double>(i + 1);
    const double nr = n - nl;
    const double sl = prefix_sum[i];
    const double sr = total_sum - sl;
    scores[i] = (sl * sl) / nl + (sr * sr) / nr;
  }
}

Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n) {
  Confusion c;
  for (size_t i = 0; i < n; ++i) {
    const unsigned p = pred[i];
    const unsigned t = truth[i];
    c.tp += p & t;
    c.fp += p & (t ^ 1u);
    c.fn += (p ^ 1u) & t;
    c.tn += (p ^ 1u) & (t ^ 1u);
  }
  return c;
}

}  // namespace flowforest::kern::scalar
