#include <immintrin.h>

#include "flowforest/kernels.hpp"

// AVX2 variants. FMA intrinsics are deliberately not used: each element must
// go through the same rounding sequence as the scalar reference so the two
// paths stay bit-identical.

namespace flowforest::kern::avx2 {

void add_constant(const double* in, double c, double* out, size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(in + i), vc));
  }
  for (; i < n; ++i) out[i] = in[i] + c;
}

void recompute_derived(const DerivedCols& cols, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dur = _mm256_loadu_pd(cols.duration + i);
    const __m256d out_b = _mm256_loadu_pd(cols.out_bytes + i);
    const __m256d in_b = _mm256_loadu_pd(cols.in_bytes + i);
    const __m256d pkt = _mm256_loadu_pd(cols.packets + i);

    const __m256d tot = _mm256_add_pd(out_b, in_b);
    _mm256_storeu_pd(cols.tot_bytes + i, tot);

    // Unselected lanes may divide by zero; the inf/nan results are blended
    // away and x86 FP divide does not trap.
    const __m256d dur_pos = _mm256_cmp_pd(dur, zero, _CMP_GT_OQ);
    const __m256d pkt_pos = _mm256_cmp_pd(pkt, zero, _CMP_GT_OQ);
    const __m256d in_pos = _mm256_cmp_pd(in_b, zero, _CMP_GT_OQ);

    _mm256_storeu_pd(cols.bytes_per_sec + i,
                     _mm256_blendv_pd(zero, _mm256_div_pd(tot, dur), dur_pos));
    _mm256_storeu_pd(cols.bytes_per_pkt + i,
                     _mm256_blendv_pd(zero, _mm256_div_pd(tot, pkt), pkt_pos));
    _mm256_storeu_pd(cols.pkts_per_sec + i,
                     _mm256_blendv_pd(zero, _mm256_div_pd(pkt, dur), dur_pos));
    _mm256_storeu_pd(cols.byte_ratio + i,
                     _mm256_blendv_pd(out_b, _mm256_div_pd(out_b, in_b), in_pos));
  }
  for (; i < n; ++i) {
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
  const __m256d vn = _mm256_set1_pd(n);
  const __m256d vt1 = _mm256_set1_pd(total_ones);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d nl = _mm256_setr_pd(1.0, 2.0, 3.0, 4.0);
  size_t i = 0;
  for (; i + 4 <= n_edges; i += 4) {
    const __m256d nr = _mm256_sub_pd(vn, nl);
    const __m256d l1 = _mm256_loadu_pd(prefix_ones + i);
    const __m256d l0 = _mm256_sub_pd(nl, l1);
    const __m256d r1 = _mm256_sub_pd(vt1, l1);
    const __m256d r0 = _mm256_sub_pd(nr, r1);
    const __m256d left =
        _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(l0, l0), _mm256_mul_pd(l1, l1)), nl);
    const __m256d right =
        _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(r0, r0), _mm256_mul_pd(r1, r1)), nr);
    _mm256_storeu_pd(scores + i, _mm256_add_pd(left, right));
    nl = _mm256_add_pd(nl, step);
  }
  for (; i < n_edges; ++i) {
    const double snl = static_cast<double>(i + 1);
    const double snr = n - snl;
    const double l1 = prefix_ones[i];
    const double l0 = snl - l1;
    const double r1 = total_ones - l1;
    const double r0 = snr - r1;
    scores[i] = (l0 * l0 + l1 * l1) / snl + (r0 * r0 + r1 * r1) / snr;
  }
}

void mse_gain_scores(const double* prefix_sum, double total_sum, size_t n_total,
                     double* scores, size_t n_edges) {
  const double n = static_cast<double>(n_total);
  const __m256d vn = _mm256_set1_pd(n);
  const __m256d vsum = _mm256_set1_pd(total_sum);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d nl = _mm256_setr_pd(1.0, 2.0, 3.0, 4.0);
  size_t i = 0;
  for (; i + 4 <= n_edges; i += 4) {
    const __m256d nr = _mm256_sub_pd(vn, nl);
    const __m256d sl = _mm256_loadu_pd(prefix_sum + i);
    const __m256d sr = _mm256_sub_pd(vsum, sl);
    const __m256d left = _mm256_div_pd(_mm256_mul_pd(sl, sl), nl);
    const __m256d right = _mm256_div_pd(_mm256_mul_pd(sr, sr), nr);
    _mm256_storeu_pd(scores + i, _mm256_add_pd(left, right));
    nl = _mm256_add_pd(nl, step);
  }
  for (; i < n_edges; ++i) {
    const double snl = static_cast<double>(i + 1);
    const double snr = n - snl;
    const double sl = prefix_sum[i];
    const double sr = total_sum - sl;
    scores[i] = (sl * sl) / snl + (sr * sr) / snr;
  }
}

Confusion count_confusion(const uint8_t* pred, const uint8_t* truth, size_t n) {
  Confusion c;
  const __m256i ones = _mm256_set1_epi8(1);
  const __m256i zero = _mm256_setzero_si256();
  __m256i tp_acc = zero, fp_acc = zero, fn_acc = zero;
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i p = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pred + i));
    const __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(truth + i));
    const __m256i not_p = _mm256_xor_si256(p, ones);
    const __m256i not_t = _mm256_xor_si256(t, ones);
    tp_acc = _mm256_add_epi64(tp_acc, _mm256_sad_epu8(_mm256_and_si256(p, t), zero));
    fp_acc = _mm256_add_epi64(fp_acc, _mm256_sad_epu8(_mm256_and_si256(p, not_t), zero));
    fn_acc = _mm256_add_epi64(fn_acc, _mm256_sad_epu8(_mm256_and_si256(not_p, t), zero));
  }
  alignas(32) uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), tp_acc);
  c.tp = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), fp_acc);
  c.fp = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), fn_acc);
  c.fn = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const unsigned p = pred[i];
    const unsigned t = truth[i];
    c.tp += p & t;
    c.fp += p & (t ^ 1u);
    c.fn += (p ^ 1u) & t;
  }
  c.tn = n - c.tp - c.fp - c.fn;
  return c;
}

}  // namespace flowforest::kern::avx2
