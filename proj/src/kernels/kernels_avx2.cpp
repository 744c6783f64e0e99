// AVX2 + FMA variants.  This file is compiled with -mavx2 -mfma and must only
// be entered after dispatch.cpp has confirmed CPU support.
#include "isomat/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace isomat::kernels {

namespace {

// exp(x) for four lanes.  Cody-Waite reduction x = n ln2 + r followed by the
// Cephes rational approximation exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)),
// accurate to about 1 ulp over the reduced range.  Inputs below -708 return 0
// (std::exp would return a subnormal there); inputs above 709 are clamped.
inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878E-4), xx,
                               _mm256_set1_pd(3.02994407707441961300E-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042E-6), xx,
                               _mm256_set1_pd(2.52448340349684104192E-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // 2^n built directly in the exponent field; n is an exact small integer.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  __m256i n = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(fx, magic)),
                               _mm256_castpd_si256(magic));
  n = _mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(n));
  return _mm256_andnot_pd(underflow, r);
}

inline double hsum(__m256d v) {
  const __m128d s = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void combine_columns_avx2(const double* const* cols, int ncols, std::size_t n,
                          const double* coef, double* out) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < ncols; ++j)
      acc = _mm256_fmadd_pd(_mm256_set1_pd(coef[j]), _mm256_loadu_pd(cols[j] + k), acc);
    _mm256_storeu_pd(out + k, acc);
  }
  for (; k < n; ++k) {
    double acc = 0.0;
    for (int j = 0; j < ncols; ++j) acc += coef[j] * cols[j][k];
    out[k] = acc;
  }
}

double sum_exp_shifted_avx2(const double* e, const double* w, std::size_t n, double shift) {
  const __m256d s = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  if (w == nullptr) {
    for (; k + 4 <= n; k += 4)
      acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(_mm256_loadu_pd(e + k), s)));
  } else {
    for (; k + 4 <= n; k += 4)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + k), exp4(_mm256_sub_pd(_mm256_loadu_pd(e + k), s)),
                            acc);
  }
  double total = hsum(acc);
  for (; k < n; ++k) total += (w ? w[k] : 1.0) * std::exp(e[k] - shift);
  return total;
}

void exp_inplace_avx2(double* x, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(x + k, exp4(_mm256_loadu_pd(x + k)));
  for (; k < n; ++k) x[k] = std::exp(x[k]);
}

double max_value_avx2(const double* e, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(e);
    for (k = 4; k + 4 <= n; k += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(e + k));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (double v : lanes) m = v > m ? v : m;
  }
  for (; k < n; ++k) m = e[k] > m ? e[k] : m;
  return m;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable table{"avx2", combine_columns_avx2, sum_exp_shifted_avx2,
                                 exp_inplace_avx2, max_value_avx2};
  return table;
}

}  // namespace isomat::kernels
