#include "qra/kernels.hpp"

#if defined(QRA_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <vector>

namespace qra::kern::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

constexpr double kPiQuarterInv = 0.7511255444649425;
constexpr double kSqrt2 = 1.4142135623730951;

} // namespace

double reduce_sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i];
  return hsum(acc) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hermite_rows_avx2(int k_max, const double* x, std::size_t n, double* out) {
  // Recurrence coefficients are shared across lanes.
  std::vector<double> ca(static_cast<std::size_t>(k_max) + 1),
      cb(static_cast<std::size_t>(k_max) + 1);
  for (int k = 1; k <= k_max; ++k) {
    ca[k] = std::sqrt(2.0 / k);
    cb[k] = std::sqrt((k - 1.0) / k);
  }
  const __m256d c0 = _mm256_set1_pd(kPiQuarterInv);
  const __m256d s2 = _mm256_set1_pd(kSqrt2);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    alignas(32) double xs[4], e[4];
    _mm256_store_pd(xs, xv);
    for (int l = 0; l < 4; ++l) e[l] = std::exp(-0.5 * xs[l] * xs[l]);
    __m256d h0 = _mm256_mul_pd(c0, _mm256_load_pd(e));
    _mm256_storeu_pd(out + i, h0);
    if (k_max == 0) continue;
    __m256d h1 = _mm256_mul_pd(_mm256_mul_pd(s2, xv), h0);
    _mm256_storeu_pd(out + n + i, h1);
    __m256d hkm1 = h0, hk = h1;
    for (int k = 2; k <= k_max; ++k) {
      const __m256d av = _mm256_set1_pd(ca[k]);
      const __m256d bv = _mm256_set1_pd(cb[k]);
      __m256d hkp1 = _mm256_fmsub_pd(_mm256_mul_pd(av, xv), hk,
                                     _mm256_mul_pd(bv, hkm1));
      _mm256_storeu_pd(out + static_cast<std::size_t>(k) * n + i, hkp1);
      hkm1 = hk;
      hk = hkp1;
    }
  }
  // Remainder lanes, same recurrence with the full-row stride.
  for (std::size_t j = i; j < n; ++j) {
    const double xi = x[j];
    double h0 = kPiQuarterInv * std::exp(-0.5 * xi * xi);
    out[j] = h0;
    if (k_max == 0) continue;
    double h1 = kSqrt2 * xi * h0;
    out[n + j] = h1;
    double hkm1 = h0, hk = h1;
    for (int k = 2; k <= k_max; ++k) {
      const double hkp1 = ca[k] * xi * hk - cb[k] * hkm1;
      out[static_cast<std::size_t>(k) * n + j] = hkp1;
      hkm1 = hk;
      hk = hkp1;
    }
  }
}

void tail_sums_avx2(const double* s, std::size_t n, double threshold,
                    double* w_sum, double* sw_sum) {
  const __m256d th = _mm256_set1_pd(threshold);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d wacc = _mm256_setzero_pd();
  __m256d swacc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sv = _mm256_loadu_pd(s + i);
    const __m256d mask = _mm256_cmp_pd(sv, th, _CMP_GE_OQ);
    wacc = _mm256_add_pd(wacc, _mm256_and_pd(mask, one));
    swacc = _mm256_add_pd(swacc, _mm256_and_pd(mask, sv));
  }
  double w = hsum(wacc), sw = hsum(swacc);
  for (; i < n; ++i) {
    if (s[i] >= threshold) {
      w += 1.0;
      sw += s[i];
    }
  }
  *w_sum = w;
  *sw_sum = sw;
}

} // namespace qra::kern::detail

#endif // QRA_HAVE_AVX2
