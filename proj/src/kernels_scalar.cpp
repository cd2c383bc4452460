#include "qra/kernels.hpp"

#include <cmath>
#include <vector>

namespace qra::kern::detail {

double reduce_sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

namespace {
constexpr double kPiQuarterInv = 0.7511255444649425; // pi^(-1/4)
constexpr double kSqrt2 = 1.4142135623730951;
} // namespace

void hermite_rows_scalar(int k_max, const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    double h0 = kPiQuarterInv * std::exp(-0.5 * xi * xi);
    out[i] = h0;
    if (k_max == 0) continue;
    double h1 = kSqrt2 * xi * h0;
    out[n + i] = h1;
    double hkm1 = h0, hk = h1;
    for (int k = 1; k < k_max; ++k) {
      const double a = std::sqrt(2.0 / (k + 1));
      const double b = std::sqrt(static_cast<double>(k) / (k + 1));
      const double hkp1 = a * xi * hk - b * hkm1;
      out[static_cast<std::size_t>(k + 1) * n + i] = hkp1;
      hkm1 = hk;
      hk = hkp1;
    }
  }
}

void tail_sums_scalar(const double* s, std::size_t n, double threshold,
                      double* w_sum, double* sw_sum) {
  double w = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] >= threshold) {
      w += 1.0;
      sw += s[i];
    }
  }
  *w_sum = w;
  *sw_sum = sw;
}

} // namespace qra::kern::detail
