#pragma once

#include <cstddef>
#include <string>

namespace qra::kern {

// Vectorized inner loops with a scalar reference implementation for every
// kernel. The active backend is chosen once at startup from CPU features and
// can be overridden (tests exercise both and compare).
enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);
bool backend_available(Backend b);
std::string backend_name(Backend b);

// sum_i x[i]
double reduce_sum(const double* x, std::size_t n);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Orthonormal Hermite function rows: out[k*n + i] = h_k(x[i]) for k = 0..k_max.
// Three-term recurrence carried per abscissa, so rows are consistent with
// hermite_function() up to rounding of the backend's fused operations.
void hermite_rows(int k_max, const double* x, std::size_t n, double* out);

// Tail statistics over sample sums: w_sum = #{s[i] >= threshold},
// sw_sum = sum of s[i] over the same set.
void tail_sums(const double* s, std::size_t n, double threshold,
               double* w_sum, double* sw_sum);

namespace detail {
// Scalar reference kernels, always available; the dispatch table points here
// when AVX2 is absent or disabled.
double reduce_sum_scalar(const double* x, std::size_t n);
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void hermite_rows_scalar(int k_max, const double* x, std::size_t n, double* out);
void tail_sums_scalar(const double* s, std::size_t n, double threshold,
                      double* w_sum, double* sw_sum);

#if defined(QRA_HAVE_AVX2)
double reduce_sum_avx2(const double* x, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void hermite_rows_avx2(int k_max, const double* x, std::size_t n, double* out);
void tail_sums_avx2(const double* s, std::size_t n, double threshold,
                    double* w_sum, double* sw_sum);
#endif
} // namespace detail

} // namespace qra::kern
