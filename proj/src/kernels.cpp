#include "qra/kernels.hpp"

#include <stdexcept>

namespace qra::kern {

namespace {

Backend pick_default() {
#if defined(QRA_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Backend::avx2;
#endif
  return Backend::scalar;
}

Backend& current() {
  static Backend b = pick_default();
  return b;
}

} // namespace

Backend active_backend() { return current(); }

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
#if defined(QRA_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::runtime_error("kernel backend not available: " + backend_name(b));
  current() = b;
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "?";
}

double reduce_sum(const double* x, std::size_t n) {
#if defined(QRA_HAVE_AVX2)
  if (current() == Backend::avx2) return detail::reduce_sum_avx2(x, n);
#endif
  return detail::reduce_sum_scalar(x, n);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(QRA_HAVE_AVX2)
  if (current() == Backend::avx2) return detail::dot_avx2(a, b, n);
#endif
  return detail::dot_scalar(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(QRA_HAVE_AVX2)
  if (current() == Backend::avx2) return detail::axpy_avx2(alpha, x, y, n);
#endif
  detail::axpy_scalar(alpha, x, y, n);
}

void hermite_rows(int k_max, const double* x, std::size_t n, double* out) {
#if defined(QRA_HAVE_AVX2)
  if (current() == Backend::avx2)
    return detail::hermite_rows_avx2(k_max, x, n, out);
#endif
  detail::hermite_rows_scalar(k_max, x, n, out);
}

void tail_sums(const double* s, std::size_t n, double threshold,
               double* w_sum, double* sw_sum) {
#if defined(QRA_HAVE_AVX2)
  if (current() == Backend::avx2)
    return detail::tail_sums_avx2(s, n, threshold, w_sum, sw_sum);
#endif
  detail::tail_sums_scalar(s, n, threshold, w_sum, sw_sum);
}

} // namespace qra::kern
