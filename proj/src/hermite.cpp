#include "qra/hermite.hpp"

#include <cmath>
#include <stdexcept>

#include "qra/distributions.hpp"
#include "qra/kernels.hpp"

namespace qra::special {

double hermite_function(int k, double x) {
  if (k < 0) throw std::invalid_argument("hermite_function: negative order");
  double h0 = kPiQuarterInv * std::exp(-0.5 * x * x);
  if (k == 0) return h0;
  double h1 = std::sqrt(2.0) * x * h0;
  for (int j = 1; j < k; ++j) {
    const double h2 =
        std::sqrt(2.0 / (j + 1)) * x * h1 - std::sqrt(j / (j + 1.0)) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

std::vector<double> hermite_function_row(int k_max, double x) {
  if (k_max < 0) throw std::invalid_argument("hermite_function_row: negative order");
  std::vector<double> row(static_cast<std::size_t>(k_max) + 1);
  kern::hermite_rows(k_max, &x, 1, row.data());
  return row;
}

double bar_hermite(int k, double x) {
  const double v = 0.5 + 0.5 * kPiQuarter * hermite_function(k, x);
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

std::vector<double> hermite_integral_row(int k_max, double L, double x) {
  if (k_max < 0) throw std::invalid_argument("hermite_integral_row: negative order");
  if (!(L > 0.0)) throw std::invalid_argument("hermite_integral_row: L must be positive");
  if (x < -L || x > L)
    throw std::domain_error("hermite_integral_row: x outside [-L, L]");

  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  out[0] = kPiQuarterInv * kSqrtTwoPi * (std_normal_cdf(x) - std_normal_cdf(-L));
  if (k_max == 0) return out;

  const double ex = std::exp(-0.5 * x * x);
  const double eL = std::exp(-0.5 * L * L);
  out[1] = -std::sqrt(2.0) * kPiQuarterInv * (ex - eL);
  if (k_max == 1) return out;

  // h_k at the two endpoints, advanced alongside the integral recurrence.
  double hx0 = kPiQuarterInv * ex, hx1 = std::sqrt(2.0) * x * hx0;
  double hm0 = kPiQuarterInv * eL, hm1 = std::sqrt(2.0) * (-L) * hm0;
  for (int k = 1; k < k_max; ++k) {
    out[k + 1] = std::sqrt(k / (k + 1.0)) * out[k - 1] -
                 std::sqrt(2.0 / (k + 1)) * (hx1 - hm1);
    const double ax = std::sqrt(2.0 / (k + 1)), bx = std::sqrt(k / (k + 1.0));
    const double hx2 = ax * x * hx1 - bx * hx0;
    const double hm2 = ax * (-L) * hm1 - bx * hm0;
    hx0 = hx1;
    hx1 = hx2;
    hm0 = hm1;
    hm1 = hm2;
  }
  return out;
}

double hermite_integral(int k, double L, double x) {
  return hermite_integral_row(k, L, x)[static_cast<std::size_t>(k)];
}

} // namespace qra::special
