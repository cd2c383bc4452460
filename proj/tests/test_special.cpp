#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qra/distributions.hpp"
#include "qra/hermite.hpp"
#include "qra/rng.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace qra;
using special::hermite_function;
using special::hermite_function_row;
using special::hermite_integral;

namespace {

// Monomial-expansion route for low orders: H_k coefficients by the raw
// polynomial recurrence, then the moment integrals
//   Itilde_l(x) = (1/sqrt(2 pi)) int_-inf^x y^l e^{-y^2/2} dy
// by the moment recurrence. Loses precision past k ~ 25, which is exactly why
// the implementation uses the normalized form; kept here as a low-order oracle.
std::vector<double> hermite_poly_coeffs(int k) {
  std::vector<std::vector<double>> h(static_cast<std::size_t>(k) + 1);
  h[0] = {1.0};
  if (k >= 1) h[1] = {0.0, 2.0};
  for (int j = 2; j <= k; ++j) {
    std::vector<double> c(static_cast<std::size_t>(j) + 1, 0.0);
    for (std::size_t p = 0; p < h[j - 1].size(); ++p) c[p + 1] += 2.0 * h[j - 1][p];
    for (std::size_t p = 0; p < h[j - 2].size(); ++p) c[p] -= 2.0 * (j - 1) * h[j - 2][p];
    h[j] = c;
  }
  return h[k];
}

double moment_integral(int l, double x) { // Itilde_l
  const double inv = 1.0 / std::sqrt(2.0 * M_PI);
  if (l == 0) return special::std_normal_cdf(x);
  if (l == 1) return -inv * std::exp(-0.5 * x * x);
  return -inv * std::pow(x, l - 1) * std::exp(-0.5 * x * x) +
         (l - 1) * moment_integral(l - 2, x);
}

double hermite_integral_monomial(int k, double L, double x) {
  const auto coeffs = hermite_poly_coeffs(k);
  const double norm =
      1.0 / std::sqrt(std::pow(2.0, k) * std::tgamma(k + 1.0) * std::sqrt(M_PI));
  double acc = 0.0;
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    if (coeffs[l] == 0.0) continue;
    acc += coeffs[l] * (moment_integral(static_cast<int>(l), x) -
                        moment_integral(static_cast<int>(l), -L));
  }
  return norm * std::sqrt(2.0 * M_PI) * acc;
}

} // namespace

TEST_CASE("hermite function values") {
  CHECK(hermite_function(0, 0.0) == doctest::Approx(0.7511255444649425).epsilon(1e-12));
  CHECK(hermite_function(1, 0.0) == doctest::Approx(0.0));
  // H_2(x) = 4x^2 - 2 pushed through the normalization, evaluated at 0.
  CHECK(hermite_function(2, 0.0) ==
        doctest::Approx(-0.5311259660135984).epsilon(1e-12));

  const auto row = hermite_function_row(2, 0.0);
  CHECK(row.size() == 3);
  CHECK(row[0] == doctest::Approx(0.7511255444649425));
  CHECK(row[1] == doctest::Approx(0.0));
  CHECK(row[2] == doctest::Approx(-0.5311259660135984));
}

TEST_CASE("hermite row parity under x -> -x") {
  const auto plus = hermite_function_row(9, 1.37);
  const auto minus = hermite_function_row(9, -1.37);
  for (int k = 0; k <= 9; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    CHECK(plus[k] == doctest::Approx(sign * minus[k]).epsilon(1e-14));
  }
}

TEST_CASE("amplitude bound and bar range over random orders") {
  Stream rng(123);
  for (int i = 0; i < 10000; ++i) {
    const int k = static_cast<int>(rng.uniform01() * 61);
    const double x = (rng.uniform01() * 2.0 - 1.0) * 10.0;
    const double h = hermite_function(k, x);
    CHECK(std::fabs(h) <= special::kPiQuarterInv + 1e-12);
    const double b = special::bar_hermite(k, x);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("bar hermite at the origin") {
  CHECK(special::bar_hermite(0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(special::bar_hermite(1, 0.0) == doctest::Approx(0.5));
  CHECK(special::bar_hermite(2, 0.0) == doctest::Approx(0.1464466094).epsilon(1e-8));
}

TEST_CASE("orthonormality via adaptive quadrature (sampled pairs)") {
  const std::vector<std::pair<int, int>> pairs = {
      {0, 0}, {1, 1}, {7, 7}, {30, 30}, {0, 2}, {3, 9}, {17, 30}, {29, 30}};
  for (auto [k, l] : pairs) {
    const double v = oracles::integrate(
        [k, l](double x) { return hermite_function(k, x) * hermite_function(l, x); },
        -12.0, 12.0, 1e-11);
    CHECK_NEAR(v, k == l ? 1.0 : 0.0, 1e-8);
  }
}

TEST_CASE("hermite integral seeds and edges") {
  for (int k : {0, 1, 4, 11})
    CHECK_NEAR(hermite_integral(k, 5.0, -5.0), 0.0, 1e-15);
  CHECK_NEAR(hermite_integral(1, 5.0, 5.0), 0.0, 1e-12);
  // pi^{-1/4} int_{-5}^{0} e^{-t^2/2} dt
  CHECK(hermite_integral(0, 5.0, 0.0) ==
        doctest::Approx(0.9413957246).epsilon(1e-8));
  CHECK_THROWS_AS(hermite_integral(0, 5.0, 5.1), std::domain_error);
  CHECK_THROWS_AS(hermite_integral(0, 5.0, -5.1), std::domain_error);
}

TEST_CASE("hermite integral against adaptive quadrature") {
  for (int k : {0, 1, 2, 5, 17, 40}) {
    for (double L : {3.0, 5.0, 8.0}) {
      for (int p = 0; p <= 12; ++p) {
        const double x = -L + 2.0 * L * p / 12.0;
        const double q = oracles::integrate(
            [k](double t) { return hermite_function(k, t); }, -L, x, 1e-12);
        CHECK_NEAR(hermite_integral(k, L, x), q, 1e-8);
      }
    }
  }
}

TEST_CASE("hermite integral against the monomial route (low orders)") {
  for (int k = 0; k <= 10; ++k) {
    for (double x : {-2.0, -0.5, 0.0, 1.3, 4.0}) {
      CHECK_NEAR(hermite_integral(k, 4.0, x), hermite_integral_monomial(k, 4.0, x), 1e-9);
    }
  }
}

TEST_CASE("integral is monotone where the integrand is sign-constant") {
  const int k = 5;
  const double L = 5.0;
  const int n = 2001;
  std::vector<double> xs(n), hv(n), iv(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = -L + 2.0 * L * i / (n - 1);
    hv[i] = hermite_function(k, xs[i]);
    iv[i] = hermite_integral(k, L, xs[i]);
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (hv[i] > 1e-6 && hv[i + 1] > 1e-6) CHECK(iv[i + 1] >= iv[i] - 1e-12);
    if (hv[i] < -1e-6 && hv[i + 1] < -1e-6) CHECK(iv[i + 1] <= iv[i] + 1e-12);
  }
}

TEST_CASE("standard normal cdf and quantile") {
  CHECK(special::std_normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(special::std_normal_quantile(0.975) ==
        doctest::Approx(1.959963985).epsilon(1e-8));
  for (double p : {0.01, 0.5, 0.99})
    CHECK_NEAR(special::std_normal_cdf(special::std_normal_quantile(p)), p, 1e-10);
  // cdf against quadrature of the density on a bounded interval
  const double q = 0.5 + oracles::integrate(special::std_normal_pdf, 0.0, 1.0, 1e-13);
  CHECK_NEAR(special::std_normal_cdf(1.0), q, 1e-10);
  CHECK_THROWS_AS(special::std_normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(special::std_normal_quantile(1.0), std::domain_error);
}

TEST_CASE("student t cdf and quantile") {
  for (double nu : {0.7, 1.0, 3.5, 10.0})
    CHECK(special::student_t_cdf(nu, 0.0) == doctest::Approx(0.5));

  // Cauchy closed form
  CHECK(special::student_t_quantile(1.0, 0.75) == doctest::Approx(1.0).epsilon(1e-12));

  // cdf against quadrature over a bounded interval (no tail truncation)
  for (double nu : {0.6, 2.3, 7.0}) {
    for (double x : {-3.0, -0.7, 1.2}) {
      double ref;
      if (x < 0.0)
        ref = 0.5 - oracles::integrate(
                        [nu](double t) { return special::student_t_pdf(nu, t); },
                        x, 0.0, 1e-12);
      else
        ref = 0.5 + oracles::integrate(
                        [nu](double t) { return special::student_t_pdf(nu, t); },
                        0.0, x, 1e-12);
      CHECK_NEAR(special::student_t_cdf(nu, x), ref, 1e-8);
    }
  }

  // inverse pair
  for (double nu : {0.5, 1.0, 2.0, 4.5, 30.0})
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999})
      CHECK_NEAR(special::student_t_cdf(nu, special::student_t_quantile(nu, p)), p, 1e-9);

  // large-dof limit approaches the normal
  for (double x : {-2.0, -0.5, 0.3, 1.7})
    CHECK_NEAR(special::student_t_cdf(1e6, x), special::std_normal_cdf(x), 1e-3);

  CHECK_THROWS_AS(special::student_t_quantile(2.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(special::student_t_cdf(-1.0, 0.5), std::domain_error);
}
