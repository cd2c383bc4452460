#include "qra/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace qra::special {

namespace {
constexpr double kInvSqrtTwoPi = 0.3989422804014327;
constexpr double kInvSqrtTwo = 0.7071067811865476;
} // namespace

double std_normal_pdf(double x) {
  return kInvSqrtTwoPi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrtTwo); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("std_normal_quantile: p must be in (0,1)");

  // AS 241, PPND16 (Wichura 1988): rational approximations on three ranges,
  // accurate to ~1e-16.
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    z = num / den;
  }
  return (q < 0.0) ? -z : z;
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

} // namespace

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0))
    throw std::domain_error("reg_incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double nu, double x) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_pdf: nu must be positive");
  const double lc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * M_PI);
  return std::exp(lc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_cdf(double nu, double x) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_cdf: nu must be positive");
  if (x == 0.0) return 0.5;
  const double u = nu / (nu + x * x);
  const double half_tail = 0.5 * reg_incomplete_beta(0.5 * nu, 0.5, u);
  return x > 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_quantile(double nu, double p) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_quantile: nu must be positive");
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("student_t_quantile: p must be in (0,1)");
  if (p == 0.5) return 0.0;
  if (nu == 1.0) return std::tan(M_PI * (p - 0.5));
  if (nu == 2.0) {
    const double c = 2.0 * p - 1.0;
    return c * std::sqrt(2.0 / (1.0 - c * c));
  }

  // Cornish-Fisher start, then safeguarded Newton on the CDF.
  const double z = std_normal_quantile(p);
  double x = z + (z * z * z + z) / (4.0 * nu);
  double lo = x, hi = x;
  double step = 1.0 + std::fabs(x);
  while (student_t_cdf(nu, lo) > p) { lo -= step; step *= 2.0; }
  step = 1.0 + std::fabs(x);
  while (student_t_cdf(nu, hi) < p) { hi += step; step *= 2.0; }
  x = std::min(std::max(x, lo), hi);
  for (int it = 0; it < 100; ++it) {
    const double f = student_t_cdf(nu, x) - p;
    if (f > 0.0) hi = x; else lo = x;
    const double dens = student_t_pdf(nu, x);
    double next = (dens > 0.0) ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) < 1e-13 * (1.0 + std::fabs(x))) return next;
    x = next;
  }
  return x;
}

} // namespace qra::special
