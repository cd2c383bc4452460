#pragma once

namespace qra::special {

double std_normal_pdf(double x);

// Phi_SN via the complementary error function; absolute error ~1e-16.
double std_normal_cdf(double x);

// Inverse of Phi_SN (Wichura's AS 241, PPND16). Throws for p outside (0,1).
double std_normal_quantile(double p);

double student_t_pdf(double nu, double x);

// Student's t CDF through the regularized incomplete beta function.
double student_t_cdf(double nu, double x);

// Inverse of the t CDF; closed forms for nu = 1, 2, safeguarded Newton
// otherwise. Throws for p outside (0,1) or nu <= 0.
double student_t_quantile(double nu, double p);

// Regularized incomplete beta I_x(a, b) (continued fraction), exposed for the
// t CDF and its tests.
double reg_incomplete_beta(double a, double b, double x);

} // namespace qra::special
