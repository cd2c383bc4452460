#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qra/rng.hpp"

namespace qra::copula {

enum class Kind { independence, gaussian, student_t };

// Copula with correlation data and density bounds. Gaussian and t densities
// blow up at the corners of the unit cube, so every density evaluation clamps
// its arguments into [clip, 1-clip]; c_max / c_prime_max are computed on the
// clipped cube (see copula_density_bounds) and must be set before the risk
// engine uses the model.
struct CopulaModel {
  Kind kind = Kind::independence;
  std::size_t d = 0;
  std::vector<double> corr; // d x d, row-major; R (gaussian) or Sigma (t)
  double nu = 0.0;          // degrees of freedom, student_t only
  double clip = 1e-3;
  double c_max = 0.0;       // sup of density over the clipped cube, with margin
  double c_prime_max = 0.0; // sup of |dc/du_i| over the clipped cube, with margin

  // Derived from corr at construction.
  std::vector<double> chol;  // lower-triangular Cholesky factor
  std::vector<double> inv;   // corr^{-1}
  double log_det = 0.0;

  static CopulaModel independence(std::size_t d, double clip = 1e-3);
  static CopulaModel gaussian(std::size_t d, const std::vector<double>& corr,
                              double clip = 1e-3);
  static CopulaModel student_t(std::size_t d, const std::vector<double>& corr,
                               double nu, double clip = 1e-3);

  bool bounds_set() const { return c_max > 0.0; }
};

// Density c(u) with u clamped into the clipped cube.
double copula_density(const CopulaModel& m, const double* u, std::size_t d);
double copula_density(const CopulaModel& m, const std::vector<double>& u);

// Quantile transform of one clamped coordinate (Phi^{-1} or t_nu^{-1});
// density_z evaluates the density directly from transformed coordinates so
// grid sweeps can cache the per-axis transform.
double z_from_u(const CopulaModel& m, double u);
double density_z(const CopulaModel& m, const double* z);

// Lattice search over the clipped cube: c_max as max density x 1.05,
// c_prime_max as max central-difference partial x 1.05. Stores both into the
// model and returns them. Requires resolution >= 64 per axis for d <= 2;
// coarser lattices are allowed for d >= 3 with a warning on stderr.
std::pair<double, double> copula_density_bounds(CopulaModel& m, int resolution);

// count rows of d coordinates, row-major, each marginally uniform on [0,1].
std::vector<double> sample_copula(const CopulaModel& m, std::size_t count,
                                  Stream& rng);

// c(F_1(x_1),...,F_d(x_d)) * prod_i f_i(x_i), the copula-weighted joint pdf.
double joint_pdf_weight(const CopulaModel& m,
                        const std::vector<double>& cdf_values,
                        double marginal_pdf_product);

} // namespace qra::copula
