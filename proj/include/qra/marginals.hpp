#pragma once

#include <functional>
#include <vector>

#include "qra/hermite.hpp"

namespace qra::marg {

enum class Family { normal, lognormal, mixture };

// A marginal risk variable with closed-form pdf/cdf/quantile. The supported
// families: normal(mu, sigma), shifted lognormal(mu, sigma, shift), and a
// two-component normal mixture(w, mu1, sigma1, mu2, sigma2).
struct MarginalSpec {
  Family family = Family::normal;
  double mu = 0.0, sigma = 1.0, shift = 0.0;
  double w = 0.5, mu1 = 0.0, sigma1 = 1.0, mu2 = 0.0, sigma2 = 1.0;

  static MarginalSpec normal(double mu, double sigma);
  static MarginalSpec lognormal(double mu, double sigma, double shift);
  static MarginalSpec mixture(double w, double mu1, double sigma1, double mu2,
                              double sigma2);

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  double mean() const;
  double stddev() const;
};

// Distribution-level stand-in for the state-preparation oracle: a uniform
// grid of 2^n points with normalized probability weights proportional to the
// pdf. norm_const keeps the raw sum of pdf values for diagnostics.
struct DiscretizedMarginal {
  std::vector<double> grid;
  std::vector<double> weights;
  double norm_const = 0.0;

  double lo() const { return grid.front(); }
  double hi() const { return grid.back(); }
  double spacing() const {
    return (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  }
};

DiscretizedMarginal discretize(const MarginalSpec& spec, int n_bits, double lo,
                               double hi);

// Smallest L on the 0.5-step lattice with F(-L) <= eps/2 and F(L) >= 1 - eps.
special::TruncationWindow select_truncation(const MarginalSpec& spec, double eps);

// Exact amplitude sum_j phi(x_j) w_j; this is the value the simulated QAE
// estimates.
double grid_expectation(const DiscretizedMarginal& dm,
                        const std::function<double(double)>& phi);

// Exact expectation over the product grid of independent marginals. Guarded
// to at most 2^24 cells; parallel over the outermost axis with per-row
// partials combined in index order.
double product_expectation(const std::vector<DiscretizedMarginal>& dms,
                           const std::function<double(const double*)>& phi,
                           unsigned n_threads = 0);

} // namespace qra::marg
