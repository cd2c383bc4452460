#pragma once

#include <cstdint>
#include <vector>

#include "qra/marginals.hpp"
#include "qra/qae.hpp"

namespace qra::osde {

// Smoothness order r and series constant gamma of the true density; user
// inputs with defaults suitable for the built-in families.
struct SmoothnessParams {
  int r = 4;
  double gamma = 1.0;
};

// Truncated Hermite expansion of a marginal CDF. Evaluation is pinned to 0
// below -L and to 1 at or above L; inside the window it is the coefficient
// sum over the definite integrals H_{k,L}.
struct EstimatedCdf {
  int K = 0;
  double L = 1.0;
  std::vector<double> coefficients; // a_0 .. a_K

  double eval_cdf(double x, bool clamped = false) const;
  double eval_pdf(double x) const;
};

// ceil((8 L gamma / eps)^{4/(2r-1)}), capped at K_cap (warning on stderr when
// the cap binds).
int choose_K(double L, const SmoothnessParams& sp, double eps, int K_cap = 128);

struct EstMargResult {
  EstimatedCdf cdf;
  qae::QueryLedger ledger;
};

// One marginal-CDF estimation pass: for k = 0..K runs the simulated QMCI on
// the payoff 1/2 + pi^{1/4}/2 h_k with per-coefficient accuracy
// sqrt(pi) eps / (16 L (K+1)) and confidence delta/(K+1), then maps the
// estimates to Hermite coefficients a_k = pi^{-1/4} (2 E_k - 1).
EstMargResult est_marg(const marg::DiscretizedMarginal& dm, int K, double L,
                       double eps, double delta, qae::Mode mode,
                       std::uint64_t stream_key, unsigned n_threads = 0);

} // namespace qra::osde
