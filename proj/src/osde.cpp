#include "qra/osde.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "qra/hermite.hpp"
#include "qra/kernels.hpp"
#include "qra/parallel.hpp"

namespace qra::osde {

double EstimatedCdf::eval_cdf(double x, bool clamped) const {
  double v;
  if (x < -L) {
    v = 0.0;
  } else if (x >= L) {
    v = 1.0;
  } else {
    const auto ints = special::hermite_integral_row(K, L, x);
    v = kern::dot(coefficients.data(), ints.data(), ints.size());
  }
  if (clamped) v = std::min(1.0, std::max(0.0, v));
  return v;
}

double EstimatedCdf::eval_pdf(double x) const {
  const auto row = special::hermite_function_row(K, x);
  return kern::dot(coefficients.data(), row.data(), row.size());
}

int choose_K(double L, const SmoothnessParams& sp, double eps, int K_cap) {
  if (!(L > 0.0) || !(sp.gamma > 0.0) || sp.r < 1)
    throw std::invalid_argument("choose_K: L, gamma must be positive and r >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("choose_K: eps must be in (0,1)");
  const double base = 8.0 * L * sp.gamma / eps;
  const double expo = 4.0 / (2.0 * sp.r - 1.0);
  const double raw = std::pow(base, expo);
  if (!(raw < static_cast<double>(K_cap))) {
    std::cerr << "warning: truncation order capped at K_cap = " << K_cap
              << " (formula gave " << raw << ")\n";
    return K_cap;
  }
  const int k = static_cast<int>(std::ceil(raw));
  return k < 1 ? 1 : k;
}

EstMargResult est_marg(const marg::DiscretizedMarginal& dm, int K, double L,
                       double eps, double delta, qae::Mode mode,
                       std::uint64_t stream_key, unsigned n_threads) {
  if (K < 0) throw std::invalid_argument("est_marg: K must be nonnegative");
  if (!(L > 0.0)) throw std::invalid_argument("est_marg: L must be positive");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("est_marg: eps must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("est_marg: delta must be in (0,1)");
  if (dm.lo() > -L || dm.hi() < L)
    throw std::runtime_error("est_marg: grid does not span the window [-L, L]");

  const std::size_t n = dm.grid.size();
  const std::size_t kk = static_cast<std::size_t>(K) + 1;

  // Exact amplitudes E[bar_h_k(X)] on the grid, all orders in one pass.
  std::vector<double> rows(kk * n);
  kern::hermite_rows(K, dm.grid.data(), n, rows.data());
  std::vector<double> amplitudes(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const double ak = kern::dot(rows.data() + k * n, dm.weights.data(), n);
    double bar = 0.5 + 0.5 * special::kPiQuarter * ak;
    amplitudes[k] = std::min(1.0, std::max(0.0, bar));
  }
  rows.clear();
  rows.shrink_to_fit();

  const double eps_k = std::sqrt(M_PI) * eps / (16.0 * L * static_cast<double>(kk));
  const double delta_k = delta / static_cast<double>(kk);

  EstMargResult out;
  out.cdf.K = K;
  out.cdf.L = L;
  out.cdf.coefficients.resize(kk);
  std::vector<qae::QueryLedger> ledgers(kk);

  parallel_for(kk, n_threads, [&](std::size_t k) {
    const auto res =
        qae::qmci([&, k] { return amplitudes[k]; }, "bar_hermite", eps_k,
                  delta_k, mode, derive_key(stream_key, {k}));
    out.cdf.coefficients[k] =
        (2.0 * res.estimate - 1.0) * special::kPiQuarterInv;
    ledgers[k] = res.ledger;
  });

  for (const auto& l : ledgers) out.ledger.merge(l);
  return out;
}

} // namespace qra::osde
