#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qra/copula.hpp"
#include "qra/marginals.hpp"
#include "qra/osde.hpp"
#include "qra/qae.hpp"

namespace qra::risk {

struct MarginalSetup {
  marg::MarginalSpec spec;
  marg::DiscretizedMarginal dm;
  special::TruncationWindow window{4.0};
  osde::SmoothnessParams smoothness;
};

struct AggregationSetup {
  std::vector<MarginalSetup> marginals;
  copula::CopulaModel copula;
  int K_cap = 128;

  std::size_t d() const { return marginals.size(); }
  double sum_lo() const;
  double sum_hi() const;
};

// Payoff g mapping into [0,1]. var_indicator is 1{s >= l}; tvar_indicator is
// the affine-rescaled tail sum ((s - s_lo)/(s_hi - s_lo)) 1{s >= l}, which
// keeps the payoff inside [0,1]; the affine map is undone after estimation.
struct PayoffSpec {
  enum class Kind { var_indicator, tvar_indicator, custom };
  Kind kind = Kind::var_indicator;
  double threshold = 0.0;
  double s_lo = 0.0, s_hi = 1.0;
  std::function<double(const double*, std::size_t)> custom;

  static PayoffSpec var_indicator(double l);
  static PayoffSpec tvar_indicator(double l, double s_lo, double s_hi);

  double operator()(const double* x, std::size_t d) const;
};

struct PhiHat {
  std::function<double(const double*)> fn;
  std::shared_ptr<std::atomic<long>> clip_count;
};

// (1/c_max) g(x) c(F_1(x_1),...,F_d(x_d)) with the estimated (or supplied)
// marginal CDFs; values above 1 are clipped and counted.
PhiHat build_phi_hat(const AggregationSetup& setup,
                     const std::vector<std::function<double(double)>>& cdfs,
                     const PayoffSpec& payoff);

struct EstRmOptions {
  qae::Mode mode = qae::Mode::sampled;
  std::uint64_t stream_key = 0;
  unsigned threads = 0;
  bool use_true_cdfs = false; // substitute the analytic marginal CDFs
};

struct EstRmResult {
  double estimate = 0.0;
  qae::QueryLedger ledger;
  std::vector<int> K_used;
  std::vector<double> L_used;
  std::vector<double> marginal_sup_err; // vs analytic CDF on a probe grid
  long clip_violations = 0;
};

// Two-stage estimation of E[g(X)] under the copula-coupled joint law:
// marginal CDFs via est_marg at accuracy eps/(2 d c'_max), confidence
// delta/(2d), then one QMCI of the assembled payoff at eps/(2 c_max),
// delta/2; the output is c_max times that estimate.
EstRmResult est_rm(const AggregationSetup& setup, const PayoffSpec& payoff,
                   double eps, double delta, const EstRmOptions& opt);

struct TailProbResult {
  double probability = 0.0;
  qae::QueryLedger ledger;
  EstRmResult detail;
};

// Pr(S >= l) with S = X_1 + ... + X_d.
TailProbResult tail_prob(const AggregationSetup& setup, double l, double eps_p,
                         double delta_p, const EstRmOptions& opt);

struct StageDiagnostics {
  std::vector<int> K;
  std::vector<double> L;
  std::vector<double> marginal_sup_err;
  double c_max = 0.0, c_prime_max = 0.0;
  double epsilon = 0.0, delta = 0.0;
  double tol = 0.0;
  int probes = 0;
  long clip_violations = 0;
  double var_threshold = 0.0; // TVaR only: the l_alpha used
};

struct RiskReport {
  std::string measure; // "var" | "tvar"
  double alpha = 0.0;
  double value = 0.0;
  double tail_prob_at_value = 0.0;
  qae::QueryLedger total_queries;
  StageDiagnostics diag;
};

// Binary search for the smallest l with Pr(S >= l) <= 1 - alpha over the grid
// sum range, each probe a tail_prob call at confidence delta / #probes;
// returns the upper bracket end. tol defaults to the coarsest grid spacing.
RiskReport var(const AggregationSetup& setup, double alpha, double eps_p,
               double delta, const EstRmOptions& opt,
               std::optional<double> tol = std::nullopt);

// TVaR at the threshold l_alpha from a prior var run: estimates the affine
// tail payoff at accuracy eps and Pr(S >= l_alpha) at eps_tail, un-maps
// E[S 1_{S >= l_alpha}] and divides by 1 - alpha.
RiskReport tvar(const AggregationSetup& setup, double alpha, double l_alpha,
                double eps, double delta, const EstRmOptions& opt,
                std::optional<double> eps_tail = std::nullopt);

} // namespace qra::risk
