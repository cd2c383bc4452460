#pragma once

#include <vector>

namespace qra::special {

// pi^(1/4) and friends, shared by the Hermite-function code paths.
inline constexpr double kPiQuarter = 1.3313353638003897;
inline constexpr double kPiQuarterInv = 0.7511255444649425;
inline constexpr double kSqrtTwoPi = 2.5066282746310002;

// Half-width of the interval [-L, L] on which a truncated Hermite expansion
// is trusted; outside it the estimated CDF is pinned to 0 / 1.
struct TruncationWindow {
  double L;
};

// Orthonormal Hermite function h_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)).
// Evaluated by the normalized three-term recurrence
//   h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1},
// which stays bounded (|h_k| <= pi^{-1/4}) for all orders, unlike the raw
// polynomial recurrence which overflows/cancels near k ~ 30.
double hermite_function(int k, double x);

// (h_0(x), ..., h_{k_max}(x)) in one recurrence pass.
std::vector<double> hermite_function_row(int k_max, double x);

// Payoff-shaped Hermite function: 1/2 + pi^{1/4}/2 h_k(x), inside [0,1].
double bar_hermite(int k, double x);

// Definite integral H_{k,L}(x) = int_{-L}^x h_k(t) dt for x in [-L, L].
// Seeds:
//   H_{0,L}(x) = pi^{-1/4} sqrt(2 pi) (Phi(x) - Phi(-L))
//   H_{1,L}(x) = -sqrt(2) pi^{-1/4} (e^{-x^2/2} - e^{-L^2/2})
// then the derivative identity h_k' = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}
// rearranged into
//   H_{k+1,L}(x) = sqrt(k/(k+1)) H_{k-1,L}(x) - sqrt(2/(k+1)) (h_k(x) - h_k(-L)).
double hermite_integral(int k, double L, double x);

// (H_{0,L}(x), ..., H_{k_max,L}(x)); one pass, shared by the CDF evaluator.
std::vector<double> hermite_integral_row(int k_max, double L, double x);

} // namespace qra::special
