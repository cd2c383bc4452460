#pragma once

#include <cstdint>
#include <vector>

#include "qra/copula.hpp"
#include "qra/marginals.hpp"

namespace qra::classical {

// Sample-sort-rearrange joint sampling: sorted marginal sample columns plus
// the rearranged joint rows (row-major, N x d).
struct SampleMatrix {
  std::size_t N = 0;
  std::size_t d = 0;
  std::vector<std::vector<double>> columns; // each sorted ascending
  std::vector<double> joint;

  std::vector<double> row_sums() const;
};

// N i.i.d. inverse-transform draws, sorted ascending.
std::vector<double> sample_marginal(const marg::MarginalSpec& spec,
                                    std::size_t n, Stream& rng);

// Empirical step-function quantile: u = 0 maps to the first element,
// u in ((k-1)/N, k/N] to the k-th.
double percentile_function(const std::vector<double>& sorted, double u);

SampleMatrix alg1_joint_samples(const std::vector<marg::MarginalSpec>& specs,
                                const copula::CopulaModel& model, std::size_t n,
                                std::uint64_t stream_key,
                                unsigned n_threads = 0);

double classical_var(const SampleMatrix& sm, double alpha);
double classical_tvar(const SampleMatrix& sm, double alpha);

} // namespace qra::classical
