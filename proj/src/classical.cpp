#include "qra/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qra/kernels.hpp"
#include "qra/parallel.hpp"

namespace qra::classical {

namespace {
constexpr std::uint64_t kStageMarginal = 21;
constexpr std::uint64_t kStageCopula = 22;
} // namespace

std::vector<double> SampleMatrix::row_sums() const {
  std::vector<double> s(N, 0.0);
  for (std::size_t r = 0; r < N; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += joint[r * d + i];
    s[r] = acc;
  }
  return s;
}

std::vector<double> sample_marginal(const marg::MarginalSpec& spec,
                                    std::size_t n, Stream& rng) {
  if (n < 1) throw std::invalid_argument("sample_marginal: n must be >= 1");
  std::vector<double> out(n);
  for (auto& v : out) v = spec.quantile(rng.uniform01());
  std::sort(out.begin(), out.end());
  return out;
}

double percentile_function(const std::vector<double>& sorted, double u) {
  if (sorted.empty())
    throw std::invalid_argument("percentile_function: empty sample");
  if (!(u >= 0.0 && u <= 1.0))
    throw std::domain_error("percentile_function: u must be in [0,1]");
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(u * n));
  if (k < 1) k = 1;
  if (k > sorted.size()) k = sorted.size();
  return sorted[k - 1];
}

SampleMatrix alg1_joint_samples(const std::vector<marg::MarginalSpec>& specs,
                                const copula::CopulaModel& model, std::size_t n,
                                std::uint64_t stream_key, unsigned n_threads) {
  if (specs.empty())
    throw std::invalid_argument("alg1_joint_samples: no marginals");
  if (model.d != specs.size())
    throw std::invalid_argument("alg1_joint_samples: copula dimension mismatch");

  SampleMatrix sm;
  sm.N = n;
  sm.d = specs.size();
  sm.columns.resize(sm.d);

  parallel_for(sm.d, n_threads, [&](std::size_t i) {
    Stream rng(derive_key(stream_key, {kStageMarginal, i}));
    sm.columns[i] = sample_marginal(specs[i], n, rng);
  });

  Stream crng(derive_key(stream_key, {kStageCopula}));
  const auto u = copula::sample_copula(model, n, crng);

  sm.joint.resize(n * sm.d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < sm.d; ++i)
      sm.joint[r * sm.d + i] = percentile_function(sm.columns[i], u[r * sm.d + i]);
  return sm;
}

double classical_var(const SampleMatrix& sm, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("classical_var: alpha must be in (0,1)");
  if (sm.N < 10) throw std::invalid_argument("classical_var: needs N >= 10");
  auto sums = sm.row_sums();
  std::sort(sums.begin(), sums.end());
  return percentile_function(sums, alpha);
}

double classical_tvar(const SampleMatrix& sm, double alpha) {
  const double v = classical_var(sm, alpha);
  const auto sums = sm.row_sums();
  double count = 0.0, tail = 0.0;
  kern::tail_sums(sums.data(), sums.size(), v, &count, &tail);
  if (count <= 0.0)
    throw std::runtime_error("classical_tvar: no row sums exceed the VaR");
  return tail / count;
}

} // namespace qra::classical
