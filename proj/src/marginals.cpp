#include "qra/marginals.hpp"

#include <cmath>
#include <stdexcept>

#include "qra/distributions.hpp"
#include "qra/kernels.hpp"
#include "qra/parallel.hpp"

namespace qra::marg {

using special::std_normal_cdf;
using special::std_normal_pdf;
using special::std_normal_quantile;

MarginalSpec MarginalSpec::normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("normal: sigma must be positive");
  MarginalSpec s;
  s.family = Family::normal;
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

MarginalSpec MarginalSpec::lognormal(double mu, double sigma, double shift) {
  if (!(sigma > 0.0)) throw std::invalid_argument("lognormal: sigma must be positive");
  MarginalSpec s;
  s.family = Family::lognormal;
  s.mu = mu;
  s.sigma = sigma;
  s.shift = shift;
  return s;
}

MarginalSpec MarginalSpec::mixture(double w, double mu1, double sigma1,
                                   double mu2, double sigma2) {
  if (!(w >= 0.0 && w <= 1.0))
    throw std::invalid_argument("mixture: weight must be in [0,1]");
  if (!(sigma1 > 0.0 && sigma2 > 0.0))
    throw std::invalid_argument("mixture: sigmas must be positive");
  MarginalSpec s;
  s.family = Family::mixture;
  s.w = w;
  s.mu1 = mu1;
  s.sigma1 = sigma1;
  s.mu2 = mu2;
  s.sigma2 = sigma2;
  return s;
}

double MarginalSpec::pdf(double x) const {
  switch (family) {
    case Family::normal:
      return std_normal_pdf((x - mu) / sigma) / sigma;
    case Family::lognormal: {
      if (x <= shift) return 0.0;
      const double y = x - shift;
      return std_normal_pdf((std::log(y) - mu) / sigma) / (y * sigma);
    }
    case Family::mixture:
      return w * std_normal_pdf((x - mu1) / sigma1) / sigma1 +
             (1.0 - w) * std_normal_pdf((x - mu2) / sigma2) / sigma2;
  }
  return 0.0;
}

double MarginalSpec::cdf(double x) const {
  switch (family) {
    case Family::normal:
      return std_normal_cdf((x - mu) / sigma);
    case Family::lognormal:
      return x <= shift ? 0.0
                        : std_normal_cdf((std::log(x - shift) - mu) / sigma);
    case Family::mixture:
      return w * std_normal_cdf((x - mu1) / sigma1) +
             (1.0 - w) * std_normal_cdf((x - mu2) / sigma2);
  }
  return 0.0;
}

double MarginalSpec::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("MarginalSpec::quantile: p must be in (0,1)");
  switch (family) {
    case Family::normal:
      return mu + sigma * std_normal_quantile(p);
    case Family::lognormal:
      return shift + std::exp(mu + sigma * std_normal_quantile(p));
    case Family::mixture: {
      // Monotone CDF; bisection with a Newton polish.
      double lo = std::min(mu1 - 12.0 * sigma1, mu2 - 12.0 * sigma2);
      double hi = std::max(mu1 + 12.0 * sigma1, mu2 + 12.0 * sigma2);
      while (cdf(lo) > p) lo -= (hi - lo);
      while (cdf(hi) < p) hi += (hi - lo);
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 200; ++it) {
        const double f = cdf(x) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double d = pdf(x);
        double next = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-13 * (1.0 + std::fabs(x))) return next;
        x = next;
      }
      return x;
    }
  }
  return 0.0;
}

double MarginalSpec::mean() const {
  switch (family) {
    case Family::normal: return mu;
    case Family::lognormal: return shift + std::exp(mu + 0.5 * sigma * sigma);
    case Family::mixture: return w * mu1 + (1.0 - w) * mu2;
  }
  return 0.0;
}

double MarginalSpec::stddev() const {
  switch (family) {
    case Family::normal: return sigma;
    case Family::lognormal: {
      const double m = std::exp(mu + 0.5 * sigma * sigma);
      return m * std::sqrt(std::expm1(sigma * sigma));
    }
    case Family::mixture: {
      const double m = mean();
      const double ex2 = w * (sigma1 * sigma1 + mu1 * mu1) +
                         (1.0 - w) * (sigma2 * sigma2 + mu2 * mu2);
      return std::sqrt(std::max(0.0, ex2 - m * m));
    }
  }
  return 0.0;
}

DiscretizedMarginal discretize(const MarginalSpec& spec, int n_bits, double lo,
                               double hi) {
  if (!(lo < hi)) throw std::invalid_argument("discretize: requires lo < hi");
  if (n_bits < 2 || n_bits > 20)
    throw std::invalid_argument("discretize: n_bits must be in [2, 20]");
  const std::size_t n = std::size_t{1} << n_bits;
  DiscretizedMarginal dm;
  dm.grid.resize(n);
  dm.weights.resize(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    dm.grid[j] = lo + static_cast<double>(j) * step;
    dm.weights[j] = spec.pdf(dm.grid[j]);
  }
  const double total = kern::reduce_sum(dm.weights.data(), n);
  if (!(total > 0.0))
    throw std::invalid_argument("discretize: pdf vanishes on [lo, hi]");
  dm.norm_const = total;
  const double inv = 1.0 / total;
  for (auto& w : dm.weights) w *= inv;
  return dm;
}

special::TruncationWindow select_truncation(const MarginalSpec& spec, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("select_truncation: eps must be in (0,1)");
  for (double L = 0.5; L <= 1e4; L += 0.5) {
    if (spec.cdf(-L) <= 0.5 * eps && spec.cdf(L) >= 1.0 - eps)
      return special::TruncationWindow{L};
  }
  throw std::runtime_error("select_truncation: no window found below L = 1e4");
}

double grid_expectation(const DiscretizedMarginal& dm,
                        const std::function<double(double)>& phi) {
  const std::size_t n = dm.grid.size();
  std::vector<double> vals(n);
  for (std::size_t j = 0; j < n; ++j) vals[j] = phi(dm.grid[j]);
  return kern::dot(vals.data(), dm.weights.data(), n);
}

double product_expectation(const std::vector<DiscretizedMarginal>& dms,
                           const std::function<double(const double*)>& phi,
                           unsigned n_threads) {
  if (dms.empty()) throw std::invalid_argument("product_expectation: no marginals");
  const std::size_t d = dms.size();
  std::size_t cells = 1;
  for (const auto& dm : dms) {
    const std::size_t n = dm.grid.size();
    if (cells > (std::size_t{1} << 24) / n)
      throw std::runtime_error(
          "product_expectation: product grid exceeds 2^24 cells");
    cells *= n;
  }

  const std::size_t n0 = dms[0].grid.size();
  std::vector<double> partials(n0, 0.0);

  parallel_for(n0, n_threads, [&](std::size_t j0) {
    std::vector<double> x(d);
    x[0] = dms[0].grid[j0];
    double acc = 0.0;
    if (d == 1) {
      acc = phi(x.data());
    } else {
      // Odometer over the middle axes; the innermost axis is a tight loop.
      std::vector<std::size_t> idx(d, 0);
      const auto& last = dms[d - 1];
      const std::size_t nl = last.grid.size();
      for (;;) {
        double wmid = 1.0;
        for (std::size_t ax = 1; ax + 1 < d; ++ax) {
          x[ax] = dms[ax].grid[idx[ax]];
          wmid *= dms[ax].weights[idx[ax]];
        }
        double inner = 0.0;
        for (std::size_t jl = 0; jl < nl; ++jl) {
          x[d - 1] = last.grid[jl];
          inner += last.weights[jl] * phi(x.data());
        }
        acc += wmid * inner;
        // advance middle axes
        std::size_t ax = d >= 2 ? d - 2 : 0;
        bool done = true;
        while (ax >= 1) {
          if (++idx[ax] < dms[ax].grid.size()) { done = false; break; }
          idx[ax] = 0;
          --ax;
        }
        if (done) break;
      }
    }
    partials[j0] = dms[0].weights[j0] * acc;
  });

  return kern::reduce_sum(partials.data(), n0);
}

} // namespace qra::marg
