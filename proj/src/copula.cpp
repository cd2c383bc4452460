#include "qra/copula.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "qra/distributions.hpp"

namespace qra::copula {

namespace {

// Cholesky factor of a symmetric positive-definite matrix; throws if the
// matrix is not PD (this is also the validity check for correlation input).
std::vector<double> cholesky(const std::vector<double>& a, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (!(s > 0.0))
          throw std::invalid_argument("copula: correlation matrix is not positive definite");
        l[i * d + i] = std::sqrt(s);
      } else {
        l[i * d + j] = s / l[j * d + j];
      }
    }
  }
  return l;
}

std::vector<double> inverse_from_cholesky(const std::vector<double>& l,
                                          std::size_t d) {
  // Solve L L^T X = I column by column.
  std::vector<double> inv(d * d, 0.0);
  std::vector<double> y(d), x(d);
  for (std::size_t col = 0; col < d; ++col) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * y[k];
      y[i] = s / l[i * d + i];
    }
    for (std::size_t ii = d; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < d; ++k) s -= l[k * d + ii] * x[k];
      x[ii] = s / l[ii * d + ii];
    }
    for (std::size_t i = 0; i < d; ++i) inv[i * d + col] = x[i];
  }
  return inv;
}

void validate_corr(const std::vector<double>& corr, std::size_t d) {
  if (corr.size() != d * d)
    throw std::invalid_argument("copula: correlation matrix has wrong size");
  for (std::size_t i = 0; i < d; ++i) {
    if (std::fabs(corr[i * d + i] - 1.0) > 1e-12)
      throw std::invalid_argument("copula: correlation matrix must have unit diagonal");
    for (std::size_t j = 0; j < i; ++j)
      if (std::fabs(corr[i * d + j] - corr[j * d + i]) > 1e-12)
        throw std::invalid_argument("copula: correlation matrix must be symmetric");
  }
}

CopulaModel finish(CopulaModel m) {
  m.chol = cholesky(m.corr, m.d);
  m.inv = inverse_from_cholesky(m.chol, m.d);
  m.log_det = 0.0;
  for (std::size_t i = 0; i < m.d; ++i)
    m.log_det += 2.0 * std::log(m.chol[i * m.d + i]);
  return m;
}

void validate_clip(double clip) {
  if (!(clip > 0.0 && clip < 0.5))
    throw std::invalid_argument("copula: clip must be in (0, 0.5)");
}

double clamp_u(const CopulaModel& m, double u) {
  return u < m.clip ? m.clip : (u > 1.0 - m.clip ? 1.0 - m.clip : u);
}

// Marsaglia-Tsang gamma(shape, scale 1).
double gamma_draw(double shape, Stream& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform01();
    return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double dd = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * dd);
  for (;;) {
    double x, v;
    do {
      x = special::std_normal_quantile(rng.uniform01());
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (std::log(u) < 0.5 * x * x + dd - dd * v + dd * std::log(v)) return dd * v;
  }
}

} // namespace

CopulaModel CopulaModel::independence(std::size_t d, double clip) {
  if (d == 0) throw std::invalid_argument("copula: dimension must be positive");
  validate_clip(clip);
  CopulaModel m;
  m.kind = Kind::independence;
  m.d = d;
  m.clip = clip;
  m.corr.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m.corr[i * d + i] = 1.0;
  return finish(std::move(m));
}

CopulaModel CopulaModel::gaussian(std::size_t d, const std::vector<double>& corr,
                                  double clip) {
  if (d == 0) throw std::invalid_argument("copula: dimension must be positive");
  validate_clip(clip);
  validate_corr(corr, d);
  CopulaModel m;
  m.kind = Kind::gaussian;
  m.d = d;
  m.clip = clip;
  m.corr = corr;
  return finish(std::move(m));
}

CopulaModel CopulaModel::student_t(std::size_t d, const std::vector<double>& corr,
                                   double nu, double clip) {
  if (d == 0) throw std::invalid_argument("copula: dimension must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("copula: dof must be positive");
  validate_clip(clip);
  validate_corr(corr, d);
  CopulaModel m;
  m.kind = Kind::student_t;
  m.d = d;
  m.clip = clip;
  m.corr = corr;
  m.nu = nu;
  return finish(std::move(m));
}

double z_from_u(const CopulaModel& m, double u) {
  const double uc = clamp_u(m, u);
  switch (m.kind) {
    case Kind::independence: return uc;
    case Kind::gaussian: return special::std_normal_quantile(uc);
    case Kind::student_t: return special::student_t_quantile(m.nu, uc);
  }
  return uc;
}

double density_z(const CopulaModel& m, const double* z) {
  const std::size_t d = m.d;
  switch (m.kind) {
    case Kind::independence:
      return 1.0;
    case Kind::gaussian: {
      // det(R)^{-1/2} exp(-1/2 z^T (R^{-1} - I) z)
      double quad = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += m.inv[i * d + j] * z[j];
        quad += z[i] * (row - z[i]);
      }
      return std::exp(-0.5 * quad - 0.5 * m.log_det);
    }
    case Kind::student_t: {
      const double nu = m.nu;
      double quad = 0.0, sum_log1p = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += m.inv[i * d + j] * z[j];
        quad += z[i] * row;
        sum_log1p += std::log1p(z[i] * z[i] / nu);
      }
      const double dd = static_cast<double>(d);
      const double lg = std::lgamma(0.5 * (nu + dd)) +
                        (dd - 1.0) * std::lgamma(0.5 * nu) -
                        dd * std::lgamma(0.5 * (nu + 1.0));
      return std::exp(lg - 0.5 * m.log_det -
                      0.5 * (nu + dd) * std::log1p(quad / nu) +
                      0.5 * (nu + 1.0) * sum_log1p);
    }
  }
  return 1.0;
}

double copula_density(const CopulaModel& m, const double* u, std::size_t d) {
  if (d != m.d) throw std::invalid_argument("copula_density: dimension mismatch");
  if (m.kind == Kind::independence) return 1.0;
  std::vector<double> z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = z_from_u(m, u[i]);
  return density_z(m, z.data());
}

double copula_density(const CopulaModel& m, const std::vector<double>& u) {
  return copula_density(m, u.data(), u.size());
}

std::pair<double, double> copula_density_bounds(CopulaModel& m, int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("copula_density_bounds: resolution too small");
  if (m.d <= 2 && resolution < 64)
    throw std::invalid_argument(
        "copula_density_bounds: resolution must be >= 64 per axis for d <= 2");
  if (m.d >= 3 && resolution < 64)
    std::cerr << "warning: copula bounds lattice is coarse (" << resolution
              << " per axis, d = " << m.d << ")\n";

  const std::size_t d = m.d;
  const std::size_t res = static_cast<std::size_t>(resolution);
  std::size_t cells = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (cells > (std::size_t{1} << 26) / res)
      throw std::runtime_error("copula_density_bounds: lattice too large");
    cells *= res;
  }

  const double h = (1.0 - 2.0 * m.clip) / static_cast<double>(res - 1);
  std::vector<double> zs(res);
  for (std::size_t i = 0; i < res; ++i)
    zs[i] = z_from_u(m, m.clip + static_cast<double>(i) * h);

  std::vector<double> dens(cells);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> z(d);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t ax = 0; ax < d; ++ax) z[ax] = zs[idx[ax]];
    dens[c] = density_z(m, z.data());
    for (std::size_t ax = d; ax-- > 0;) {
      if (++idx[ax] < res) break;
      idx[ax] = 0;
    }
  }

  double max_c = 0.0;
  for (double v : dens) max_c = std::max(max_c, v);

  // Central differences along each axis (one-sided at lattice edges).
  double max_diff = 0.0;
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t ax = d; ax-- > 1;) stride[ax - 1] = stride[ax] * res;
  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t ax = 0; ax < d; ++ax) {
      const std::size_t i = idx[ax];
      double g;
      if (i == 0)
        g = (dens[c + stride[ax]] - dens[c]) / h;
      else if (i == res - 1)
        g = (dens[c] - dens[c - stride[ax]]) / h;
      else
        g = (dens[c + stride[ax]] - dens[c - stride[ax]]) / (2.0 * h);
      max_diff = std::max(max_diff, std::fabs(g));
    }
    for (std::size_t ax = d; ax-- > 0;) {
      if (++idx[ax] < res) break;
      idx[ax] = 0;
    }
  }

  m.c_max = 1.05 * max_c;
  m.c_prime_max = std::max(1.05 * max_diff, 1e-9);
  return {m.c_max, m.c_prime_max};
}

std::vector<double> sample_copula(const CopulaModel& m, std::size_t count,
                                  Stream& rng) {
  const std::size_t d = m.d;
  std::vector<double> out(count * d);
  std::vector<double> eta(d), z(d);
  for (std::size_t r = 0; r < count; ++r) {
    if (m.kind == Kind::independence) {
      for (std::size_t i = 0; i < d; ++i) out[r * d + i] = rng.uniform01();
      continue;
    }
    for (std::size_t i = 0; i < d; ++i)
      eta[i] = special::std_normal_quantile(rng.uniform01());
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += m.chol[i * d + k] * eta[k];
      z[i] = s;
    }
    if (m.kind == Kind::gaussian) {
      for (std::size_t i = 0; i < d; ++i)
        out[r * d + i] = special::std_normal_cdf(z[i]);
    } else {
      const double chi2 = 2.0 * gamma_draw(0.5 * m.nu, rng);
      const double scale = std::sqrt(m.nu / chi2);
      for (std::size_t i = 0; i < d; ++i)
        out[r * d + i] = special::student_t_cdf(m.nu, z[i] * scale);
    }
  }
  return out;
}

double joint_pdf_weight(const CopulaModel& m,
                        const std::vector<double>& cdf_values,
                        double marginal_pdf_product) {
  return copula_density(m, cdf_values) * marginal_pdf_product;
}

} // namespace qra::copula
