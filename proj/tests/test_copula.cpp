#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qra/copula.hpp"
#include "qra/distributions.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace qra;
using copula::CopulaModel;

TEST_CASE("model validation") {
  CHECK_THROWS(CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 2.0})); // diagonal
  CHECK_THROWS(CopulaModel::gaussian(2, {1.0, 0.4, 0.5, 1.0})); // symmetry
  CHECK_THROWS(CopulaModel::gaussian(2, {1.0, 1.2, 1.2, 1.0})); // not PD
  CHECK_THROWS(CopulaModel::student_t(2, {1.0, 0.0, 0.0, 1.0}, -1.0));
  CHECK_THROWS(CopulaModel::gaussian(2, {1.0, 0.0, 0.0, 1.0}, 0.7)); // clip
}

TEST_CASE("density closed-form points") {
  const auto ind = CopulaModel::independence(3);
  CHECK(copula_density(ind, {0.2, 0.9, 0.5}) == doctest::Approx(1.0));

  const auto eye = CopulaModel::gaussian(2, {1.0, 0.0, 0.0, 1.0});
  for (double u : {0.1, 0.5, 0.93})
    CHECK_NEAR(copula_density(eye, {u, 0.37}), 1.0, 1e-12);

  const auto g = CopulaModel::gaussian(2, {1.0, 0.6, 0.6, 1.0});
  CHECK_NEAR(copula_density(g, {0.5, 0.5}), 1.25, 1e-12);

  // dimension mismatch
  CHECK_THROWS_AS(copula_density(g, {0.5, 0.5, 0.5}), std::invalid_argument);

  // large-dof t copula approaches the gaussian
  const auto t6 = CopulaModel::student_t(2, {1.0, 0.6, 0.6, 1.0}, 1e6);
  CHECK_NEAR(copula_density(t6, {0.3, 0.7}), copula_density(g, {0.3, 0.7}), 1e-3);
}

TEST_CASE("clamping is idempotent and exact") {
  const auto g = CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0});
  const auto clamp = [&](double u) {
    return std::min(std::max(u, g.clip), 1.0 - g.clip);
  };
  for (double u : {-0.2, 0.0, 1e-9, 0.4, 1.0, 1.3}) {
    const double direct = copula_density(g, {u, 0.8});
    const double clamped = copula_density(g, {clamp(u), 0.8});
    CHECK(direct == clamped);
  }
}

TEST_CASE("exchangeable symmetry") {
  const auto g = CopulaModel::gaussian(2, {1.0, 0.45, 0.45, 1.0});
  for (double u = 0.05; u < 1.0; u += 0.17)
    for (double v = 0.05; v < 1.0; v += 0.17)
      CHECK_NEAR(copula_density(g, {u, v}), copula_density(g, {v, u}), 1e-13);
}

TEST_CASE("density bounds on the clipped cube") {
  auto ind = CopulaModel::independence(2);
  const auto [cmax_i, cpmax_i] = copula_density_bounds(ind, 64);
  CHECK(cmax_i == doctest::Approx(1.05));
  CHECK(cpmax_i <= 1e-6);

  auto g1 = CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0}, 1e-3);
  const auto [cmax1, cpmax1] = copula_density_bounds(g1, 128);
  CHECK(cmax1 > 1.0);
  CHECK(std::isfinite(cmax1));
  CHECK(cpmax1 > 0.0);
  CHECK(std::isfinite(cpmax1));
  CHECK(g1.bounds_set());

  // density sup on the clipped cube sits at the aligned corner; for rho = 0.5
  // that value is det^{-1/2} exp(z_c^2 / 3) with z_c the clip quantile.
  const double zc = special::std_normal_quantile(1.0 - 1e-3);
  const double corner = std::exp(zc * zc / 3.0) / std::sqrt(0.75);
  CHECK_NEAR(cmax1, 1.05 * corner, 1e-6 * corner);

  // a larger clip shrinks the cube, so c_max cannot grow
  auto g2 = CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0}, 1e-2);
  const auto [cmax2, cpmax2] = copula_density_bounds(g2, 128);
  CHECK(cmax2 <= cmax1 + 1e-12);
  CHECK(cpmax2 <= cpmax1 + 1e-12);

  CHECK_THROWS(copula_density_bounds(g2, 32)); // resolution floor for d = 2
}

TEST_CASE("density integrates to one over the clipped square") {
  auto g = CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0}, 1e-3);
  const int n = 512;
  const double h = (1.0 - 2.0 * g.clip) / n;
  double acc = 0.0;
  std::vector<double> z(2);
  for (int i = 0; i < n; ++i) {
    const double u = g.clip + (i + 0.5) * h;
    z[0] = copula::z_from_u(g, u);
    for (int j = 0; j < n; ++j) {
      const double v = g.clip + (j + 0.5) * h;
      z[1] = copula::z_from_u(g, v);
      acc += copula::density_z(g, z.data()) * h * h;
    }
  }
  CHECK_NEAR(acc, 1.0, 0.02);
}

TEST_CASE("sampling: uniform marginals, correlation, comonotone limit") {
  const std::size_t n = 10000;

  auto ind = CopulaModel::independence(2);
  Stream rng1(101);
  const auto u_ind = sample_copula(ind, n, rng1);
  std::vector<double> col0(n), col1(n);
  for (std::size_t r = 0; r < n; ++r) {
    col0[r] = u_ind[2 * r];
    col1[r] = u_ind[2 * r + 1];
  }
  // KS against U(0,1) at the 1% level
  const double crit = 1.6276 / std::sqrt(static_cast<double>(n));
  CHECK(oracles::ks_uniform(col0) < crit);
  CHECK(oracles::ks_uniform(col1) < crit);

  auto g = CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0});
  Stream rng2(202);
  const auto u_g = sample_copula(g, n, rng2);
  std::vector<double> z0(n), z1(n);
  for (std::size_t r = 0; r < n; ++r) {
    z0[r] = special::std_normal_quantile(u_g[2 * r]);
    z1[r] = special::std_normal_quantile(u_g[2 * r + 1]);
  }
  CHECK_NEAR(oracles::pearson_corr(z0, z1), 0.5, 0.03);
  // sampled coordinates remain marginally uniform
  std::vector<double> gc0(n);
  for (std::size_t r = 0; r < n; ++r) gc0[r] = u_g[2 * r];
  CHECK(oracles::ks_uniform(gc0) < crit);

  auto tight = CopulaModel::gaussian(2, {1.0, 0.999, 0.999, 1.0});
  Stream rng3(303);
  const auto u_t = sample_copula(tight, n, rng3);
  std::vector<double> a(n), b(n);
  for (std::size_t r = 0; r < n; ++r) {
    a[r] = u_t[2 * r];
    b[r] = u_t[2 * r + 1];
  }
  CHECK(oracles::spearman_corr(a, b) > 0.99);

  // student-t coordinates are marginally uniform as well
  auto st = CopulaModel::student_t(2, {1.0, 0.5, 0.5, 1.0}, 4.0);
  Stream rng4(404);
  const auto u_s = sample_copula(st, n, rng4);
  std::vector<double> sc(n);
  for (std::size_t r = 0; r < n; ++r) sc[r] = u_s[2 * r];
  CHECK(oracles::ks_uniform(sc) < crit);
}

TEST_CASE("joint pdf weight") {
  const auto ind = CopulaModel::independence(2);
  CHECK(copula::joint_pdf_weight(ind, {0.3, 0.8}, 0.42) == doctest::Approx(0.42));
  CHECK(copula::joint_pdf_weight(ind, {0.3, 0.8}, 0.0) == 0.0);
  const auto g = CopulaModel::gaussian(2, {1.0, 0.6, 0.6, 1.0});
  CHECK_NEAR(copula::joint_pdf_weight(g, {0.5, 0.5}, 0.2), 1.25 * 0.2, 1e-12);
}
