#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qra/qae.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace qra;
using qae::OutcomeSampler;

namespace {

double qae_error_band(double a, std::uint64_t t) {
  const double td = static_cast<double>(t);
  return 2.0 * M_PI * std::sqrt(a * (1.0 - a)) / td + M_PI * M_PI / (td * td);
}

constexpr double kQaeSuccessFloor = 0.8105694691387022; // 8 / pi^2

} // namespace

TEST_CASE("degenerate amplitudes are exact") {
  Stream rng(1);
  for (int i = 0; i < 200; ++i) {
    CHECK(qae::qae_sample(0.0, 64, rng) == 0.0);
    CHECK(qae::qae_sample(1.0, 8, rng) == 1.0);
  }
}

TEST_CASE("outcome pmf sums to one") {
  for (double a : {0.0, 0.1, 0.25, 0.37, 0.5, 0.73, 0.9, 1.0}) {
    for (std::uint64_t t : {std::uint64_t{16}, std::uint64_t{64}, std::uint64_t{256},
                            std::uint64_t{4096}}) {
      OutcomeSampler s(a, t, OutcomeSampler::Path::enumerate);
      CHECK_NEAR(s.pmf_total(), 1.0, 1e-9);
    }
  }
}

TEST_CASE("error-band coverage over the (a, t) grid") {
  const int draws = 10000;
  for (double a : {0.1, 0.25, 0.5, 0.9}) {
    for (std::uint64_t t : {std::uint64_t{16}, std::uint64_t{64}, std::uint64_t{256}}) {
      OutcomeSampler s(a, t);
      Stream rng(derive_key(7777, {static_cast<std::uint64_t>(a * 1000), t}));
      const double band = qae_error_band(a, t);
      int hits = 0;
      for (int i = 0; i < draws; ++i)
        if (std::fabs(s.draw(rng) - a) <= band) ++hits;
      const double frac = static_cast<double>(hits) / draws;
      CHECK(frac >= kQaeSuccessFloor - 0.02);
    }
  }
}

TEST_CASE("rejection sampler draws from the enumerated distribution") {
  // Force the rejection path at a size where enumeration is still available,
  // then compare empirical frequencies to the exact pmf by chi-square over
  // the high-probability outcomes.
  const double a = 0.3777;
  const std::uint64_t t = 4096;
  OutcomeSampler exact(a, t, OutcomeSampler::Path::enumerate);
  OutcomeSampler rej(a, t, OutcomeSampler::Path::reject);

  const int n = 200000;
  std::vector<int> counts(t, 0);
  Stream rng(909090);
  for (int i = 0; i < n; ++i) counts[rej.draw_outcome(rng)]++;

  const auto& p = exact.pmf();
  double chi2 = 0.0;
  int dof = 0;
  double rest_expected = 0.0;
  int rest_observed = 0;
  for (std::uint64_t y = 0; y < t; ++y) {
    const double e = p[y] * n;
    if (e >= 10.0) {
      chi2 += (counts[y] - e) * (counts[y] - e) / e;
      ++dof;
    } else {
      rest_expected += e;
      rest_observed += counts[y];
    }
  }
  if (rest_expected >= 10.0) {
    chi2 += (rest_observed - rest_expected) * (rest_observed - rest_expected) /
            rest_expected;
    ++dof;
  }
  // generous 5-sigma-ish bound: chi2 ~ dof + sqrt(2 dof) z
  CHECK(chi2 < dof + 5.0 * std::sqrt(2.0 * static_cast<double>(dof)));
  CHECK(dof > 10);
}

TEST_CASE("rejection path handles astronomically large t") {
  const std::uint64_t t = std::uint64_t{1} << 45;
  OutcomeSampler s(0.1234, t);
  Stream rng(31337);
  const double band = qae_error_band(0.1234, t);
  int hits = 0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i)
    if (std::fabs(s.draw(rng) - 0.1234) <= band) ++hits;
  CHECK(static_cast<double>(hits) / draws >= kQaeSuccessFloor - 0.03);
}

TEST_CASE("qae_run honors the mode switch") {
  Stream rng(2);
  CHECK(qae::qae_run(0.37, {64, qae::Mode::exact}, rng) == 0.37);
  const double v = qae::qae_run(0.37, {64, qae::Mode::sampled}, rng);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
  CHECK_THROWS_AS(qae::qae_run(0.37, {63, qae::Mode::exact}, rng),
                  std::invalid_argument);
}

TEST_CASE("median repetitions formula") {
  CHECK(qae::median_repetitions(0.1) == 13);
  CHECK(qae::median_repetitions(0.9) == 1);
  CHECK(qae::median_repetitions(0.5) == 5); // ln 2 / 0.1929 = 3.59 -> 5
  CHECK(qae::median_repetitions(0.01) % 2 == 1);
  CHECK_THROWS_AS(qae::median_repetitions(0.0), std::domain_error);
}

TEST_CASE("median of constant draws is that constant") {
  const auto r = qae::median_amplify([] { return 0.42; }, 0.1);
  CHECK(r.estimate == 0.42);
  CHECK(r.repetitions == 13);
}

TEST_CASE("choose_t picks the smallest sufficient power of two") {
  CHECK(qae::choose_t(0.1) == 128);
  CHECK(qae::choose_t(0.05) == 256);
  CHECK(qae::choose_t(0.02) == 1024);
  CHECK(qae::choose_t(0.01) == 2048);
  CHECK_THROWS_AS(qae::choose_t(0.0), std::domain_error);
}

TEST_CASE("qmci: exact phases, ledger accounting, exact mode parity") {
  const auto one = qae::qmci([] { return 1.0; }, "const1", 0.05, 0.1,
                             qae::Mode::sampled, 11);
  CHECK(one.estimate == 1.0);
  CHECK(one.repetitions == 13);
  CHECK(one.ledger.state_prep_queries == 13 * 256);
  CHECK(one.ledger.rotation_queries == 13 * 256);

  const auto zero = qae::qmci([] { return 0.0; }, "const0", 0.05, 0.1,
                              qae::Mode::sampled, 12);
  CHECK(zero.estimate == 0.0);

  const auto ex = qae::qmci([] { return 0.37; }, "x", 0.02, 0.05,
                            qae::Mode::exact, 13);
  const auto sm = qae::qmci([] { return 0.37; }, "x", 0.02, 0.05,
                            qae::Mode::sampled, 13);
  CHECK(ex.estimate == 0.37);
  CHECK(ex.ledger.state_prep_queries == sm.ledger.state_prep_queries);
  CHECK(ex.ledger.rotation_queries == sm.ledger.rotation_queries);
  CHECK(ex.repetitions == sm.repetitions);

  CHECK_THROWS_AS(
      qae::qmci([] { return 0.5; }, "bad", 1.5, 0.1, qae::Mode::sampled, 1),
      std::domain_error);
}

TEST_CASE("qmci hits the requested accuracy on a uniform-grid mean") {
  // uniform grid on [0,1], phi(x) = x: amplitude = 0.5 up to grid rounding
  const int n = 512;
  double a = 0.0;
  for (int j = 0; j < n; ++j) a += (static_cast<double>(j) / (n - 1)) / n;
  int ok = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const auto res = qae::qmci([a] { return a; }, "mean", 0.02, 0.05,
                               qae::Mode::sampled, derive_key(555, {static_cast<std::uint64_t>(r)}));
    if (std::fabs(res.estimate - a) <= 0.02) ++ok;
  }
  CHECK(ok >= 190); // 1 - delta = 95% per run
}

TEST_CASE("query count scales like 1/eps at fixed delta") {
  std::vector<double> log_inv_eps, log_queries;
  for (double eps : {0.1, 0.05, 0.02, 0.01}) {
    const auto res = qae::qmci([] { return 0.5; }, "scaling", eps, 0.05,
                               qae::Mode::exact, 1);
    log_inv_eps.push_back(std::log(1.0 / eps));
    log_queries.push_back(std::log(static_cast<double>(res.ledger.state_prep_queries)));
  }
  const double slope = oracles::regression_slope(log_inv_eps, log_queries);
  CHECK(slope >= 0.9);
  CHECK(slope <= 1.4);
}
