#include "qra/risk.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "qra/distributions.hpp"
#include "qra/parallel.hpp"

namespace qra::risk {

namespace {
constexpr std::uint64_t kStageMarg = 11;
constexpr std::uint64_t kStageFinal = 12;
constexpr std::uint64_t kStageVar = 13;
constexpr std::uint64_t kStageTvarEst = 14;
constexpr std::uint64_t kStageTvarTail = 15;
} // namespace

double AggregationSetup::sum_lo() const {
  double s = 0.0;
  for (const auto& m : marginals) s += m.dm.lo();
  return s;
}

double AggregationSetup::sum_hi() const {
  double s = 0.0;
  for (const auto& m : marginals) s += m.dm.hi();
  return s;
}

PayoffSpec PayoffSpec::var_indicator(double l) {
  PayoffSpec p;
  p.kind = Kind::var_indicator;
  p.threshold = l;
  return p;
}

PayoffSpec PayoffSpec::tvar_indicator(double l, double s_lo, double s_hi) {
  if (!(s_lo < s_hi))
    throw std::invalid_argument("tvar_indicator: requires s_lo < s_hi");
  PayoffSpec p;
  p.kind = Kind::tvar_indicator;
  p.threshold = l;
  p.s_lo = s_lo;
  p.s_hi = s_hi;
  return p;
}

double PayoffSpec::operator()(const double* x, std::size_t d) const {
  if (kind == Kind::custom) return custom(x, d);
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += x[i];
  if (s < threshold) return 0.0;
  if (kind == Kind::var_indicator) return 1.0;
  const double g = (s - s_lo) / (s_hi - s_lo);
  return g < 0.0 ? 0.0 : (g > 1.0 ? 1.0 : g);
}

PhiHat build_phi_hat(const AggregationSetup& setup,
                     const std::vector<std::function<double(double)>>& cdfs,
                     const PayoffSpec& payoff) {
  if (!setup.copula.bounds_set())
    throw std::runtime_error("build_phi_hat: copula density bounds are not set");
  if (cdfs.size() != setup.d())
    throw std::invalid_argument("build_phi_hat: need one CDF per marginal");

  const std::size_t d = setup.d();
  const double inv_cmax = 1.0 / setup.copula.c_max;
  auto clip_count = std::make_shared<std::atomic<long>>(0);
  const copula::CopulaModel* model = &setup.copula;
  auto cdfs_copy = cdfs;
  PayoffSpec g = payoff;

  PhiHat out;
  out.clip_count = clip_count;
  out.fn = [d, inv_cmax, model, cdfs_copy, g, clip_count](const double* x) {
    const double gv = g(x, d);
    if (gv == 0.0) return 0.0;
    std::vector<double> u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = cdfs_copy[i](x[i]);
    double v = inv_cmax * gv * copula_density(*model, u.data(), d);
    if (v > 1.0) {
      clip_count->fetch_add(1, std::memory_order_relaxed);
      v = 1.0;
    }
    return v;
  };
  return out;
}

namespace {

struct MarginalStage {
  std::vector<osde::EstimatedCdf> cdfs;
  std::vector<int> K;
  std::vector<double> L;
  std::vector<double> sup_err;
  qae::QueryLedger ledger;
};

MarginalStage run_marginal_stage(const AggregationSetup& setup, double eps,
                                 double delta, const EstRmOptions& opt) {
  const std::size_t d = setup.d();
  const double cpm = setup.copula.c_prime_max;
  double eps_marg = eps / (2.0 * static_cast<double>(d) * cpm);
  if (eps_marg > 0.5) eps_marg = 0.5; // degenerate copulas make this vacuous
  const double delta_marg = delta / (2.0 * static_cast<double>(d));
  const double expo_base = 16.0 * static_cast<double>(d) * cpm;

  MarginalStage st;
  st.cdfs.resize(d);
  st.K.resize(d);
  st.L.resize(d);
  st.sup_err.assign(d, 0.0);

  for (std::size_t i = 0; i < d; ++i) {
    const auto& ms = setup.marginals[i];
    double L = ms.window.L;
    if (!(ms.spec.cdf(-L) <= 0.5 * eps_marg && ms.spec.cdf(L) >= 1.0 - eps_marg)) {
      const double L2 = marg::select_truncation(ms.spec, eps_marg).L;
      std::cerr << "note: widening truncation window for marginal " << i
                << " from L = " << L << " to L = " << L2 << "\n";
      L = L2;
    }
    const double base = expo_base * L * ms.smoothness.gamma / eps;
    const double raw = std::pow(base, 4.0 / (2.0 * ms.smoothness.r - 1.0));
    int K;
    if (!(raw < static_cast<double>(setup.K_cap))) {
      std::cerr << "warning: marginal " << i << " truncation order capped at "
                << setup.K_cap << " (formula gave " << raw << ")\n";
      K = setup.K_cap;
    } else {
      K = std::max(1, static_cast<int>(std::ceil(raw)));
    }
    st.K[i] = K;
    st.L[i] = L;

    auto res = osde::est_marg(ms.dm, K, L, eps_marg, delta_marg, opt.mode,
                              derive_key(opt.stream_key, {kStageMarg, i}),
                              opt.threads);
    st.ledger.merge(res.ledger);

    // Diagnostic: sup-norm distance to the analytic CDF on a probe grid.
    double sup = 0.0;
    const double lo = ms.dm.lo(), hi = ms.dm.hi();
    for (int p = 0; p < 400; ++p) {
      const double x = lo + (hi - lo) * p / 399.0;
      sup = std::max(sup, std::fabs(res.cdf.eval_cdf(x) - ms.spec.cdf(x)));
    }
    st.sup_err[i] = sup;
    st.cdfs[i] = std::move(res.cdf);
  }
  return st;
}

} // namespace

EstRmResult est_rm(const AggregationSetup& setup, const PayoffSpec& payoff,
                   double eps, double delta, const EstRmOptions& opt) {
  if (setup.marginals.empty())
    throw std::invalid_argument("est_rm: no marginals configured");
  if (setup.copula.d != setup.d())
    throw std::invalid_argument("est_rm: copula dimension mismatch");
  if (!setup.copula.bounds_set())
    throw std::runtime_error("est_rm: copula density bounds are not set");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("est_rm: eps must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("est_rm: delta must be in (0,1)");

  const std::size_t d = setup.d();
  EstRmResult out;

  // Stage 1: marginal CDFs (skipped when the caller substitutes the truth).
  MarginalStage stage;
  if (!opt.use_true_cdfs) {
    stage = run_marginal_stage(setup, eps, delta, opt);
    out.K_used = stage.K;
    out.L_used = stage.L;
    out.marginal_sup_err = stage.sup_err;
    out.ledger.merge(stage.ledger);
  }

  // Per-axis caches of the quantile-transformed CDF values; the payoff then
  // needs only a grid-index lookup per coordinate.
  std::vector<marg::DiscretizedMarginal> dms(d);
  std::vector<std::vector<double>> zcache(d);
  std::vector<double> los(d), inv_steps(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& ms = setup.marginals[i];
    dms[i] = ms.dm;
    los[i] = ms.dm.lo();
    inv_steps[i] = 1.0 / ms.dm.spacing();
    const std::size_t n = ms.dm.grid.size();
    zcache[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = ms.dm.grid[j];
      const double u = opt.use_true_cdfs ? ms.spec.cdf(x)
                                         : stage.cdfs[i].eval_cdf(x, true);
      zcache[i][j] = copula::z_from_u(setup.copula, u);
    }
  }

  const double inv_cmax = 1.0 / setup.copula.c_max;
  const copula::CopulaModel& model = setup.copula;
  std::atomic<long> clips{0};

  auto phi = [&](const double* x) {
    const double gv = payoff(x, d);
    if (gv == 0.0) return 0.0;
    double zbuf[8];
    std::vector<double> zdyn;
    double* z = zbuf;
    if (d > 8) {
      zdyn.resize(d);
      z = zdyn.data();
    }
    for (std::size_t i = 0; i < d; ++i) {
      const auto j = static_cast<std::size_t>(
          std::llround((x[i] - los[i]) * inv_steps[i]));
      z[i] = zcache[i][j];
    }
    double v = inv_cmax * gv * copula::density_z(model, z);
    if (v > 1.0) {
      clips.fetch_add(1, std::memory_order_relaxed);
      v = 1.0;
    }
    return v;
  };

  const auto amplitude = [&] {
    return marg::product_expectation(dms, phi, opt.threads);
  };

  const auto final_eps = eps / (2.0 * setup.copula.c_max);
  const auto res = qae::qmci(amplitude, "phi_hat", final_eps, 0.5 * delta,
                             opt.mode, derive_key(opt.stream_key, {kStageFinal}));
  out.ledger.merge(res.ledger);
  out.estimate = setup.copula.c_max * res.estimate;
  out.clip_violations = clips.load();
  return out;
}

TailProbResult tail_prob(const AggregationSetup& setup, double l, double eps_p,
                         double delta_p, const EstRmOptions& opt) {
  TailProbResult out;
  out.detail = est_rm(setup, PayoffSpec::var_indicator(l), eps_p, delta_p, opt);
  out.probability = out.detail.estimate;
  out.ledger = out.detail.ledger;
  return out;
}

RiskReport var(const AggregationSetup& setup, double alpha, double eps_p,
               double delta, const EstRmOptions& opt,
               std::optional<double> tol_opt) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("var: alpha must be in (0,1)");

  double lo = setup.sum_lo(), hi = setup.sum_hi();
  double tol = 0.0;
  for (const auto& m : setup.marginals) tol = std::max(tol, m.dm.spacing());
  if (tol_opt) tol = *tol_opt;
  if (!(tol > 0.0)) throw std::invalid_argument("var: tol must be positive");

  const double range = hi - lo;
  const int n_probes = std::max(1, static_cast<int>(std::ceil(std::log2(range / tol))));
  const double delta_probe = delta / static_cast<double>(n_probes);

  RiskReport rep;
  rep.measure = "var";
  rep.alpha = alpha;
  rep.diag.epsilon = eps_p;
  rep.diag.delta = delta;
  rep.diag.tol = tol;
  rep.diag.c_max = setup.copula.c_max;
  rep.diag.c_prime_max = setup.copula.c_prime_max;

  std::uint64_t probe_idx = 0;
  auto probe = [&](double l) {
    EstRmOptions po = opt;
    po.stream_key = derive_key(opt.stream_key, {kStageVar, probe_idx++});
    auto r = tail_prob(setup, l, eps_p, delta_probe, po);
    rep.total_queries.merge(r.ledger);
    rep.diag.probes += 1;
    rep.diag.clip_violations += r.detail.clip_violations;
    return r;
  };

  const auto at_lo = probe(lo);
  if (at_lo.probability <= 1.0 - alpha)
    throw std::runtime_error(
        "var: bracket failure, tail probability at the lower end is already <= 1 - alpha");

  int guard = 0;
  while (hi - lo > tol && ++guard < 200) {
    const double mid = 0.5 * (lo + hi);
    const auto r = probe(mid);
    if (r.probability > 1.0 - alpha)
      lo = mid;
    else
      hi = mid;
  }

  const auto at_hi = probe(hi);
  rep.value = hi;
  rep.tail_prob_at_value = at_hi.probability;
  rep.diag.K = at_hi.detail.K_used;
  rep.diag.L = at_hi.detail.L_used;
  rep.diag.marginal_sup_err = at_hi.detail.marginal_sup_err;
  return rep;
}

RiskReport tvar(const AggregationSetup& setup, double alpha, double l_alpha,
                double eps, double delta, const EstRmOptions& opt,
                std::optional<double> eps_tail_opt) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("tvar: alpha must be in (0,1)");
  const double s_lo = setup.sum_lo(), s_hi = setup.sum_hi();
  const double eps_tail = eps_tail_opt.value_or(eps);
  if (l_alpha > s_hi)
    std::cerr << "warning: tvar threshold " << l_alpha
              << " lies above the grid sum maximum " << s_hi
              << "; tail payoff is identically zero\n";

  RiskReport rep;
  rep.measure = "tvar";
  rep.alpha = alpha;
  rep.diag.epsilon = eps;
  rep.diag.delta = delta;
  rep.diag.c_max = setup.copula.c_max;
  rep.diag.c_prime_max = setup.copula.c_prime_max;
  rep.diag.var_threshold = l_alpha;

  EstRmOptions eo = opt;
  eo.stream_key = derive_key(opt.stream_key, {kStageTvarEst});
  const auto est = est_rm(setup, PayoffSpec::tvar_indicator(l_alpha, s_lo, s_hi),
                          eps, 0.5 * delta, eo);
  rep.total_queries.merge(est.ledger);

  EstRmOptions to = opt;
  to.stream_key = derive_key(opt.stream_key, {kStageTvarTail});
  const auto tp = tail_prob(setup, l_alpha, eps_tail, 0.5 * delta, to);
  rep.total_queries.merge(tp.ledger);

  const double e_s_tail = (s_hi - s_lo) * est.estimate + s_lo * tp.probability;
  rep.value = e_s_tail / (1.0 - alpha);
  rep.tail_prob_at_value = tp.probability;
  rep.diag.K = est.K_used;
  rep.diag.L = est.L_used;
  rep.diag.marginal_sup_err = est.marginal_sup_err;
  rep.diag.clip_violations = est.clip_violations + tp.detail.clip_violations;
  rep.diag.probes = 2;
  return rep;
}

} // namespace qra::risk
