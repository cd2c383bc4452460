#include "qra/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "qra/classical.hpp"
#include "qra/distributions.hpp"
#include "qra/hermite.hpp"
#include "qra/kernels.hpp"
#include "qra/parallel.hpp"

namespace qra::cli {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRunQuantum = 1;
constexpr std::uint64_t kRunClassical = 2;
constexpr std::uint64_t kRunMarginalCmd = 5;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void emit_error(const std::string& kind, const std::string& message) {
  json e;
  e["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << e.dump() << "\n";
}

RunConfig load_with_overrides(const std::string& path, const Overrides& ov) {
  RunConfig c = load_config(path);
  if (ov.seed) c.seed = *ov.seed;
  if (ov.mode) {
    if (*ov.mode != "quantum" && *ov.mode != "classical" && *ov.mode != "both")
      throw ConfigError("--mode must be quantum, classical, or both");
    c.mode = *ov.mode;
  }
  return c;
}

json ledger_json(const qae::QueryLedger& l) {
  return {{"state_prep", l.state_prep_queries}, {"rotation", l.rotation_queries}};
}

json quantum_report_json(const risk::RiskReport& r) {
  json d;
  d["epsilon"] = r.diag.epsilon;
  d["delta"] = r.diag.delta;
  d["probes"] = r.diag.probes;
  d["clip_violations"] = r.diag.clip_violations;
  d["K"] = r.diag.K;
  d["L"] = r.diag.L;
  d["marginal_sup_err"] = r.diag.marginal_sup_err;
  if (r.measure == "var") d["tol"] = r.diag.tol;
  if (r.measure == "tvar") d["var_threshold"] = r.diag.var_threshold;

  json rr;
  rr["pipeline"] = "quantum";
  rr["measure"] = r.measure;
  rr["alpha"] = r.alpha;
  rr["value"] = r.value;
  rr["tail_prob_at_value"] = r.tail_prob_at_value;
  rr["queries"] = ledger_json(r.total_queries);
  rr["diagnostics"] = d;
  return rr;
}

json classical_report_json(const std::string& measure, double alpha,
                           double value, double tail_fraction, std::size_t n) {
  json rr;
  rr["pipeline"] = "classical";
  rr["measure"] = measure;
  rr["alpha"] = alpha;
  rr["value"] = value;
  rr["tail_prob_at_value"] = tail_fraction;
  rr["N"] = n;
  rr["queries"] = {{"state_prep", 0}, {"rotation", 0}};
  return rr;
}

struct QuantumOutcome {
  std::optional<risk::RiskReport> var_report;
  std::optional<risk::RiskReport> tvar_report;
};

QuantumOutcome run_quantum(const RunConfig& c, const risk::AggregationSetup& setup,
                           unsigned threads) {
  const auto eps = stage_epsilons(c, setup.sum_lo(), setup.sum_hi());
  risk::EstRmOptions opt;
  opt.mode = c.qae_mode;
  opt.threads = threads;
  opt.stream_key = derive_key(c.seed, {kRunQuantum, 1});

  QuantumOutcome out;
  auto var_rep = risk::var(setup, c.alpha, eps.probe, c.delta, opt, c.tol);
  if (c.measure != "tvar") out.var_report = var_rep;

  if (c.measure != "var") {
    risk::EstRmOptions topt = opt;
    topt.stream_key = derive_key(c.seed, {kRunQuantum, 2});
    auto tv = risk::tvar(setup, c.alpha, var_rep.value, eps.tvar_est, c.delta,
                         topt, eps.tvar_tail);
    if (c.measure == "tvar") {
      // The prerequisite VaR search is part of producing this figure.
      tv.total_queries.merge(var_rep.total_queries);
      tv.diag.probes += var_rep.diag.probes;
    }
    out.tvar_report = tv;
  }
  return out;
}

struct ClassicalOutcome {
  double var_value = 0.0, var_tail = 0.0;
  double tvar_value = 0.0, tvar_tail = 0.0;
  bool has_var = false, has_tvar = false;
};

ClassicalOutcome run_classical(const RunConfig& c) {
  std::vector<marg::MarginalSpec> specs;
  for (const auto& m : c.marginals) specs.push_back(m.spec);
  copula::CopulaModel model;
  switch (c.copula_kind) {
    case copula::Kind::independence:
      model = copula::CopulaModel::independence(specs.size(), c.clip);
      break;
    case copula::Kind::gaussian:
      model = copula::CopulaModel::gaussian(specs.size(), c.matrix, c.clip);
      break;
    case copula::Kind::student_t:
      model = copula::CopulaModel::student_t(specs.size(), c.matrix, c.dof, c.clip);
      break;
  }
  const auto sm = classical::alg1_joint_samples(
      specs, model, c.classical_n, derive_key(c.seed, {kRunClassical}));
  const auto sums = sm.row_sums();

  ClassicalOutcome out;
  auto tail_fraction = [&](double v) {
    double cnt = 0.0, sum = 0.0;
    kern::tail_sums(sums.data(), sums.size(), v, &cnt, &sum);
    return cnt / static_cast<double>(sums.size());
  };
  if (c.measure != "tvar") {
    out.var_value = classical::classical_var(sm, c.alpha);
    out.var_tail = tail_fraction(out.var_value);
    out.has_var = true;
  }
  if (c.measure != "var") {
    out.tvar_value = classical::classical_tvar(sm, c.alpha);
    out.tvar_tail = tail_fraction(classical::classical_var(sm, c.alpha));
    out.has_tvar = true;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << text;
}

} // namespace

int cmd_run(const std::string& config_path, const std::string& out_path,
            const Overrides& ov) {
  RunConfig c;
  risk::AggregationSetup setup;
  try {
    c = load_with_overrides(config_path, ov);
    const double t0 = now_seconds();
    setup = build_setup(c, ov.threads);
    std::cerr << "timing: setup " << (now_seconds() - t0) << " s\n";
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    json results = json::array();
    if (c.mode != "classical") {
      const double t0 = now_seconds();
      const auto q = run_quantum(c, setup, ov.threads);
      std::cerr << "timing: quantum " << (now_seconds() - t0) << " s\n";
      if (q.var_report) results.push_back(quantum_report_json(*q.var_report));
      if (q.tvar_report) results.push_back(quantum_report_json(*q.tvar_report));
    }
    if (c.mode != "quantum") {
      const double t0 = now_seconds();
      const auto cl = run_classical(c);
      std::cerr << "timing: classical " << (now_seconds() - t0) << " s\n";
      if (cl.has_var)
        results.push_back(classical_report_json("var", c.alpha, cl.var_value,
                                                cl.var_tail, c.classical_n));
      if (cl.has_tvar)
        results.push_back(classical_report_json("tvar", c.alpha, cl.tvar_value,
                                                cl.tvar_tail, c.classical_n));
    }

    json diagnostics;
    diagnostics["seed"] = c.seed;
    diagnostics["qae"] = c.qae_mode == qae::Mode::sampled ? "sampled" : "exact";
    diagnostics["mode"] = c.mode;
    diagnostics["c_max"] = setup.copula.c_max;
    diagnostics["c_prime_max"] = setup.copula.c_prime_max;
    {
      json windows = json::array();
      json ranges = json::array();
      for (const auto& m : setup.marginals) {
        windows.push_back(m.window.L);
        ranges.push_back({m.dm.lo(), m.dm.hi()});
      }
      diagnostics["windows"] = windows;
      diagnostics["grid_ranges"] = ranges;
    }
    const auto eps = stage_epsilons(c, setup.sum_lo(), setup.sum_hi());
    diagnostics["stage_epsilons"] = {{"probe", eps.probe},
                                     {"tvar_est", eps.tvar_est},
                                     {"tvar_tail", eps.tvar_tail}};
    if (c.reference) diagnostics["reference"] = *c.reference;

    json doc;
    doc["results"] = results;
    doc["diagnostics"] = diagnostics;
    doc["config_echo"] = config_echo(c);
    write_text_file(out_path, doc.dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
}

int cmd_converge(const std::string& config_path,
                 const std::vector<double>& epsilon_sweep,
                 const std::vector<double>& n_sweep, int seeds,
                 const std::string& out_csv, const Overrides& ov) {
  RunConfig c;
  try {
    c = load_with_overrides(config_path, ov);
    if (epsilon_sweep.empty() == n_sweep.empty()) {
      emit_error("usage",
                 "converge needs exactly one of --sweep-epsilon or --sweep-n");
      return 2;
    }
    if (!c.reference) {
      emit_error("config",
                 "converge requires risk.reference for the abs_error column");
      return 2;
    }
    if (seeds < 1) {
      emit_error("usage", "--seeds must be >= 1");
      return 2;
    }
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    std::string csv = "param,estimate,abs_error,queries_state_prep,"
                      "queries_rotation,seconds,seed\n";
    char line[320];
    const double ref = *c.reference;

    if (!epsilon_sweep.empty()) {
      for (const double eps_val : epsilon_sweep) {
        if (!(eps_val > 0.0 && eps_val < 1.0))
          throw ConfigError("sweep epsilon values must be in (0,1)");
        RunConfig cc = c;
        cc.epsilon = eps_val;
        const auto setup = build_setup(cc, ov.threads);
        for (int s = 0; s < seeds; ++s) {
          const std::uint64_t seed_s = cc.seed + static_cast<std::uint64_t>(s);
          risk::EstRmOptions opt;
          opt.mode = cc.qae_mode;
          opt.threads = ov.threads;
          opt.stream_key = derive_key(seed_s, {kRunQuantum, 1});
          const double t0 = now_seconds();
          const auto rep = risk::var(setup, cc.alpha, cc.epsilon, cc.delta, opt,
                                     cc.tol);
          const double secs = now_seconds() - t0;
          std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%llu,%llu,%.6f,%llu\n",
                        eps_val, rep.value, std::fabs(rep.value - ref),
                        static_cast<unsigned long long>(rep.total_queries.state_prep_queries),
                        static_cast<unsigned long long>(rep.total_queries.rotation_queries),
                        secs, static_cast<unsigned long long>(seed_s));
          csv += line;
        }
      }
    } else {
      std::vector<marg::MarginalSpec> specs;
      for (const auto& m : c.marginals) specs.push_back(m.spec);
      copula::CopulaModel model;
      switch (c.copula_kind) {
        case copula::Kind::independence:
          model = copula::CopulaModel::independence(specs.size(), c.clip);
          break;
        case copula::Kind::gaussian:
          model = copula::CopulaModel::gaussian(specs.size(), c.matrix, c.clip);
          break;
        case copula::Kind::student_t:
          model = copula::CopulaModel::student_t(specs.size(), c.matrix, c.dof,
                                                 c.clip);
          break;
      }
      for (const double n_val : n_sweep) {
        if (!(n_val >= 10.0) || n_val != std::floor(n_val))
          throw ConfigError("sweep N values must be integers >= 10");
        for (int s = 0; s < seeds; ++s) {
          const std::uint64_t seed_s = c.seed + static_cast<std::uint64_t>(s);
          const double t0 = now_seconds();
          const auto sm = classical::alg1_joint_samples(
              specs, model, static_cast<std::size_t>(n_val),
              derive_key(seed_s, {kRunClassical}));
          const double est = classical::classical_var(sm, c.alpha);
          const double secs = now_seconds() - t0;
          std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,0,0,%.6f,%llu\n",
                        n_val, est, std::fabs(est - ref), secs,
                        static_cast<unsigned long long>(seed_s));
          csv += line;
        }
      }
    }
    write_text_file(out_csv, csv);
    return 0;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
}

int cmd_marginal(const std::string& config_path, int index,
                 const std::string& out_csv, const Overrides& ov) {
  RunConfig c;
  try {
    c = load_with_overrides(config_path, ov);
    if (index < 0 || static_cast<std::size_t>(index) >= c.marginals.size()) {
      emit_error("usage", "marginal index out of range");
      return 2;
    }
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    const auto& mc = c.marginals[static_cast<std::size_t>(index)];
    double lo, hi;
    if (mc.range) {
      lo = mc.range->first;
      hi = mc.range->second;
    } else {
      lo = mc.spec.mean() - 8.0 * mc.spec.stddev();
      hi = mc.spec.mean() + 8.0 * mc.spec.stddev();
    }
    const auto dm = marg::discretize(mc.spec, mc.grid_bits, lo, hi);
    const double L = marg::select_truncation(mc.spec, c.epsilon).L;
    const int K = osde::choose_K(L, mc.smoothness, c.epsilon, c.K_cap);
    const auto res = osde::est_marg(
        dm, K, L, c.epsilon, c.delta, c.qae_mode,
        derive_key(c.seed, {kRunMarginalCmd, static_cast<std::uint64_t>(index)}),
        ov.threads);

    std::string csv = "x,F_hat,F_true,abs_err\n";
    char line[200];
    for (int p = 0; p < 400; ++p) {
      const double x = lo + (hi - lo) * p / 399.0;
      const double fh = res.cdf.eval_cdf(x);
      const double ft = mc.spec.cdf(x);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", x, fh, ft,
                    std::fabs(fh - ft));
      csv += line;
    }
    write_text_file(out_csv, csv);

    json coeffs;
    coeffs["K"] = res.cdf.K;
    coeffs["L"] = res.cdf.L;
    coeffs["coefficients"] = res.cdf.coefficients;
    write_text_file(out_csv + ".coeffs.json", coeffs.dump(2) + "\n");

    std::cerr << "queries: state_prep " << res.ledger.state_prep_queries
              << ", rotation " << res.ledger.rotation_queries << "\n";
    return 0;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
}

namespace {

// Adaptive Simpson used by the validate command's integral check. Forced
// initial subdivisions keep oscillatory integrands from aliasing to a
// spuriously converged estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth, int force) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 ||
      (force <= 0 && std::fabs(left + right - whole) < 15.0 * tol))
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                          force - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                          force - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a == b) return 0.0;
  const int panels = 8;
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + p * w, pb = a + (p + 1) * w;
    const double fa = f(pa), fb = f(pb), fm = f(0.5 * (pa + pb));
    const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    acc += adaptive_simpson(f, pa, pb, fa, fm, fb, whole, tol / panels, 44, 3);
  }
  return acc;
}

struct Property {
  std::string name;
  bool ok;
  std::string detail;
};

} // namespace

int cmd_validate(double tolerance_scale) {
  std::vector<Property> props;
  const double ts = tolerance_scale;

  // Orthonormality of the Hermite rows on [-12, 12], Simpson on a fine grid.
  {
    const int kmax = 30;
    const std::size_t n = 32769;
    const double a = -12.0, b = 12.0, h = (b - a) / static_cast<double>(n - 1);
    std::vector<double> xs(n), wt(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = a + static_cast<double>(i) * h;
      wt[i] = (i == 0 || i == n - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    }
    std::vector<double> rows((kmax + 1) * n);
    kern::hermite_rows(kmax, xs.data(), n, rows.data());
    std::vector<double> wrow(n);
    double worst = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      for (std::size_t i = 0; i < n; ++i)
        wrow[i] = rows[static_cast<std::size_t>(k) * n + i] * wt[i];
      for (int l = k; l <= kmax; ++l) {
        const double g = kern::dot(wrow.data(),
                                   rows.data() + static_cast<std::size_t>(l) * n, n);
        worst = std::max(worst, std::fabs(g - (k == l ? 1.0 : 0.0)));
      }
    }
    props.push_back({"hermite_orthonormality", worst <= 1e-8 * ts,
                     "max deviation " + std::to_string(worst)});
  }

  // Uniform amplitude bound |h_k| <= pi^{-1/4}.
  {
    Stream rng(0x5eedULL);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const int k = static_cast<int>(rng.uniform01() * 61);
      const double x = (rng.uniform01() * 2.0 - 1.0) * 10.0;
      worst = std::max(worst, std::fabs(special::hermite_function(k, x)));
    }
    props.push_back({"hermite_amplitude_bound",
                     worst <= special::kPiQuarterInv + 1e-12 * ts,
                     "max |h_k| " + std::to_string(worst)});
  }

  // Integral recurrence against adaptive quadrature.
  {
    double worst = 0.0;
    const double L = 5.0;
    for (int k : {0, 3, 17, 40}) {
      for (int p = 0; p <= 20; ++p) {
        const double x = -L + 2.0 * L * p / 20.0;
        const double viaq = integrate(
            [k](double t) { return special::hermite_function(k, t); }, -L, x,
            1e-12);
        worst = std::max(worst,
                         std::fabs(special::hermite_integral(k, L, x) - viaq));
      }
    }
    props.push_back({"hermite_integral_quadrature", worst <= 1e-8 * ts,
                     "max deviation " + std::to_string(worst)});
  }

  // Outcome distribution sums to one.
  {
    double worst = 0.0;
    for (double a : {0.1, 0.37, 0.5, 0.93}) {
      for (std::uint64_t t : {std::uint64_t{64}, std::uint64_t{512}}) {
        qae::OutcomeSampler s(a, t, qae::OutcomeSampler::Path::enumerate);
        worst = std::max(worst, std::fabs(s.pmf_total() - 1.0));
      }
    }
    props.push_back({"qae_outcome_normalization", worst <= 1e-9 * ts,
                     "max |sum - 1| " + std::to_string(worst)});
  }

  // Amplitude-estimation band coverage on a fixed stream.
  {
    bool ok = true;
    std::string detail;
    for (double a : {0.25, 0.5}) {
      for (std::uint64_t t : {std::uint64_t{64}, std::uint64_t{256}}) {
        qae::OutcomeSampler s(a, t);
        Stream rng(derive_key(0xC0FFEE, {static_cast<std::uint64_t>(a * 100), t}));
        const double band = 2.0 * M_PI * std::sqrt(a * (1.0 - a)) / static_cast<double>(t) +
                            M_PI * M_PI / (static_cast<double>(t) * static_cast<double>(t));
        int hits = 0;
        const int draws = 4000;
        for (int i = 0; i < draws; ++i)
          if (std::fabs(s.draw(rng) - a) <= band) ++hits;
        const double frac = static_cast<double>(hits) / draws;
        if (frac < 8.0 / (M_PI * M_PI) - 0.02) {
          ok = false;
          detail = "coverage " + std::to_string(frac) + " at a=" +
                   std::to_string(a) + " t=" + std::to_string(t);
        }
      }
    }
    props.push_back({"qae_coverage", ok, detail.empty() ? "all bands covered" : detail});
  }

  // Normal quantile inverts the CDF.
  {
    double worst = 0.0;
    for (double p = 0.001; p < 1.0; p += 0.0421)
      worst = std::max(worst, std::fabs(special::std_normal_cdf(
                                  special::std_normal_quantile(p)) - p));
    props.push_back({"normal_inverse_roundtrip", worst <= 1e-8 * ts,
                     "max roundtrip error " + std::to_string(worst)});
  }

  // Copula density: exchangeable symmetry and clamping.
  {
    auto m = copula::CopulaModel::gaussian(2, {1.0, 0.5, 0.5, 1.0});
    double worst = 0.0;
    for (double u = 0.05; u < 1.0; u += 0.13) {
      for (double v = 0.05; v < 1.0; v += 0.13) {
        const double cuv = copula_density(m, {u, v});
        worst = std::max(worst, std::fabs(cuv - copula_density(m, {v, u})));
      }
    }
    const double inside = copula_density(m, {m.clip, 0.4});
    const double outside = copula_density(m, {0.0, 0.4});
    worst = std::max(worst, std::fabs(inside - outside));
    props.push_back({"copula_symmetry_clamp", worst <= 1e-12 * ts,
                     "max deviation " + std::to_string(worst)});
  }

  bool all = true;
  for (const auto& p : props) {
    std::cout << (p.ok ? "PASS " : "FAIL ") << p.name;
    if (!p.ok) std::cout << " (" << p.detail << ")";
    std::cout << "\n";
    all = all && p.ok;
  }
  return all ? 0 : 1;
}

} // namespace qra::cli
