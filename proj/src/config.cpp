#include "qra/config.hpp"

#include <cmath>
#include <fstream>

namespace qra::cli {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(where + ": missing or non-numeric field '" + key + "'");
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("field '" + key + "' must be numeric");
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& key,
                           const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + ": missing or non-string field '" + key + "'");
  return j[key].get<std::string>();
}

MarginalConfig parse_marginal(const json& j, std::size_t idx) {
  const std::string where = "marginals[" + std::to_string(idx) + "]";
  if (!j.is_object()) throw ConfigError(where + ": must be an object");
  MarginalConfig mc;
  const std::string family = require_string(j, "family", where);
  try {
    if (family == "normal") {
      mc.spec = marg::MarginalSpec::normal(require_number(j, "mu", where),
                                           require_number(j, "sigma", where));
    } else if (family == "lognormal") {
      mc.spec = marg::MarginalSpec::lognormal(require_number(j, "mu", where),
                                              require_number(j, "sigma", where),
                                              number_or(j, "shift", 0.0));
    } else if (family == "mixture") {
      mc.spec = marg::MarginalSpec::mixture(
          require_number(j, "weight", where), require_number(j, "mu1", where),
          require_number(j, "sigma1", where), require_number(j, "mu2", where),
          require_number(j, "sigma2", where));
    } else {
      throw ConfigError(where + ": unknown family '" + family + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }

  const double gb = number_or(j, "grid_bits", 10.0);
  mc.grid_bits = static_cast<int>(gb);
  if (mc.grid_bits < 2 || mc.grid_bits > 20 || gb != mc.grid_bits)
    throw ConfigError(where + ": grid_bits must be an integer in [2, 20]");

  if (j.contains("range")) {
    const auto& r = j["range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw ConfigError(where + ": range must be [lo, hi]");
    const double lo = r[0].get<double>(), hi = r[1].get<double>();
    if (!(lo < hi)) throw ConfigError(where + ": range requires lo < hi");
    mc.range = {lo, hi};
  }

  if (j.contains("smoothness")) {
    const auto& s = j["smoothness"];
    if (!s.is_object()) throw ConfigError(where + ": smoothness must be an object");
    const double r = number_or(s, "r", 4.0);
    mc.smoothness.r = static_cast<int>(r);
    if (mc.smoothness.r < 1 || r != mc.smoothness.r)
      throw ConfigError(where + ": smoothness.r must be an integer >= 1");
    mc.smoothness.gamma = number_or(s, "gamma", 1.0);
    if (!(mc.smoothness.gamma > 0.0))
      throw ConfigError(where + ": smoothness.gamma must be positive");
  }
  return mc;
}

} // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;

  if (!j.contains("marginals") || !j["marginals"].is_array() ||
      j["marginals"].empty())
    throw ConfigError("config: 'marginals' must be a non-empty array");
  for (std::size_t i = 0; i < j["marginals"].size(); ++i)
    c.marginals.push_back(parse_marginal(j["marginals"][i], i));
  const std::size_t d = c.marginals.size();

  if (!j.contains("copula") || !j["copula"].is_object())
    throw ConfigError("config: 'copula' must be an object");
  {
    const auto& cj = j["copula"];
    const std::string kind = require_string(cj, "kind", "copula");
    if (kind == "independence") c.copula_kind = copula::Kind::independence;
    else if (kind == "gaussian") c.copula_kind = copula::Kind::gaussian;
    else if (kind == "student_t") c.copula_kind = copula::Kind::student_t;
    else throw ConfigError("copula: unknown kind '" + kind + "'");

    if (c.copula_kind != copula::Kind::independence) {
      if (!cj.contains("matrix") || !cj["matrix"].is_array() ||
          cj["matrix"].size() != d)
        throw ConfigError("copula: 'matrix' must be a " + std::to_string(d) +
                          "x" + std::to_string(d) + " array");
      for (const auto& row : cj["matrix"]) {
        if (!row.is_array() || row.size() != d)
          throw ConfigError("copula: 'matrix' rows must have length " +
                            std::to_string(d));
        for (const auto& v : row) {
          if (!v.is_number()) throw ConfigError("copula: matrix entries must be numeric");
          c.matrix.push_back(v.get<double>());
        }
      }
    }
    if (c.copula_kind == copula::Kind::student_t) {
      c.dof = require_number(cj, "dof", "copula");
      if (!(c.dof > 0.0)) throw ConfigError("copula: dof must be positive");
    }
    c.clip = number_or(cj, "clip", 1e-3);
    if (!(c.clip > 0.0 && c.clip < 0.5))
      throw ConfigError("copula: clip must be in (0, 0.5)");
    const double res = number_or(cj, "bounds_resolution", 0.0);
    c.bounds_resolution = static_cast<int>(res);
    if (res != c.bounds_resolution || c.bounds_resolution < 0)
      throw ConfigError("copula: bounds_resolution must be a nonnegative integer");
  }

  if (!j.contains("risk") || !j["risk"].is_object())
    throw ConfigError("config: 'risk' must be an object");
  {
    const auto& rj = j["risk"];
    c.measure = require_string(rj, "measure", "risk");
    if (c.measure != "var" && c.measure != "tvar" && c.measure != "both")
      throw ConfigError("risk: measure must be var, tvar, or both");
    c.alpha = require_number(rj, "alpha", "risk");
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
      throw ConfigError("risk: alpha must be in (0,1)");
    if (rj.contains("tol")) {
      c.tol = require_number(rj, "tol", "risk");
      if (!(*c.tol > 0.0)) throw ConfigError("risk: tol must be positive");
    }
    if (rj.contains("reference"))
      c.reference = require_number(rj, "reference", "risk");
  }

  if (!j.contains("run") || !j["run"].is_object())
    throw ConfigError("config: 'run' must be an object");
  {
    const auto& uj = j["run"];
    c.mode = require_string(uj, "mode", "run");
    if (c.mode != "quantum" && c.mode != "classical" && c.mode != "both")
      throw ConfigError("run: mode must be quantum, classical, or both");
    c.epsilon = require_number(uj, "epsilon", "run");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
      throw ConfigError("run: epsilon must be in (0,1)");
    c.delta = require_number(uj, "delta", "run");
    if (!(c.delta > 0.0 && c.delta < 1.0))
      throw ConfigError("run: delta must be in (0,1)");
    const std::string qm = require_string(uj, "qae", "run");
    if (qm == "sampled") c.qae_mode = qae::Mode::sampled;
    else if (qm == "exact") c.qae_mode = qae::Mode::exact;
    else throw ConfigError("run: qae must be sampled or exact");
    if (!uj.contains("seed") || !uj["seed"].is_number_integer() ||
        (!uj["seed"].is_number_unsigned() && uj["seed"].get<std::int64_t>() < 0))
      throw ConfigError("run: 'seed' must be a nonnegative integer");
    c.seed = uj["seed"].get<std::uint64_t>();
    const double cn = number_or(uj, "classical_N", 100000.0);
    if (!(cn >= 10.0 && cn <= 5e8) || cn != std::floor(cn))
      throw ConfigError("run: classical_N must be an integer in [10, 5e8]");
    c.classical_n = static_cast<std::size_t>(cn);
    const double kc = number_or(uj, "K_cap", 128.0);
    c.K_cap = static_cast<int>(kc);
    if (c.K_cap < 1 || kc != c.K_cap)
      throw ConfigError("run: K_cap must be a positive integer");
    if (uj.contains("epsilon_tvar")) {
      c.epsilon_tvar = require_number(uj, "epsilon_tvar", "run");
      if (!(*c.epsilon_tvar > 0.0 && *c.epsilon_tvar < 1.0))
        throw ConfigError("run: epsilon_tvar must be in (0,1)");
    }
    if (uj.contains("epsilon_tail")) {
      c.epsilon_tail = require_number(uj, "epsilon_tail", "run");
      if (!(*c.epsilon_tail > 0.0 && *c.epsilon_tail < 1.0))
        throw ConfigError("run: epsilon_tail must be in (0,1)");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_echo(const RunConfig& c) {
  json j;
  json marginals = json::array();
  for (const auto& m : c.marginals) {
    json mj;
    switch (m.spec.family) {
      case marg::Family::normal:
        mj["family"] = "normal";
        mj["mu"] = m.spec.mu;
        mj["sigma"] = m.spec.sigma;
        break;
      case marg::Family::lognormal:
        mj["family"] = "lognormal";
        mj["mu"] = m.spec.mu;
        mj["sigma"] = m.spec.sigma;
        mj["shift"] = m.spec.shift;
        break;
      case marg::Family::mixture:
        mj["family"] = "mixture";
        mj["weight"] = m.spec.w;
        mj["mu1"] = m.spec.mu1;
        mj["sigma1"] = m.spec.sigma1;
        mj["mu2"] = m.spec.mu2;
        mj["sigma2"] = m.spec.sigma2;
        break;
    }
    mj["grid_bits"] = m.grid_bits;
    if (m.range) mj["range"] = {m.range->first, m.range->second};
    mj["smoothness"] = {{"r", m.smoothness.r}, {"gamma", m.smoothness.gamma}};
    marginals.push_back(mj);
  }
  j["marginals"] = marginals;

  json cj;
  switch (c.copula_kind) {
    case copula::Kind::independence: cj["kind"] = "independence"; break;
    case copula::Kind::gaussian: cj["kind"] = "gaussian"; break;
    case copula::Kind::student_t: cj["kind"] = "student_t"; break;
  }
  if (c.copula_kind != copula::Kind::independence) {
    const std::size_t d = c.marginals.size();
    json mat = json::array();
    for (std::size_t i = 0; i < d; ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < d; ++k) row.push_back(c.matrix[i * d + k]);
      mat.push_back(row);
    }
    cj["matrix"] = mat;
  }
  if (c.copula_kind == copula::Kind::student_t) cj["dof"] = c.dof;
  cj["clip"] = c.clip;
  if (c.bounds_resolution > 0) cj["bounds_resolution"] = c.bounds_resolution;
  j["copula"] = cj;

  json rj;
  rj["measure"] = c.measure;
  rj["alpha"] = c.alpha;
  if (c.tol) rj["tol"] = *c.tol;
  if (c.reference) rj["reference"] = *c.reference;
  j["risk"] = rj;

  json uj;
  uj["mode"] = c.mode;
  uj["epsilon"] = c.epsilon;
  uj["delta"] = c.delta;
  uj["qae"] = c.qae_mode == qae::Mode::sampled ? "sampled" : "exact";
  uj["seed"] = c.seed;
  uj["classical_N"] = c.classical_n;
  uj["K_cap"] = c.K_cap;
  if (c.epsilon_tvar) uj["epsilon_tvar"] = *c.epsilon_tvar;
  if (c.epsilon_tail) uj["epsilon_tail"] = *c.epsilon_tail;
  j["run"] = uj;
  return j;
}

StageEpsilons stage_epsilons(const RunConfig& c, double s_lo, double s_hi) {
  StageEpsilons e;
  e.probe = c.epsilon;
  const double width = s_hi - s_lo;
  e.tvar_est = c.epsilon_tvar.value_or(std::min(0.5, c.epsilon / std::max(1.0, width)));
  e.tvar_tail =
      c.epsilon_tail.value_or(std::min(0.5, c.epsilon / std::max(1.0, std::fabs(s_lo))));
  return e;
}

risk::AggregationSetup build_setup(const RunConfig& c, unsigned threads) {
  (void)threads;
  risk::AggregationSetup setup;
  setup.K_cap = c.K_cap;
  const std::size_t d = c.marginals.size();

  for (const auto& mc : c.marginals) {
    risk::MarginalSetup ms;
    ms.spec = mc.spec;
    ms.smoothness = mc.smoothness;
    double lo, hi;
    if (mc.range) {
      lo = mc.range->first;
      hi = mc.range->second;
    } else {
      const double m = mc.spec.mean(), s = mc.spec.stddev();
      lo = m - 8.0 * s;
      hi = m + 8.0 * s;
    }
    ms.dm = marg::discretize(mc.spec, mc.grid_bits, lo, hi);
    setup.marginals.push_back(std::move(ms));
  }

  switch (c.copula_kind) {
    case copula::Kind::independence:
      setup.copula = copula::CopulaModel::independence(d, c.clip);
      break;
    case copula::Kind::gaussian:
      setup.copula = copula::CopulaModel::gaussian(d, c.matrix, c.clip);
      break;
    case copula::Kind::student_t:
      setup.copula = copula::CopulaModel::student_t(d, c.matrix, c.dof, c.clip);
      break;
  }
  int res = c.bounds_resolution;
  if (res == 0) res = d <= 2 ? 128 : (d == 3 ? 48 : 24);
  copula::copula_density_bounds(setup.copula, res);

  // Truncation windows must satisfy the tail condition at the tightest
  // marginal-stage accuracy any configured measure will request.
  const auto eps = stage_epsilons(c, setup.sum_lo(), setup.sum_hi());
  double tightest = eps.probe;
  if (c.measure != "var") tightest = std::min({tightest, eps.tvar_est, eps.tvar_tail});
  double eps_marg =
      tightest / (2.0 * static_cast<double>(d) * setup.copula.c_prime_max);
  if (eps_marg > 0.5) eps_marg = 0.5;

  for (std::size_t i = 0; i < d; ++i) {
    auto& ms = setup.marginals[i];
    ms.window = marg::select_truncation(ms.spec, eps_marg);
    if (ms.dm.lo() > -ms.window.L || ms.dm.hi() < ms.window.L)
      throw ConfigError("marginal " + std::to_string(i) + ": grid range [" +
                        std::to_string(ms.dm.lo()) + ", " +
                        std::to_string(ms.dm.hi()) +
                        "] does not cover the truncation window L = " +
                        std::to_string(ms.window.L) +
                        "; widen 'range' or loosen epsilon");
  }
  return setup;
}

} // namespace qra::cli
