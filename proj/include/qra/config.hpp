#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qra/copula.hpp"
#include "qra/marginals.hpp"
#include "qra/osde.hpp"
#include "qra/qae.hpp"
#include "qra/risk.hpp"

namespace qra::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MarginalConfig {
  marg::MarginalSpec spec;
  int grid_bits = 10;
  std::optional<std::pair<double, double>> range; // default: mean +- 8 sd
  osde::SmoothnessParams smoothness;
};

struct RunConfig {
  std::vector<MarginalConfig> marginals;

  copula::Kind copula_kind = copula::Kind::independence;
  std::vector<double> matrix; // d x d for gaussian / student_t
  double dof = 0.0;
  double clip = 1e-3;
  int bounds_resolution = 0; // 0: pick by dimension

  std::string measure = "var"; // var | tvar | both
  double alpha = 0.99;
  std::optional<double> tol;
  std::optional<double> reference;

  std::string mode = "both"; // quantum | classical | both
  double epsilon = 0.05;
  double delta = 0.05;
  qae::Mode qae_mode = qae::Mode::sampled;
  std::uint64_t seed = 0;
  std::size_t classical_n = 100000;
  int K_cap = 128;
  std::optional<double> epsilon_tvar; // affine-payoff stage accuracy
  std::optional<double> epsilon_tail; // Pr(S >= l) stage accuracy inside tvar
};

// Parses and validates; throws ConfigError with a field-level message.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Normalized form: parse_config(config_echo(c)) reproduces the same echo.
nlohmann::json config_echo(const RunConfig& c);

// Discretizes the marginals, builds the copula with density bounds, and
// selects truncation windows tight enough for every stage accuracy the
// configured measure will request.
risk::AggregationSetup build_setup(const RunConfig& c, unsigned threads);

// Stage accuracies derived from the config once the grid geometry is known.
struct StageEpsilons {
  double probe = 0.0;     // VaR probes and the tvar tail term
  double tvar_est = 0.0;  // affine-payoff stage
  double tvar_tail = 0.0; // Pr(S >= l) inside tvar
};
StageEpsilons stage_epsilons(const RunConfig& c, double s_lo, double s_hi);

} // namespace qra::cli
