#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qra/commands.hpp"
#include "qra/kernels.hpp"
#include "qra/parallel.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-based risk aggregation with a simulated amplitude-estimation pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_path = "report.json", kernel = "auto";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "JSON run configuration");
    if (needs_config) c->required();
    sub->add_option("--seed", seed, "override run.seed")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--threads", threads, "cap worker threads (0 = hardware)");
    sub->add_option("--mode", mode, "override run.mode (quantum|classical|both)");
    sub->add_option("--kernel", kernel, "kernel backend (auto|scalar|avx2)");
  };

  auto* run = app.add_subcommand("run", "execute the configured pipelines");
  add_common(run, true);
  run->add_option("--out", out_path, "output report path (JSON)");

  auto* converge = app.add_subcommand("converge", "accuracy/cost sweep to CSV");
  add_common(converge, true);
  std::string sweep_eps_csv, sweep_n_csv;
  int seeds = 3;
  converge->add_option("--out", out_path, "output CSV path");
  converge->add_option("--sweep-epsilon", sweep_eps_csv,
                       "comma-separated epsilon values (quantum VaR sweep)");
  converge->add_option("--sweep-n", sweep_n_csv,
                       "comma-separated sample counts (classical VaR sweep)");
  converge->add_option("--seeds", seeds, "seeds per sweep point");

  auto* marginal = app.add_subcommand("marginal", "dump one estimated marginal CDF");
  add_common(marginal, true);
  int index = 0;
  marginal->add_option("--index", index, "marginal index")->required();
  marginal->add_option("--out", out_path, "output CSV path");

  auto* validate = app.add_subcommand("validate", "run the built-in invariant suite");
  double tolerance_scale = 1.0;
  validate->add_option("--tolerance-scale", tolerance_scale,
                       "scale applied to every tolerance (testing hook)");
  validate->add_option("--kernel", kernel, "kernel backend (auto|scalar|avx2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (kernel != "auto") {
    try {
      qra::kern::set_backend(kernel == "scalar" ? qra::kern::Backend::scalar
                             : kernel == "avx2" ? qra::kern::Backend::avx2
                                                : throw std::runtime_error(
                                                      "unknown kernel backend: " + kernel));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  qra::set_default_threads(threads);

  qra::cli::Overrides ov;
  if (seed_set) ov.seed = seed;
  if (!mode.empty()) ov.mode = mode;
  ov.threads = threads;

  if (run->parsed()) return qra::cli::cmd_run(config_path, out_path, ov);
  if (converge->parsed())
    return qra::cli::cmd_converge(config_path, parse_list(sweep_eps_csv),
                                  parse_list(sweep_n_csv), seeds, out_path, ov);
  if (marginal->parsed()) return qra::cli::cmd_marginal(config_path, index, out_path, ov);
  if (validate->parsed()) return qra::cli::cmd_validate(tolerance_scale);
  return 2;
}
