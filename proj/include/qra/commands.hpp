#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qra/config.hpp"

namespace qra::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  unsigned threads = 0;
};

// Exit codes: 0 success, 1 validation/runtime failure, 2 usage or config error.
int cmd_run(const std::string& config_path, const std::string& out_path,
            const Overrides& ov);

int cmd_converge(const std::string& config_path,
                 const std::vector<double>& epsilon_sweep,
                 const std::vector<double>& n_sweep, int seeds,
                 const std::string& out_csv, const Overrides& ov);

int cmd_marginal(const std::string& config_path, int index,
                 const std::string& out_csv, const Overrides& ov);

int cmd_validate(double tolerance_scale);

} // namespace qra::cli
