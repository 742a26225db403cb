#pragma once

#include <iosfwd>
#include <string>

namespace muskat {

// Exit codes shared by the CLI and the Python bindings.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_physical = 2,  // gap violation or degenerate map
  exit_solver = 3,
  exit_check_failed = 4,
};

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_dispersion(double beta_plus, double beta_minus, int k_max, std::ostream& out, std::ostream& err);
int cmd_check(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_convergence(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace muskat
