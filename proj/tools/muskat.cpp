// muskat: command-line driver.
#include <cstdlib>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "muskat/commands.hpp"
#include "muskat/io.hpp"

namespace {

// MUSKAT_THREADS caps OpenMP parallelism; 0 or unset leaves the runtime default.
void apply_thread_cap() {
  const char* env = std::getenv("MUSKAT_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) {
    std::cerr << "muskat: ignoring MUSKAT_THREADS='" << env << "' (expected a non-negative integer)\n";
    return;
  }
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
#endif
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"Muskat interface evolution with a permeability jump"};
  app.set_version_flag("--version", std::string(muskat::version_string()));
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "integrate a configuration and write CSV, snapshots and a manifest");
  run->add_option("config", config, "JSON configuration")->required();

  double bp = 1.0, bm = 1.0;
  int k_max = 0;
  auto* disp = app.add_subcommand("dispersion", "print the linear decay rate sigma(k), k = 1..k_max");
  disp->add_option("beta_plus", bp)->required();
  disp->add_option("beta_minus", bm)->required();
  disp->add_option("k_max", k_max)->required();

  auto* check = app.add_subcommand("check", "run the invariant suite at the configured resolution");
  check->add_option("config", config, "JSON configuration")->required();

  auto* conv = app.add_subcommand("convergence", "self-convergence orders in x2 and in time");
  conv->add_option("config", config, "JSON configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : muskat::exit_usage;
  }

  if (*run) return muskat::cmd_run(config, std::cout, std::cerr);
  if (*disp) return muskat::cmd_dispersion(bp, bm, k_max, std::cout, std::cerr);
  if (*check) return muskat::cmd_check(config, std::cout, std::cerr);
  if (*conv) return muskat::cmd_convergence(config, std::cout, std::cerr);
  return muskat::exit_usage;
}
