#pragma once

#include <functional>
#include <string>
#include <vector>

#include "muskat/diagnostics.hpp"
#include "muskat/diffeo.hpp"
#include "muskat/pressure.hpp"
#include "muskat/state.hpp"

namespace muskat {

struct SimConfig {
  int n1 = 128;
  int n2_plus = 64;
  int n2_minus = 64;
  double beta_plus = 1.0;
  double beta_minus = 1.0;
  double dt_safety = 0.5;
  double t_end = 1.0;
  double gap_tol = 1e-3;
  double j_min = default_j_min;
  SolverKind solver = SolverKind::gmres;
  int report_every = 1;

  /// Throws ConfigError on out-of-range entries.
  void validate() const;
};

/// dt = dt_safety * dx1 / max beta.
double time_step(const SimConfig& cfg);

/// Everything fixed for the duration of a run.
struct Model {
  StripGrid upper, lower;
  PermeabilityProfile profile;
  double gap_tol = 1e-3;
  double j_min = default_j_min;
  SolverOptions solver;

  static Model from_config(const SimConfig& cfg, const PeriodicField& f);
};

/// One right-hand-side evaluation and everything computed on the way.
struct Evaluation {
  MetricPack upper, lower;
  HeadSolution head;
  PeriodicField velocity;  // dh/dt, mean and Nyquist removed
  double dissipation = 0.0;
};

/// Throws GapViolation unless min(h + 1 - f) > gap_tol.
void check_gap(const PeriodicField& h, const PermeabilityProfile& profile, double gap_tol);

Evaluation evaluate(const PeriodicField& h, const Model& model);
PeriodicField rhs(const PeriodicField& h, const Model& model);

/// One classical RK4 step. The optional accumulator receives the stage
/// quadrature of the L2 dissipation over the step.
SimState step(const SimState& s, const Model& model, double dt, double* dissipation_increment = nullptr);

enum class Termination { completed, gap_violation, diffeo_degenerate, solver_failure };
std::string to_string(Termination t);

struct Sample {
  double t = 0.0;
  PeriodicField h;
  EnergyReport report;
};

struct Trajectory {
  std::vector<Sample> samples;
  SimState final_state;
  Termination reason = Termination::completed;
  std::string message;
  double error_time = 0.0;
  double dt = 0.0;
};

using Observer = std::function<void(const Sample&, const Evaluation&)>;

/// Integrates from h0 (mean removed) to cfg.t_end. Failures stop the run and
/// keep the samples recorded so far.
Trajectory run(const SimConfig& cfg, const PeriodicField& h0, const PeriodicField& f,
               const Observer& observer = {});

}  // namespace muskat
