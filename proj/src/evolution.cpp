#include "muskat/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "muskat/errors.hpp"

namespace muskat {

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (n1 < 4 || n1 % 2 != 0) fail("n1 must be even and >= 4");
  if (n2_plus < 3 || n2_minus < 3) fail("n2_plus and n2_minus must be >= 3");
  if (!(beta_plus > 0.0) || !(beta_minus > 0.0)) fail("permeabilities must be positive");
  if (!(dt_safety > 0.0)) fail("dt_safety must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end must be finite and >= 0");
  if (!(gap_tol > 0.0) || gap_tol >= 1.0) fail("gap_tol must lie in (0, 1)");
  if (!(j_min > 0.0) || j_min >= 1.0) fail("j_min must lie in (0, 1)");
  if (report_every < 1) fail("report_every must be >= 1");
}

double time_step(const SimConfig& cfg) {
  const double dx1 = 2.0 * std::numbers::pi / cfg.n1;
  return cfg.dt_safety * dx1 / std::max(cfg.beta_plus, cfg.beta_minus);
}

Model Model::from_config(const SimConfig& cfg, const PeriodicField& f) {
  cfg.validate();
  if (f.size() != cfg.n1) throw ResolutionMismatch("permeability curve does not match n1");
  Model m;
  m.upper = StripGrid(Strip::upper, cfg.n1, cfg.n2_plus);
  m.lower = StripGrid(Strip::lower, cfg.n1, cfg.n2_minus);
  m.profile = PermeabilityProfile(f, cfg.beta_plus, cfg.beta_minus);
  m.gap_tol = cfg.gap_tol;
  m.j_min = cfg.j_min;
  m.solver.kind = cfg.solver;
  return m;
}

void check_gap(const PeriodicField& h, const PermeabilityProfile& profile, double gap_tol) {
  profile.check_admissible(gap_tol);
  const double gap = (h - profile.f).min() + 1.0;
  if (!(gap > gap_tol))
    throw GapViolation("interface approaches the permeability curve: min(h + 1 - f) = " +
                       std::to_string(gap));
}

Evaluation evaluate(const PeriodicField& h, const Model& model) {
  if (h.size() != model.upper.n1) throw ResolutionMismatch("h does not match n1");
  const PeriodicField& f = model.profile.f;
  Evaluation e;
  e.upper = metric_terms(harmonic_extension(h, f, model.upper), model.profile, model.j_min);
  e.lower = metric_terms(harmonic_extension(h, f, model.lower), model.profile, model.j_min);
  e.head = solve_head(e.upper, e.lower, h, model.profile, model.solver);
  e.velocity = project_resolved(e.head.gamma_trace_w2);
  e.dissipation = dissipation_l2(e.head, e.upper, e.lower);
  return e;
}

PeriodicField rhs(const PeriodicField& h, const Model& model) { return evaluate(h, model).velocity; }

namespace {

// h + a v, refusing to build a non-finite state (an unstable step blows up
// long before anything else notices).
PeriodicField axpy(const PeriodicField& h, double a, const PeriodicField& v) {
  std::vector<double> out(h.size());
  for (int j = 0; j < h.size(); ++j) {
    out[j] = h[j] + a * v[j];
    if (!std::isfinite(out[j])) throw SolverDivergence("time step produced a non-finite height");
  }
  return PeriodicField(std::move(out));
}

// RK4 from a known first stage; returns the new height.
PeriodicField rk4(const PeriodicField& h, const Evaluation& e1, const Model& model, double dt,
                  double* diss) {
  const Evaluation e2 = evaluate(axpy(h, 0.5 * dt, e1.velocity), model);
  const Evaluation e3 = evaluate(axpy(h, 0.5 * dt, e2.velocity), model);
  const Evaluation e4 = evaluate(axpy(h, dt, e3.velocity), model);
  if (diss)
    *diss = dt / 6.0 * (e1.dissipation + 2.0 * e2.dissipation + 2.0 * e3.dissipation + e4.dissipation);
  std::vector<double> incr(h.size());
  for (int j = 0; j < h.size(); ++j)
    incr[j] = e1.velocity[j] + 2.0 * e2.velocity[j] + 2.0 * e3.velocity[j] + e4.velocity[j];
  for (double v : incr)
    if (!std::isfinite(v)) throw SolverDivergence("time step produced a non-finite velocity");
  return project_zero_mean(axpy(h, dt / 6.0, PeriodicField(std::move(incr))));
}

}  // namespace

SimState step(const SimState& s, const Model& model, double dt, double* diss) {
  const Evaluation e1 = evaluate(s.h, model);
  SimState out{rk4(s.h, e1, model, dt, diss), s.t + dt, s.step_count + 1};
  check_gap(out.h, model.profile, model.gap_tol);
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::gap_violation: return "gap_violation";
    case Termination::diffeo_degenerate: return "diffeo_degenerate";
    case Termination::solver_failure: return "solver_failure";
  }
  return "unknown";
}

Trajectory run(const SimConfig& cfg, const PeriodicField& h0, const PeriodicField& f,
               const Observer& observer) {
  const Model model = Model::from_config(cfg, f);
  if (h0.size() != cfg.n1) throw ResolutionMismatch("h0 does not match n1");

  Trajectory traj;
  traj.dt = time_step(cfg);
  SimState state{project_zero_mean(h0), 0.0, 0};
  traj.final_state = state;

  auto stop = [&](Termination why, const std::exception& ex) {
    traj.reason = why;
    traj.message = ex.what();
    traj.error_time = state.t;
    return traj;
  };

  try {
    check_gap(state.h, model.profile, model.gap_tol);
  } catch (const GapViolation& ex) {
    return stop(Termination::gap_violation, ex);
  }

  DiagnosticHistory hist;
  hist.h0_l2_sq = std::pow(sobolev_norm(state.h, SobolevIndex(0.0)), 2);

  Evaluation ev;
  long last_reported = -1;
  auto emit = [&] {
    Sample s{state.t, state.h, report(state, ev.head, ev.upper, ev.lower, hist)};
    hist.record(s.report);
    last_reported = state.step_count;
    if (observer) observer(s, ev);
    traj.samples.push_back(std::move(s));
  };

  // Tolerance on the final time so that round-off does not add a sliver step.
  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  try {
    ev = evaluate(state.h, model);
    while (true) {
      if (state.step_count % cfg.report_every == 0) emit();
      if (state.t >= cfg.t_end - t_eps) break;
      const double dt = std::min(traj.dt, cfg.t_end - state.t);
      double diss = 0.0;
      SimState next{rk4(state.h, ev, model, dt, &diss), state.t + dt, state.step_count + 1};
      if (cfg.t_end - next.t <= t_eps) next.t = cfg.t_end;
      try {
        check_gap(next.h, model.profile, model.gap_tol);
      } catch (const GapViolation& ex) {
        traj.error_time = next.t;
        traj.reason = Termination::gap_violation;
        traj.message = ex.what();
        return traj;
      }
      Evaluation next_ev = evaluate(next.h, model);
      hist.dissipation_l2_integral += diss;
      state = std::move(next);
      ev = std::move(next_ev);
      traj.final_state = state;
    }
    if (last_reported != state.step_count) emit();
  } catch (const DiffeoDegenerate& ex) {
    return stop(Termination::diffeo_degenerate, ex);
  } catch (const GapViolation& ex) {
    return stop(Termination::gap_violation, ex);
  } catch (const SolverDivergence& ex) {
    return stop(Termination::solver_failure, ex);
  } catch (const NonSPDSystem& ex) {
    return stop(Termination::solver_failure, ex);
  }
  traj.final_state = state;
  return traj;
}

}  // namespace muskat
