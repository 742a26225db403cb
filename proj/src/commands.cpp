#include "muskat/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "muskat/errors.hpp"
#include "muskat/io.hpp"

namespace fs = std::filesystem;

namespace muskat {

namespace {

int exit_for(Termination t) {
  switch (t) {
    case Termination::completed: return exit_ok;
    case Termination::gap_violation:
    case Termination::diffeo_degenerate: return exit_physical;
    case Termination::solver_failure: return exit_solver;
  }
  return exit_solver;
}

bool load(const std::string& path, RunConfig& cfg, std::ostream& err, const char* cmd) {
  try {
    cfg = load_config(path);
    return true;
  } catch (const std::exception& e) {
    err << "muskat " << cmd << ": " << e.what() << "\n"
        << "usage: muskat " << cmd << " <config.json>\n";
    return false;
  }
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!load(config_path, cfg, err, "run")) return exit_usage;

  RunManifest man;
  man.start_time = utc_now();
  man.version = version_string();
  man.config_json = config_to_json(cfg);
  try {
    fs::create_directories(cfg.output_dir);
    const PeriodicField f = cfg.f();
    const fs::path csv = cfg.output_dir / "timeseries.csv";
    TimeseriesWriter writer(csv);
    man.timeseries = csv.filename().string();

    int index = 0;
    Snapshot last;
    bool last_written = true;
    auto observer = [&](const Sample& s, const Evaluation& ev) {
      writer.write(s.report);
      last = make_snapshot(s.t, s.h, f, ev.head);
      last_written = false;
      if (index == 0 || (cfg.snapshot_every > 0 && index % cfg.snapshot_every == 0)) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06d.bin", index);
        write_snapshot(cfg.output_dir / name, last);
        man.snapshots.push_back(name);
        last_written = true;
      }
      ++index;
    };
    const Trajectory traj = run(cfg.sim, cfg.h0(), f, observer);
    if (!last_written) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06d.bin", index - 1);
      write_snapshot(cfg.output_dir / name, last);
      man.snapshots.push_back(name);
    }
    man.reason = traj.reason;
    man.message = traj.message;
    man.error_time = traj.error_time;
    man.steps = traj.final_state.step_count;
    man.dt = traj.dt;
    man.end_time = utc_now();
    write_manifest(cfg.output_dir / "manifest.json", man);

    out << "termination: " << to_string(traj.reason) << "  steps: " << man.steps
        << "  t: " << fmt(traj.final_state.t) << "\n";
    if (!traj.message.empty()) err << "muskat run: " << traj.message << "\n";
    return exit_for(traj.reason);
  } catch (const ConfigError& e) {
    err << "muskat run: " << e.what() << "\n";
    return exit_usage;
  } catch (const ResolutionMismatch& e) {
    err << "muskat run: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "muskat run: " << e.what() << "\n";
    return exit_solver;
  }
}

int cmd_dispersion(double beta_plus, double beta_minus, int k_max, std::ostream& out, std::ostream& err) {
  try {
    const DispersionTable t = dispersion_table(k_max, beta_plus, beta_minus);
    out << "k,sigma\n";
    char buf[64];
    for (std::size_t i = 0; i < t.k.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%.17g\n", t.k[i], t.sigma[i]);
      out << buf;
    }
    return exit_ok;
  } catch (const std::exception& e) {
    err << "muskat dispersion: " << e.what() << "\n"
        << "usage: muskat dispersion <beta_plus> <beta_minus> <k_max>   (k_max >= 1, betas > 0)\n";
    return exit_usage;
  }
}

// ---- check ----

namespace {

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

SimConfig with_levels(SimConfig c, int n2_plus, int n2_minus) {
  c.n2_plus = n2_plus;
  c.n2_minus = n2_minus;
  return c;
}

PeriodicField fallback(const PeriodicField& h, int n1, double amplitude) {
  if (h.max_abs() > 0.0) return h;
  return PeriodicField::sample(n1, [&](double x) { return amplitude * std::cos(x); });
}

}  // namespace

int cmd_check(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!load(config_path, cfg, err, "check")) return exit_usage;
  const SimConfig& sc = cfg.sim;
  const int n1 = sc.n1;
  const PeriodicField f = cfg.f();
  const PeriodicField f_probe = f.max_abs() > 0.0
      ? f
      : PeriodicField::sample(n1, [](double x) { return 0.1 * std::cos(x); });

  std::vector<CheckLine> lines;
  auto guard = [&](const std::string& name, const std::function<CheckLine()>& body) {
    try {
      lines.push_back(body());
    } catch (const std::exception& e) {
      lines.push_back({name, false, std::string("raised: ") + e.what()});
    }
  };

  guard("rest_state", [&] {
    const Model m = Model::from_config(sc, PeriodicField::zeros(n1));
    const double v = rhs(PeriodicField::zeros(n1), m).max_abs();
    return CheckLine{"rest_state", v == 0.0, "max|rhs| = " + fmt(v)};
  });

  guard("flat_steady_with_f", [&] {
    const Model m = Model::from_config(sc, f_probe);
    const double v = rhs(PeriodicField::zeros(n1), m).max_abs();
    return CheckLine{"flat_steady_with_f", v <= 1e-12, "max|rhs| = " + fmt(v)};
  });

  guard("piola", [&] {
    const PeriodicField h = fallback(cfg.h0(), n1, 0.05);
    const PermeabilityProfile prof(f_probe, sc.beta_plus, sc.beta_minus);
    double r[2];
    const int n2[2] = {sc.n2_plus, 2 * sc.n2_plus - 1};
    for (int i = 0; i < 2; ++i) {
      const StripGrid g(Strip::upper, n1, n2[i]);
      const MetricPack p = metric_terms(harmonic_extension(h, f_probe, g), prof, sc.j_min);
      r[i] = piola_residual(p, harmonic_extension_dx2(h, f_probe, g)).consistency;
    }
    const double order = std::log2(r[0] / r[1]);
    return CheckLine{"piola", order >= 1.9, "residual " + fmt(r[0]) + ", order " + fmt(order, 3)};
  });

  guard("dispersion", [&] {
    const int n = 32;
    SimConfig c = sc;
    c.n1 = n;
    const Model m = Model::from_config(c, PeriodicField::zeros(n));
    const double dx2 = 1.0 / (std::min(sc.n2_plus, sc.n2_minus) - 1);
    double worst = 0.0;
    bool ok = true;
    for (int k = 1; k <= 4; ++k) {
      const PeriodicField h = PeriodicField::sample(n, [&](double x) { return 1e-4 * std::cos(k * x); });
      const double measured = rhs(h, m).coeff(k).real() / h.coeff(k).real();
      const double rel = std::abs(measured / dispersion_rate(k, sc.beta_plus, sc.beta_minus) - 1.0);
      worst = std::max(worst, rel);
      ok = ok && rel <= 0.01 + 4.0 * k * k * dx2 * dx2;
    }
    return CheckLine{"dispersion", ok, "worst relative error " + fmt(worst)};
  });

  guard("l2_law", [&] {
    SimConfig c = sc;
    c.t_end = 10 * time_step(sc);
    c.report_every = 1;
    const Trajectory t = run(c, fallback(cfg.h0(), n1, 0.05), f);
    if (t.reason != Termination::completed)
      return CheckLine{"l2_law", false, "run ended with " + to_string(t.reason)};
    double worst = 0.0;
    for (const Sample& s : t.samples) worst = std::max(worst, std::abs(s.report.l2_law_residual));
    // 1e-3 at 64 levels per strip; the defect is second order in dx2.
    const int n2 = std::min(sc.n2_plus, sc.n2_minus);
    const double tol = 1e-3 * std::max(1.0, std::pow(63.0 / (n2 - 1), 2));
    return CheckLine{"l2_law", worst <= tol, "max relative residual " + fmt(worst) + " (tol " + fmt(tol, 3) + ")"};
  });

  guard("temporal_stability", [&] {
    SimConfig c = sc;
    c.t_end = 200 * time_step(sc);
    c.report_every = 1000000;
    const int kh = n1 / 2 - 1;
    const PeriodicField base = fallback(cfg.h0(), n1, 0.01);
    const PeriodicField h0 =
        base + PeriodicField::sample(n1, [&](double x) { return 1e-6 * std::cos(kh * x); });
    const Trajectory t = run(c, h0, f);
    if (t.reason != Termination::completed)
      return CheckLine{"temporal_stability", false,
                       "run ended with " + to_string(t.reason) + " at t = " + fmt(t.error_time)};
    const double growth = t.final_state.h.max_abs() / project_zero_mean(h0).max_abs();
    return CheckLine{"temporal_stability", growth <= 2.0, "max|h| growth factor " + fmt(growth)};
  });

  bool all = true;
  for (const CheckLine& l : lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << "\n";
    all = all && l.pass;
  }
  return all ? exit_ok : exit_check_failed;
}

// ---- convergence ----

namespace {

// Max-norm differences of consecutive refinements and the implied order.
struct Ladder {
  double e1 = 0.0, e2 = 0.0;
};

std::string order_text(const Ladder& l) {
  if (l.e1 == 0.0 && l.e2 == 0.0) return "exact";
  if (l.e2 == 0.0) return "inf";
  return fmt(std::log2(l.e1 / l.e2), 4);
}

}  // namespace

int cmd_convergence(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!load(config_path, cfg, err, "convergence")) return exit_usage;
  const SimConfig& sc = cfg.sim;
  const PeriodicField f = cfg.f();
  const PeriodicField h0 = cfg.h0();

  // The initial data should decay over the top third of the spectrum.
  {
    double peak = 0.0, tail = 0.0;
    for (int k = 1; k <= sc.n1 / 2; ++k) {
      const double a = std::max(std::abs(h0.coeff(k)), std::abs(f.coeff(k)));
      peak = std::max(peak, a);
      if (3 * k > sc.n1) tail = std::max(tail, a);
    }
    if (peak > 0.0 && tail > 1e-8 * peak)
      out << "warning: n1 = " << sc.n1 << " under-resolves the data (upper-third spectral content "
          << fmt(tail / peak, 3) << " of peak)\n";
  }

  int worst = exit_ok;
  auto final_h = [&](const SimConfig& c) -> std::optional<PeriodicField> {
    const Trajectory t = run(c, h0, f);
    if (t.reason != Termination::completed) {
      err << "muskat convergence: run at n2 = (" << c.n2_plus << ", " << c.n2_minus
          << "), dt_safety = " << c.dt_safety << " ended with " << to_string(t.reason) << ": "
          << t.message << "\n";
      worst = std::max(worst, exit_for(t.reason));
      return std::nullopt;
    }
    return t.final_state.h;
  };

  try {
    // Space: n -> 2n - 1 levels halves dx2. Same dt throughout.
    {
      std::optional<PeriodicField> h[3];
      for (int i = 0; i < 3; ++i) {
        const int s = 1 << i;
        h[i] = final_h(with_levels(sc, s * (sc.n2_plus - 1) + 1, s * (sc.n2_minus - 1) + 1));
        if (!h[i]) return worst;
      }
      const Ladder l{(*h[0] - *h[1]).max_abs(), (*h[1] - *h[2]).max_abs()};
      out << "spatial: n2_plus " << sc.n2_plus << " -> " << 2 * sc.n2_plus - 1 << " -> "
          << 4 * sc.n2_plus - 3 << "  differences " << fmt(l.e1) << ", " << fmt(l.e2)
          << "  order " << order_text(l) << "\n";
    }
    // Time: dt, dt/2, dt/4.
    {
      std::optional<PeriodicField> h[3];
      for (int i = 0; i < 3; ++i) {
        SimConfig c = sc;
        c.dt_safety = sc.dt_safety / (1 << i);
        h[i] = final_h(c);
        if (!h[i]) return worst;
      }
      const Ladder l{(*h[0] - *h[1]).max_abs(), (*h[1] - *h[2]).max_abs()};
      out << "temporal: dt_safety " << sc.dt_safety << " -> " << sc.dt_safety / 2 << " -> "
          << sc.dt_safety / 4 << "  differences " << fmt(l.e1) << ", " << fmt(l.e2) << "  order "
          << order_text(l) << "\n";
    }
  } catch (const std::exception& e) {
    err << "muskat convergence: " << e.what() << "\n";
    return exit_solver;
  }
  return worst;
}

}  // namespace muskat
