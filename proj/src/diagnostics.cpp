#include "muskat/diagnostics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "muskat/errors.hpp"

namespace muskat {

double dispersion_rate(int k, double beta_plus, double beta_minus) {
  if (k < 1) throw std::invalid_argument("dispersion_rate: k must be >= 1 (the mean is conserved)");
  if (!(beta_plus > 0.0) || !(beta_minus > 0.0))
    throw std::invalid_argument("dispersion_rate: permeabilities must be positive");
  // Head profile with h_k = 1:
  //   upper  a cosh(k x2) + b sinh(k x2)                on (-1, 0)
  //   lower  c cosh(k (x2 + 2)) + d sinh(k (x2 + 2))   on (-2, -1)
  // Rows: P(0) = 1, no flux at x2 = -2, continuity and beta-weighted flux
  // continuity at x2 = -1. Equations are scaled by cosh k to stay O(1).
  const double kk = k;
  const double ch = 1.0, th = std::tanh(kk);
  Eigen::Matrix4d M;
  Eigen::Vector4d rhs(1.0, 0.0, 0.0, 0.0);
  M << 1.0, 0.0, 0.0, 0.0,
       0.0, 0.0, 0.0, 1.0,
       ch, -th, -ch, -th,
       -beta_plus * th, beta_plus * ch, -beta_minus * th, -beta_minus * ch;
  // Columns are (a, b, c', d') with c = c' / cosh k, d = d' / cosh k.
  const Eigen::Vector4d x = M.fullPivLu().solve(rhs);
  return -beta_plus * kk * x[1];
}

double dispersion_rate(int k, const PermeabilityProfile& profile) {
  if (profile.f.max_abs() != 0.0)
    throw std::invalid_argument("dispersion_rate: only defined for a flat permeability curve (f = 0)");
  return dispersion_rate(k, profile.beta_plus, profile.beta_minus);
}

DispersionTable dispersion_table(int k_max, double beta_plus, double beta_minus) {
  if (k_max < 1) throw std::invalid_argument("dispersion_table: k_max must be >= 1");
  DispersionTable t;
  for (int k = 1; k <= k_max; ++k) {
    t.k.push_back(k);
    t.sigma.push_back(dispersion_rate(k, beta_plus, beta_minus));
  }
  return t;
}

double strip_l2_sq(const StripField& u) {
  const StripGrid& g = u.grid();
  double sum = 0.0;
  for (int m = 0; m < g.n2; ++m) {
    const double w = (m == 0 || m == g.n2 - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (double v : u.row(m)) row += v * v;
    sum += w * row;
  }
  return sum * g.dx1() * g.dx2();
}

namespace {

void second_x1(const StripField& u, StripField& out) {
  out = StripField(u.grid());
  for (int m = 0; m < u.grid().n2; ++m) spectral_derivative(u.row(m), out.row(m), 2);
}

struct Velocity {
  StripField v1, v2;
};

Velocity back_map(const StripField& w1, const StripField& w2, const MetricPack& p) {
  Velocity v{StripField(p.grid), StripField(p.grid)};
  for (int i = 0; i < p.grid.size(); ++i) {
    const double J = p.jac.data()[i];
    const double a = p.d1.data()[i];
    v.v1.data()[i] = w1.data()[i] / J;
    v.v2.data()[i] = (a * w1.data()[i] + J * w2.data()[i]) / J;
  }
  return v;
}

double h2_sq(const StripField& u) {
  const StripField u1 = dx1(u), u2 = dx2(u);
  return strip_l2_sq(u) + strip_l2_sq(u1) + strip_l2_sq(u2) + strip_l2_sq(dx1(u1)) +
         strip_l2_sq(dx2(u1)) + strip_l2_sq(dx2(u2));
}

}  // namespace

double dissipation_l2(const HeadSolution& head, const MetricPack& up, const MetricPack& lo) {
  double total = 0.0;
  auto strip = [&](const StripField& w1, const StripField& w2, const MetricPack& p) {
    const Velocity v = back_map(w1, w2, p);
    StripField dens(p.grid);
    for (int i = 0; i < p.grid.size(); ++i) {
      const double a = v.v1.data()[i], b = v.v2.data()[i];
      dens.data()[i] = std::sqrt(p.jac.data()[i] / p.beta * (a * a + b * b));
    }
    total += strip_l2_sq(dens);
  };
  strip(head.w1_upper, head.w2_upper, up);
  strip(head.w1_lower, head.w2_lower, lo);
  return total;
}

void DiagnosticHistory::record(const EnergyReport& r) {
  if (has_previous) {
    const double dt = r.t - prev_t;
    e_integral += 0.5 * dt * (prev_e_integrand + r.e_integrand);
    script_D_integral += 0.5 * dt * (prev_script_D + r.script_D);
  }
  max_h2_sq = std::max(max_h2_sq, r.h2_h * r.h2_h);
  has_previous = true;
  prev_t = r.t;
  prev_e_integrand = r.e_integrand;
  prev_script_D = r.script_D;
}

EnergyReport report(const SimState& state, const HeadSolution& head, const MetricPack& up,
                    const MetricPack& lo, const DiagnosticHistory& hist) {
  const PeriodicField& h = state.h;
  EnergyReport r;
  r.t = state.t;
  r.l2_h = sobolev_norm(h, SobolevIndex(0.0));
  r.h2_h = sobolev_norm(h, SobolevIndex(2.0));
  r.h2p5_h = sobolev_norm(h, SobolevIndex(2.5));
  const PeriodicField hpp = deriv(h, 2);
  r.script_E = std::pow(sobolev_norm(hpp, SobolevIndex(0.0)), 2);

  StripField tmp;
  double D = 0.0;
  for (const StripField* w : {&head.w1_upper, &head.w2_upper, &head.w1_lower, &head.w2_lower}) {
    second_x1(*w, tmp);
    D += strip_l2_sq(tmp);
  }
  r.script_D = D;
  r.rt_margin = head.gamma_trace_w2.min() + 1.0;
  r.mean_h = mean(h);
  r.top_flux = integral(head.gamma_trace_w2);

  r.dissipation_l2 = dissipation_l2(head, up, lo);
  r.dissipation_l2_integral = hist.dissipation_l2_integral;
  if (hist.h0_l2_sq > 0.0)
    r.l2_law_residual =
        (r.l2_h * r.l2_h + 2.0 * hist.dissipation_l2_integral - hist.h0_l2_sq) / hist.h0_l2_sq;

  const double num = sobolev_norm(hpp, SobolevIndex(0.5));
  r.coupling_ratio = num == 0.0 ? 0.0 : num / std::sqrt(D);

  const Velocity vu = back_map(head.w1_upper, head.w2_upper, up);
  const Velocity vl = back_map(head.w1_lower, head.w2_lower, lo);
  r.e_integrand = h2_sq(vu.v1) + h2_sq(vu.v2) + h2_sq(vl.v1) + h2_sq(vl.v2) + r.h2p5_h * r.h2p5_h;

  double e_int = hist.e_integral, d_int = hist.script_D_integral;
  if (hist.has_previous) {
    const double dt = r.t - hist.prev_t;
    e_int += 0.5 * dt * (hist.prev_e_integrand + r.e_integrand);
    d_int += 0.5 * dt * (hist.prev_script_D + r.script_D);
  }
  r.E_running = std::max(hist.max_h2_sq, r.h2_h * r.h2_h) + e_int;
  r.script_D_integral = d_int;

  for (double v : {r.l2_h, r.h2_h, r.h2p5_h, r.E_running, r.script_E, r.script_D, r.rt_margin,
                   r.l2_law_residual, r.coupling_ratio, r.dissipation_l2})
    if (!std::isfinite(v)) r.finite = false;
  return r;
}

DecayFit decay_fit(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("decay_fit: size mismatch");
  if (t.size() < 10) throw InsufficientData("decay_fit: need at least 10 samples");
  const std::size_t n = t.size();
  double st = 0, sy = 0;
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw InsufficientData("decay_fit: |h''|_0 must be positive at every sample");
    ly[i] = std::log(y[i]);
    st += t[i];
    sy += ly[i];
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (ly[i] - ym);
    syy += (ly[i] - ym) * (ly[i] - ym);
  }
  if (stt == 0.0) throw InsufficientData("decay_fit: samples share one time");
  const double slope = sty / stt;
  DecayFit fit;
  fit.gamma_fit = -2.0 * slope;
  fit.r_squared = syy == 0.0 ? 1.0 : (sty * sty) / (stt * syy);
  fit.rt_suspect = fit.gamma_fit < 0.0;
  return fit;
}

DecayFit decay_fit(std::span<const EnergyReport> reports) {
  std::vector<double> t, y;
  for (const auto& r : reports) {
    t.push_back(r.t);
    y.push_back(std::sqrt(r.script_E));
  }
  return decay_fit(t, y);
}

}  // namespace muskat
