#include "muskat/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "muskat/errors.hpp"

namespace muskat {

StripGrid::StripGrid(Strip s, int n1_, int n2_) : strip(s), n1(n1_), n2(n2_) {
  if (n1 <= 0 || n1 % 2 != 0) throw std::invalid_argument("StripGrid: n1 must be positive and even");
  if (n2 < 3) throw std::invalid_argument("StripGrid: n2 must be at least 3");
}

double StripGrid::dx1() const { return 2.0 * std::numbers::pi / n1; }

StripField::StripField(const StripGrid& grid, double fill) : grid_(grid), v_(grid.size(), fill) {}

double StripField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double StripField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double StripField::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

PermeabilityProfile::PermeabilityProfile(PeriodicField f_, double bp, double bm)
    : f(std::move(f_)), beta_plus(bp), beta_minus(bm) {
  if (!(bp > 0.0) || !(bm > 0.0) || !std::isfinite(bp) || !std::isfinite(bm))
    throw std::invalid_argument("PermeabilityProfile: permeabilities must be positive");
}

void PermeabilityProfile::check_admissible(double gap_tol) const {
  if (f.min() <= -1.0 + gap_tol) {
    std::ostringstream os;
    os << "permeability curve reaches the bottom: min f = " << f.min();
    throw GapViolation(os.str());
  }
}

namespace {

// sinh(k s) / sinh(k) for s in [0, 1], written to avoid overflow at large k.
double sinh_ratio(int k, double s) {
  if (k == 0) return s;
  const double e2 = std::exp(-2.0 * k);
  return std::exp(k * (s - 1.0)) * (1.0 - std::exp(-2.0 * k * s)) / (1.0 - e2);
}

// d/ds of sinh_ratio.
double cosh_ratio(int k, double s) {
  if (k == 0) return 1.0;
  const double e2 = std::exp(-2.0 * k);
  return k * std::exp(k * (s - 1.0)) * (1.0 + std::exp(-2.0 * k * s)) / (1.0 - e2);
}

template <class Profile>
StripField extend(const PeriodicField& h, const PeriodicField& f, const StripGrid& grid,
                  Profile&& profile) {
  if (h.size() != grid.n1 || f.size() != grid.n1)
    throw ResolutionMismatch("harmonic_extension: trace resolution differs from grid n1");
  const int n = grid.n1;
  const int nh = n / 2 + 1;
  std::vector<cplx> hh(nh), fh(nh), row(nh);
  detail::forward(h.values(), hh);
  detail::forward(f.values(), fh);
  StripField out(grid);
  for (int m = 0; m < grid.n2; ++m) {
    const double s = double(m) / (grid.n2 - 1);  // distance above the strip bottom
    for (int k = 0; k < nh; ++k) {
      if (grid.strip == Strip::upper)
        row[k] = hh[k] * profile(k, s, +1) + fh[k] * profile(k, 1.0 - s, -1);
      else
        row[k] = fh[k] * profile(k, s, +1);
    }
    detail::inverse(row, out.row(m));
  }
  return out;
}

}  // namespace

StripField harmonic_extension(const PeriodicField& h, const PeriodicField& f, const StripGrid& grid) {
  return extend(h, f, grid, [](int k, double s, int) { return sinh_ratio(k, s); });
}

StripField harmonic_extension_dx2(const PeriodicField& h, const PeriodicField& f,
                                  const StripGrid& grid) {
  return extend(h, f, grid, [](int k, double s, int sign) { return sign * cosh_ratio(k, s); });
}

StripField dx1(const StripField& u) {
  StripField out(u.grid());
  for (int m = 0; m < u.grid().n2; ++m) spectral_derivative(u.row(m), out.row(m), 1);
  return out;
}

StripField dx2(const StripField& u) {
  const auto& g = u.grid();
  const double inv = 1.0 / (2.0 * g.dx2());
  const int top = g.n2 - 1;
  StripField out(g);
  for (int j = 0; j < g.n1; ++j) {
    out(j, 0) = (-3.0 * u(j, 0) + 4.0 * u(j, 1) - u(j, 2)) * inv;
    for (int m = 1; m < top; ++m) out(j, m) = (u(j, m + 1) - u(j, m - 1)) * inv;
    out(j, top) = (3.0 * u(j, top) - 4.0 * u(j, top - 1) + u(j, top - 2)) * inv;
  }
  return out;
}

MetricPack assemble_metric(StripField delta_psi, StripField d1, StripField d2, double beta,
                           double j_min) {
  const StripGrid g = delta_psi.grid();
  if (d1.grid() != g || d2.grid() != g) throw ResolutionMismatch("assemble_metric: grids differ");
  MetricPack p;
  p.grid = g;
  p.beta = beta;
  p.jac = StripField(g);
  p.A = {StripField(g, 1.0), StripField(g), StripField(g), StripField(g)};
  p.K = {StripField(g), StripField(g), StripField(g)};
  double jmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    const double a = d1.data()[i];
    const double J = 1.0 + d2.data()[i];
    jmin = std::min(jmin, J);
    p.jac.data()[i] = J;
    p.A.yx.data()[i] = -a / J;
    p.A.yy.data()[i] = 1.0 / J;
    p.K.xx.data()[i] = beta * J;
    p.K.xy.data()[i] = -beta * a;
    p.K.yy.data()[i] = beta * (1.0 + a * a) / J;
  }
  if (!(jmin > j_min)) {
    std::ostringstream os;
    os << "min J = " << jmin << " <= j_min = " << j_min << " on the "
       << (g.strip == Strip::upper ? "upper" : "lower") << " strip";
    throw DiffeoDegenerate(os.str());
  }
  p.delta_psi = std::move(delta_psi);
  p.d1 = std::move(d1);
  p.d2 = std::move(d2);
  return p;
}

MetricPack metric_terms(const StripField& delta_psi, const PermeabilityProfile& profile,
                        double j_min) {
  return assemble_metric(delta_psi, dx1(delta_psi), dx2(delta_psi),
                         profile.beta(delta_psi.grid().strip), j_min);
}

Mat2Field nonlinear_gap(const MetricPack& p) {
  const auto& g = p.grid;
  Mat2Field out{StripField(g), StripField(g), StripField(g), StripField(g)};
  for (int i = 0; i < g.size(); ++i) {
    const double a = p.d1.data()[i];
    const double b = p.d2.data()[i];
    const double J = p.jac.data()[i];
    out.xx.data()[i] = (b - a * a) / J;
    out.xy.data()[i] = -a;
    out.yx.data()[i] = -a;
    out.yy.data()[i] = -b;
  }
  return out;
}

PiolaResidual piola_residual(const MetricPack& p, const StripField& exact_d2) {
  // Row 2 of J A is (0, 1): divergence-free identically. Row 1 is (J, -d1).
  const StripField dJ = dx1(p.jac);
  const StripField d2_of_d1 = dx2(p.d1);
  const StripField d1_of_exact_d2 = dx1(exact_d2);
  PiolaResidual r{0.0, 0.0};
  for (int i = 0; i < p.grid.size(); ++i) {
    r.discrete = std::max(r.discrete, std::abs(dJ.data()[i] - d2_of_d1.data()[i]));
    r.consistency = std::max(r.consistency, std::abs(dJ.data()[i] - d1_of_exact_d2.data()[i]));
  }
  return r;
}

}  // namespace muskat
