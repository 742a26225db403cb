#include <cmath>

#include "doctest.h"
#include "muskat/diagnostics.hpp"
#include "muskat/errors.hpp"
#include "muskat/evolution.hpp"

using namespace muskat;

TEST_SUITE("diagnostics") {

TEST_CASE("dispersion: uniform permeability") {
  CHECK(dispersion_rate(1, 1.0, 1.0) == doctest::Approx(-std::tanh(2.0)).epsilon(1e-14));
  CHECK(dispersion_rate(1, 1.0, 1.0) == doctest::Approx(-0.9640).epsilon(1e-4));
  for (int k = 1; k <= 30; ++k)
    CHECK(dispersion_rate(k, 2.5, 2.5) == doctest::Approx(-2.5 * k * std::tanh(2.0 * k)).epsilon(1e-13));
  // Deep water.
  CHECK(dispersion_rate(40, 1.3, 1.3) / 40 == doctest::Approx(-1.3).epsilon(1e-14));
}

TEST_CASE("dispersion: layer limits") {
  // Impermeable lower layer: depth-1 layer over a no-flux floor, -b k tanh k.
  for (int k = 1; k <= 4; ++k)
    CHECK(dispersion_rate(k, 1.0, 1e-12) == doctest::Approx(-k * std::tanh(k)).epsilon(1e-10));
  // Very permeable lower layer: the permeability curve acts as P = 0, -b k coth k.
  for (int k = 1; k <= 4; ++k)
    CHECK(dispersion_rate(k, 1.0, 1e12) == doctest::Approx(-k / std::tanh(k)).epsilon(1e-10));
}

TEST_CASE("dispersion: monotone and homogeneous") {
  for (auto [bp, bm] : {std::pair{1.0, 0.1}, std::pair{0.1, 1.0}, std::pair{2.0, 3.0}}) {
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double s = dispersion_rate(k, bp, bm);
      CHECK(s < prev);
      prev = s;
      CHECK(dispersion_rate(k, 3 * bp, 3 * bm) == doctest::Approx(3 * s).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(dispersion_rate(0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dispersion_rate(1, 0.0, 1.0), std::invalid_argument);
  const auto f = PeriodicField::sample(16, [](double x) { return 0.1 * std::cos(x); });
  CHECK_THROWS_AS(dispersion_rate(1, PermeabilityProfile(f, 1, 1)), std::invalid_argument);
  CHECK(dispersion_rate(2, PermeabilityProfile(PeriodicField::zeros(16), 1, 2)) == dispersion_rate(2, 1, 2));
  CHECK_THROWS_AS(dispersion_table(0, 1, 1), std::invalid_argument);
  CHECK(dispersion_table(5, 1, 1).sigma.size() == 5);
}

TEST_CASE("decay fit") {
  std::vector<double> t, y;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.25 * i);
    y.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  auto fit = decay_fit(t, y);
  CHECK(std::abs(fit.gamma_fit - 1.4) < 1e-10);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_FALSE(fit.rt_suspect);

  for (auto& v : y) v = 1.0 / v;
  fit = decay_fit(t, y);
  CHECK(fit.gamma_fit < 0.0);
  CHECK(fit.rt_suspect);

  CHECK_THROWS_AS(decay_fit(std::span(t).first(9), std::span(y).first(9)), InsufficientData);
  y[4] = 0.0;
  CHECK_THROWS_AS(decay_fit(t, y), InsufficientData);
}

TEST_CASE("reports at rest") {
  SimConfig c;
  c.n1 = 16;
  c.n2_plus = c.n2_minus = 9;
  const auto zero = PeriodicField::zeros(16);
  const Model m = Model::from_config(c, zero);
  const Evaluation e = evaluate(zero, m);
  DiagnosticHistory hist;
  const auto r = report(SimState{zero, 0.0, 0}, e.head, e.upper, e.lower, hist);
  CHECK(r.l2_h == 0.0);
  CHECK(r.h2p5_h == 0.0);
  CHECK(r.script_E == 0.0);
  CHECK(r.script_D == 0.0);
  CHECK(r.E_running == 0.0);
  CHECK(r.rt_margin == 1.0);
  CHECK(r.l2_law_residual == 0.0);
  CHECK(r.coupling_ratio == 0.0);
  CHECK(r.dissipation_l2 == 0.0);
  CHECK(r.finite);
}

TEST_CASE("dissipation balances the interface power") {
  // d/dt |h|^2 / 2 = int h w2 must equal -int (J / beta)|v|^2 up to O(dx2^2).
  const int n = 32;
  const auto h = PeriodicField::sample(n, [](double x) { return 0.1 * std::cos(x) + 0.02 * std::sin(3 * x); });
  const auto f = PeriodicField::sample(n, [](double x) { return 0.1 * std::sin(2 * x); });
  double prev = 0.0;
  for (int n2 : {17, 33, 65}) {
    SimConfig c;
    c.n1 = n;
    c.n2_plus = c.n2_minus = n2;
    c.beta_minus = 0.4;
    const Evaluation e = evaluate(h, Model::from_config(c, f));
    std::vector<double> hw(n);
    for (int j = 0; j < n; ++j) hw[j] = h[j] * e.head.gamma_trace_w2[j];
    const double power = integral(PeriodicField(hw));
    const double gap = std::abs(power + e.dissipation) / e.dissipation;
    CHECK(gap < 1e-2);
    if (prev > 0.0) CHECK(std::log2(prev / gap) > 1.8);
    prev = gap;
  }
}

TEST_CASE("running energy accumulates") {
  DiagnosticHistory h;
  EnergyReport a, b;
  a.t = 0.0;
  a.e_integrand = 2.0;
  a.h2_h = 3.0;
  b.t = 0.5;
  b.e_integrand = 4.0;
  b.h2_h = 1.0;
  h.record(a);
  h.record(b);
  CHECK(h.e_integral == doctest::Approx(1.5));
  CHECK(h.max_h2_sq == 9.0);
}

}
