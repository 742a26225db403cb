#pragma once

#include <span>
#include <vector>

#include "muskat/diffeo.hpp"
#include "muskat/pressure.hpp"
#include "muskat/state.hpp"

namespace muskat {

/// Linear decay rate of mode k about the flat state (f = 0): h_k' = sigma h_k.
/// Solves the 4x4 two-layer problem for the head profile in x2.
double dispersion_rate(int k, double beta_plus, double beta_minus);
/// Same, from a profile; the permeability curve must be flat.
double dispersion_rate(int k, const PermeabilityProfile& profile);

struct DispersionTable {
  std::vector<int> k;
  std::vector<double> sigma;
};
DispersionTable dispersion_table(int k_max, double beta_plus, double beta_minus);

/// Scalar diagnostics at one time. Norms of h are periodic Sobolev norms;
/// bulk norms sum both strips (trapezoid in x2, exact in x1).
struct EnergyReport {
  double t = 0.0;
  double l2_h = 0.0;    // |h|_0
  double h2_h = 0.0;    // |h|_2
  double h2p5_h = 0.0;  // |h|_2.5
  double E_running = 0.0;
  double script_E = 0.0;  // |h''|_0^2
  double script_D = 0.0;  // ||w''||_0^2 (x1 derivatives only)
  double rt_margin = 1.0;  // min w2 on the interface, plus 1
  double l2_law_residual = 0.0;  // relative to |h0|_0^2
  double coupling_ratio = 0.0;   // |h''|_0.5 / ||w''||_0
  // Ledger entries behind the headline numbers.
  double dissipation_l2 = 0.0;  // sum over strips of int (J / beta) |v|^2
  double dissipation_l2_integral = 0.0;
  double script_D_integral = 0.0;
  double e_integrand = 0.0;  // ||v||_2^2 + |h|_2.5^2
  double mean_h = 0.0;
  double top_flux = 0.0;  // integral of w2 over the interface
  bool finite = true;
};

/// Running quantities carried between reports.
struct DiagnosticHistory {
  double h0_l2_sq = 0.0;
  /// Time integral of dissipation_l2; the stepper advances it with its own
  /// quadrature because it sees every stage.
  double dissipation_l2_integral = 0.0;
  bool has_previous = false;
  double prev_t = 0.0;
  double prev_e_integrand = 0.0;
  double prev_script_D = 0.0;
  double max_h2_sq = 0.0;
  double e_integral = 0.0;
  double script_D_integral = 0.0;

  /// Folds a finished report into the trapezoid accumulators.
  void record(const EnergyReport& r);
};

/// int (J / beta) |v|^2 over both strips with v = grad psi w / J.
double dissipation_l2(const HeadSolution& head, const MetricPack& upper, const MetricPack& lower);

/// Trapezoid-in-x2, exact-in-x1 integral of u^2 over the strip.
double strip_l2_sq(const StripField& u);

EnergyReport report(const SimState& state, const HeadSolution& head, const MetricPack& upper,
                    const MetricPack& lower, const DiagnosticHistory& history);

struct DecayFit {
  double gamma_fit = 0.0;  // -2 x slope of log |h''|_0
  double r_squared = 0.0;
  bool rt_suspect = false;  // the curvature grows
};
DecayFit decay_fit(std::span<const double> t, std::span<const double> h2_seminorm);
DecayFit decay_fit(std::span<const EnergyReport> reports);

}  // namespace muskat
