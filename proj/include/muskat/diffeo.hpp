#pragma once

#include <span>
#include <vector>

#include "muskat/spectral.hpp"

namespace muskat {

/// upper = S^1 x (-1, 0) (fluid above the permeability curve),
/// lower = S^1 x (-2, -1).
enum class Strip { upper, lower };

/// Tensor grid on one reference strip: n1 periodic columns, n2 levels spaced
/// uniformly from the strip bottom (m = 0) to its top (m = n2 - 1).
struct StripGrid {
  Strip strip = Strip::upper;
  int n1 = 0;
  int n2 = 0;

  StripGrid() = default;
  StripGrid(Strip s, int n1, int n2);

  double dx1() const;
  double dx2() const { return 1.0 / (n2 - 1); }
  double x2_bottom() const { return strip == Strip::upper ? -1.0 : -2.0; }
  double x2(int m) const { return x2_bottom() + m * dx2(); }
  int size() const { return n1 * n2; }
  bool operator==(const StripGrid&) const = default;
};

/// n1 x n2 samples, stored level by level (index m * n1 + j).
class StripField {
 public:
  StripField() = default;
  explicit StripField(const StripGrid& grid, double fill = 0.0);

  const StripGrid& grid() const { return grid_; }
  double& operator()(int j, int m) { return v_[m * grid_.n1 + j]; }
  double operator()(int j, int m) const { return v_[m * grid_.n1 + j]; }
  std::span<double> row(int m) { return {v_.data() + m * grid_.n1, std::size_t(grid_.n1)}; }
  std::span<const double> row(int m) const { return {v_.data() + m * grid_.n1, std::size_t(grid_.n1)}; }
  std::span<double> data() { return v_; }
  std::span<const double> data() const { return v_; }

  double min() const;
  double max() const;
  double max_abs() const;

 private:
  StripGrid grid_;
  std::vector<double> v_;
};

struct Mat2Field {
  StripField xx, xy, yx, yy;
};

struct SymMat2Field {
  StripField xx, xy, yy;
};

/// Permeability curve x2 = -1 + f(x1) and the two permeabilities.
struct PermeabilityProfile {
  PeriodicField f;
  double beta_plus = 1.0;
  double beta_minus = 1.0;

  PermeabilityProfile() = default;
  PermeabilityProfile(PeriodicField f, double beta_plus, double beta_minus);

  double beta(Strip s) const { return s == Strip::upper ? beta_plus : beta_minus; }
  /// Throws GapViolation unless min f > -1 + gap_tol.
  void check_admissible(double gap_tol) const;
};

/// Pulled-back geometry of one strip for psi = identity + (0, delta_psi).
struct MetricPack {
  StripGrid grid;
  double beta = 1.0;
  StripField delta_psi;
  StripField d1;   // delta_psi,1 (spectral)
  StripField d2;   // delta_psi,2 (finite differences)
  StripField jac;  // J = 1 + d2
  Mat2Field A;     // (grad psi)^{-1}
  SymMat2Field K;  // beta J A A^T
};

constexpr double default_j_min = 0.1;

/// Harmonic function on the strip with Dirichlet traces: upper strip takes h on
/// x2 = 0 and f on x2 = -1; lower strip takes f on x2 = -1 and 0 on x2 = -2.
/// Each Fourier mode is solved exactly in x2.
StripField harmonic_extension(const PeriodicField& h, const PeriodicField& f, const StripGrid& grid);
/// Exact x2-derivative of harmonic_extension (same mode formulas).
StripField harmonic_extension_dx2(const PeriodicField& h, const PeriodicField& f, const StripGrid& grid);

/// Spectral x1-derivative of every level.
StripField dx1(const StripField& u);
/// Second-order x2-derivative: centred inside, one-sided three-point at the
/// strip's bottom and top levels.
StripField dx2(const StripField& u);

/// Throws DiffeoDegenerate when min J <= j_min.
MetricPack metric_terms(const StripField& delta_psi, const PermeabilityProfile& profile,
                        double j_min = default_j_min);
/// Pointwise assembly from given derivative fields; metric_terms calls this.
MetricPack assemble_metric(StripField delta_psi, StripField d1, StripField d2, double beta,
                           double j_min = default_j_min);

/// Id - (grad psi)^T grad psi / J, the coefficient of the nonlinear Darcy term.
Mat2Field nonlinear_gap(const MetricPack& pack);

struct PiolaResidual {
  double discrete;     // div of the rows of J A with the metric's own stencils
  double consistency;  // same, with the exact vertical derivative of d1
};
PiolaResidual piola_residual(const MetricPack& pack, const StripField& exact_d2);

}  // namespace muskat
