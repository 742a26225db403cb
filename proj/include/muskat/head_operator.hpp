#pragma once

#include <Eigen/Sparse>
#include <array>
#include <span>
#include <vector>

#include "muskat/diffeo.hpp"

namespace muskat {

/// Discrete div(K grad P) over both strips, stacked as one column of levels.
///
/// Levels g = 0 .. G-1 run upward from x2 = -2 to x2 = 0, G = n2_minus + n2_plus - 1.
/// Level n2_minus - 1 is the permeability curve (shared by both strips) and level
/// G - 1 is the interface, where P is prescribed. Every other level carries a
/// vertex-centred finite-volume balance: x1 is pseudospectral, x2 uses face
/// fluxes with arithmetic-mean K, and each level is split into a half cell above
/// and a half cell below so that the two sides of the permeability curve keep
/// their own K. Field vectors hold all levels, level-major (g * n1 + j).
class HeadOperator {
 public:
  HeadOperator(const SymMat2Field& k_upper, const SymMat2Field& k_lower);

  int n1() const { return n1_; }
  int levels() const { return levels_; }
  int perm_level() const { return perm_; }
  int top_level() const { return levels_ - 1; }
  /// Number of non-Dirichlet values, (G - 1) * n1.
  int unknowns() const { return (levels_ - 1) * n1_; }

  /// Flux balance of every non-Dirichlet level; P has G * n1 entries,
  /// residual has unknowns() entries.
  void apply(std::span<const double> P, std::span<double> residual) const;

  /// F = K grad P on the nodes of each strip. Rows on Gamma, Gamma_perm and
  /// Gamma_bot carry the normal flux implied by the adjacent half-cell balance.
  struct Fluxes {
    StripField f1_upper, f2_upper, f1_lower, f2_lower;
  };
  Fluxes fluxes(std::span<const double> P) const;

  /// The same operator as an explicit matrix: unknowns() rows, G * n1 columns.
  Eigen::SparseMatrix<double> assemble() const;

  /// Level g <-> (strip, m).
  Strip strip_of_side(int g, bool up) const;
  int row_in_strip(int g, Strip s) const { return s == Strip::lower ? g : g - perm_; }
  int level_of(Strip s, int m) const { return s == Strip::lower ? m : m + perm_; }

 private:
  struct Side {
    bool present = false;
    Strip strip = Strip::upper;
    int m = 0;            // row inside the strip
    double volume = 0.0;  // half-cell height
    int taps = 0;         // vertical-derivative stencil, level offsets and weights
    std::array<int, 3> offset{};
    std::array<double, 3> weight{};
  };
  struct Face {
    Strip strip = Strip::upper;
    double dx2 = 0.0;
    std::vector<double> k21, k22;  // arithmetic means of the two end nodes
  };

  const SymMat2Field& coeff(Strip s) const { return s == Strip::upper ? k_upper_ : k_lower_; }
  Side make_side(int g, bool up) const;
  // Face fluxes F2(g + 1/2) given d1 P on every level.
  void face_fluxes(std::span<const double> P, std::span<const double> d1P,
                   std::vector<double>& f2) const;
  void side_flux(const Side& s, int g, std::span<const double> P, std::span<const double> d1P,
                 std::span<double> f1) const;

  SymMat2Field k_upper_, k_lower_;
  int n1_, levels_, perm_;
  std::vector<std::array<Side, 2>> sides_;  // [g][0 = below, 1 = above]
  std::vector<Face> faces_;                 // face g sits between levels g and g + 1
};

/// Exact inverse of the head operator for K = beta I per strip: diagonal in
/// Fourier modes, tridiagonal in levels.
class ConstantHeadSolver {
 public:
  ConstantHeadSolver(const StripGrid& upper, const StripGrid& lower, double beta_upper,
                     double beta_lower);

  /// Solves L_beta P = rhs on the non-Dirichlet levels with P = top on the
  /// interface level (an empty top means zero). P receives all G levels.
  void solve(std::span<const double> rhs, std::span<const double> top, std::span<double> P) const;

  int n1() const { return n1_; }
  int levels() const { return levels_; }

 private:
  int n1_, levels_;
  // Tridiagonal rows for unknown levels: lower[g] P_{g-1} + diag[g] P_g + upper[g] P_{g+1}.
  std::vector<double> lower_, upper_;
  std::vector<double> vol_beta_;             // sum of half-cell volume * beta at each level
  std::vector<std::vector<double>> cprime_;  // Thomas factors per mode
  std::vector<std::vector<double>> denom_;
};

/// Fourier differentiation matrix on n equispaced nodes (n even), built from
/// the cotangent formula.
Eigen::MatrixXd fourier_diff_matrix(int n);

}  // namespace muskat
