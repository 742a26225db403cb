#pragma once

#include <string>

#include "muskat/diffeo.hpp"
#include "muskat/head_operator.hpp"

namespace muskat {

enum class SolverKind {
  gmres,   // matrix-free, preconditioned by the constant-coefficient inverse
  direct,  // sparse LU of the assembled operator; fine for modest n1
};

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct SolverOptions {
  SolverKind kind = SolverKind::gmres;
  double rel_tol = 1e-12;
  int max_iter = 600;
  int restart = 60;
};

/// Pulled-back hydraulic head P = Q + delta_psi and the semi-ALE velocity
/// w = -K grad P on both strips.
struct HeadSolution {
  StripField p_upper, p_lower;
  StripField w1_upper, w2_upper, w1_lower, w2_lower;
  PeriodicField gamma_trace_w2;  // w2 on the interface
  int iterations = 0;
  double residual = 0.0;  // final relative residual of the linear solve
};

/// Solves div(K grad P) = 0 on both strips with P = h on the interface,
/// continuity of P and of the normal flux across the permeability curve, and
/// no flux through the bottom.
HeadSolution solve_head(const MetricPack& upper, const MetricPack& lower, const PeriodicField& h,
                        const PermeabilityProfile& profile, const SolverOptions& options = {});

/// Fixed-point form: beta Lap P^{n+1} = div((beta I - K) grad P^n), each step a
/// constant-coefficient solve. Throws NoContraction when the iterates do not settle.
HeadSolution picard_head(const MetricPack& upper, const MetricPack& lower, const PeriodicField& h,
                         const PermeabilityProfile& profile, int max_iter = 200, double tol = 1e-12);

/// Velocity fields and interface trace from a head given on all levels.
HeadSolution head_solution_from_levels(const HeadOperator& op, std::span<const double> P,
                                       const StripGrid& upper, const StripGrid& lower);

}  // namespace muskat
