#include <cmath>
#include <random>

#include "doctest.h"
#include "muskat/diagnostics.hpp"
#include "muskat/errors.hpp"
#include "muskat/pressure.hpp"

using namespace muskat;

namespace {

PeriodicField wave(int n, double a, int k, double phase = 0.0) {
  return PeriodicField::sample(n, [&](double x) { return a * std::cos(k * x + phase); });
}

struct Setup {
  PermeabilityProfile prof;
  MetricPack up, lo;
  PeriodicField h;
};

Setup make(int n1, int n2p, int n2m, const PeriodicField& h, const PeriodicField& f, double bp, double bm) {
  Setup s{PermeabilityProfile(f, bp, bm), {}, {}, h};
  s.up = metric_terms(harmonic_extension(h, f, StripGrid(Strip::upper, n1, n2p)), s.prof);
  s.lo = metric_terms(harmonic_extension(h, f, StripGrid(Strip::lower, n1, n2m)), s.prof);
  return s;
}

double max_diff(const StripField& a, const StripField& b) {
  double d = 0.0;
  for (int i = 0; i < a.grid().size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

double max_diff(const HeadSolution& a, const HeadSolution& b) {
  return std::max({max_diff(a.p_upper, b.p_upper), max_diff(a.p_lower, b.p_lower),
                   max_diff(a.w1_upper, b.w1_upper), max_diff(a.w2_upper, b.w2_upper),
                   max_diff(a.w1_lower, b.w1_lower), max_diff(a.w2_lower, b.w2_lower)});
}

double w_max(const HeadSolution& s) {
  return std::max({s.p_upper.max_abs(), s.p_lower.max_abs(), s.w1_upper.max_abs(), s.w2_upper.max_abs(),
                   s.w1_lower.max_abs(), s.w2_lower.max_abs()});
}

}  // namespace

TEST_SUITE("pressure") {

TEST_CASE("rest states") {
  const int n = 32;
  const auto zero = PeriodicField::zeros(n);
  for (const auto& f : {zero, wave(n, 0.2, 1)}) {
    auto s = make(n, 17, 13, zero, f, 1.0, 0.5);
    for (SolverKind k : {SolverKind::gmres, SolverKind::direct}) {
      SolverOptions o;
      o.kind = k;
      CHECK(w_max(solve_head(s.up, s.lo, zero, s.prof, o)) == 0.0);
    }
    auto pic = picard_head(s.up, s.lo, zero, s.prof);
    CHECK(w_max(pic) == 0.0);
    CHECK(pic.iterations == 1);
  }
}

TEST_CASE("matrix-free operator matches the assembled matrix") {
  const int n = 16;
  auto s = make(n, 9, 7, wave(n, 0.15, 1) + wave(n, 0.05, 3, 0.4), wave(n, 0.1, 2, 1.0), 1.0, 0.3);
  const HeadOperator op(s.up.K, s.lo.K);
  const auto A = op.assemble();
  REQUIRE(A.rows() == op.unknowns());
  REQUIRE(A.cols() == op.levels() * n);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd P(A.cols());
  for (auto& v : P) v = u(rng);
  Eigen::VectorXd r(A.rows());
  op.apply({P.data(), std::size_t(P.size())}, {r.data(), std::size_t(r.size())});
  CHECK((A * P - r).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + r.cwiseAbs().maxCoeff()));
}

TEST_CASE("constant-coefficient solver inverts the flat operator") {
  const int n = 16;
  const auto zero = PeriodicField::zeros(n);
  auto s = make(n, 9, 7, zero, zero, 1.0, 0.25);
  const HeadOperator op(s.up.K, s.lo.K);
  const ConstantHeadSolver pre(s.up.grid, s.lo.grid, 1.0, 0.25);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> rhs(op.unknowns()), top(n), P(op.levels() * n), back(op.unknowns());
  for (auto& v : rhs) v = u(rng);
  for (int j = 0; j < n; ++j) top[j] = 0.2 * std::cos(node(n, j)) + 0.1 * std::sin(3 * node(n, j));
  pre.solve(rhs, top, P);
  op.apply(P, back);
  double err = 0.0;
  for (int i = 0; i < op.unknowns(); ++i) err = std::max(err, std::abs(back[i] - rhs[i]));
  CHECK(err < 1e-11);
  for (int j = 0; j < n; ++j) CHECK(P[(op.levels() - 1) * n + j] == top[j]);
}

TEST_CASE("GMRES, sparse LU and Picard agree") {
  const int n = 32;
  const auto h = wave(n, 0.004, 1) + wave(n, 0.001, 2, 0.3);
  auto s = make(n, 17, 17, h, wave(n, 0.05, 1, 0.7), 1.0, 0.5);
  REQUIRE(sobolev_norm(h, SobolevIndex(2)) <= 0.02);
  SolverOptions g, d;
  d.kind = SolverKind::direct;
  const auto sg = solve_head(s.up, s.lo, h, s.prof, g);
  const auto sd = solve_head(s.up, s.lo, h, s.prof, d);
  const auto sp = picard_head(s.up, s.lo, h, s.prof);
  CHECK(sg.residual <= 1e-12);
  CHECK(max_diff(sg, sd) <= 1e-10);
  CHECK(max_diff(sp, sd) <= 1e-8);
  for (int j = 0; j < n; ++j) CHECK(sg.p_upper(j, 16) == h[j]);
}

TEST_CASE("discrete mass conservation") {
  const int n = 32;
  const auto h = wave(n, 0.2, 1) + wave(n, 0.05, 4, 0.2);
  auto s = make(n, 17, 9, h, wave(n, 0.2, 2, 1.1), 2.0, 0.2);
  SolverOptions d;
  d.kind = SolverKind::direct;
  // Exact up to round-off with a direct solve, and up to the tolerance otherwise.
  CHECK(std::abs(integral(solve_head(s.up, s.lo, h, s.prof, d).gamma_trace_w2)) < 1e-13);
  CHECK(std::abs(integral(solve_head(s.up, s.lo, h, s.prof).gamma_trace_w2)) < 1e-10);
}

TEST_CASE("small modes decay at the linear rate") {
  const int n = 32;
  const auto zero = PeriodicField::zeros(n);
  for (int k = 1; k <= 4; ++k) {
    const auto h = wave(n, 1e-4, k);
    auto s = make(n, 65, 65, h, zero, 1.0, 0.1);
    const auto sol = solve_head(s.up, s.lo, h, s.prof);
    const auto expect = dispersion_rate(k, 1.0, 0.1) * h;
    CHECK((sol.gamma_trace_w2 - expect).max_abs() <= 2e-3 * expect.max_abs());
  }
}

TEST_CASE("Picard stops when the iteration cannot contract") {
  const int n = 32;
  const auto h = wave(n, 0.25, 3);
  auto s = make(n, 17, 17, h, PeriodicField::zeros(n), 1.0, 1.0);
  REQUIRE(s.up.jac.min() > default_j_min);
  CHECK_THROWS_AS(picard_head(s.up, s.lo, h, s.prof), NoContraction);
  CHECK_NOTHROW(solve_head(s.up, s.lo, h, s.prof));
}

TEST_CASE("input validation") {
  const int n = 16;
  const auto zero = PeriodicField::zeros(n);
  auto s = make(n, 9, 9, zero, zero, 1.0, 1.0);
  CHECK_THROWS_AS(solve_head(s.up, s.lo, PeriodicField::zeros(8), s.prof), ResolutionMismatch);
  CHECK_THROWS_AS(solve_head(s.lo, s.up, zero, s.prof), std::invalid_argument);

  // A folded map (J < 0) with the degeneracy guard switched off.
  const StripGrid g = s.up.grid;
  auto bad = assemble_metric(StripField(g), StripField(g), StripField(g, -2.0), 1.0, -10.0);
  CHECK_THROWS_AS(solve_head(bad, s.lo, zero, s.prof), NonSPDSystem);

  CHECK(parse_solver_kind("direct") == SolverKind::direct);
  CHECK_THROWS_AS(parse_solver_kind("cg"), ConfigError);
}

TEST_CASE("Fourier differentiation matrix") {
  const int n = 12;
  const auto D = fourier_diff_matrix(n);
  Eigen::VectorXd s(n), c(n);
  for (int j = 0; j < n; ++j) {
    s[j] = std::sin(2 * node(n, j));
    c[j] = 2 * std::cos(2 * node(n, j));
  }
  CHECK((D * s - c).cwiseAbs().maxCoeff() < 1e-13);
}

}
