#include "muskat/pressure.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "muskat/errors.hpp"

namespace muskat {

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "gmres") return SolverKind::gmres;
  if (name == "direct") return SolverKind::direct;
  throw ConfigError("unknown solver '" + name + "' (expected gmres or direct)");
}

std::string to_string(SolverKind kind) { return kind == SolverKind::gmres ? "gmres" : "direct"; }

namespace {

using Vec = Eigen::VectorXd;

std::span<const double> cs_(const Vec& v) { return {v.data(), std::size_t(v.size())}; }
std::span<double> ms_(Vec& v) { return {v.data(), std::size_t(v.size())}; }

void check_inputs(const MetricPack& up, const MetricPack& lo, const PeriodicField& h,
                  const PermeabilityProfile& profile) {
  if (up.grid.strip != Strip::upper || lo.grid.strip != Strip::lower)
    throw std::invalid_argument("solve_head: metric packs given for the wrong strips");
  if (up.grid.n1 != lo.grid.n1 || h.size() != up.grid.n1 || profile.f.size() != up.grid.n1)
    throw ResolutionMismatch("solve_head: inconsistent n1");
  for (const MetricPack* p : {&up, &lo})
    for (int i = 0; i < p->grid.size(); ++i) {
      const double k11 = p->K.xx.data()[i], k12 = p->K.xy.data()[i], k22 = p->K.yy.data()[i];
      if (!(k11 > 0.0) || !(k11 * k22 - k12 * k12 > 0.0))
        throw NonSPDSystem("solve_head: conductivity tensor is not positive definite");
    }
}

struct GmresResult {
  int iterations = 0;
  double residual = 0.0;  // absolute
  bool converged = false;
};

// Restarted GMRES with right preconditioning; x is the initial guess on entry.
template <class ApplyA, class ApplyM>
GmresResult gmres(ApplyA&& A, ApplyM&& Minv, const Vec& b, Vec& x, double abs_tol, int restart,
                  int max_iter) {
  GmresResult res;
  Vec r = b - A(x);
  double beta = r.norm();
  res.residual = beta;
  if (beta <= abs_tol) {
    res.converged = true;
    return res;
  }
  std::vector<Vec> V, Z;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
  Vec cs(restart), sn(restart), g(restart + 1);
  while (res.iterations < max_iter) {
    V.assign(1, r / beta);
    Z.clear();
    g.setZero();
    g[0] = beta;
    int k = 0;
    for (; k < restart && res.iterations < max_iter; ++k) {
      Z.push_back(Minv(V[k]));
      Vec w = A(Z[k]);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V[i]);
        w -= H(i, k) * V[i];
      }
      const double hnorm = w.norm();
      H(k + 1, k) = hnorm;
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double rho = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / rho;
      sn[k] = H(k + 1, k) / rho;
      H(k, k) = rho;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++res.iterations;
      // Happy breakdown: the Krylov space already contains the solution.
      if (std::abs(g[k + 1]) <= abs_tol || hnorm == 0.0) {
        ++k;
        break;
      }
      V.push_back(w / hnorm);
    }
    Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y[i] * Z[i];
    r = b - A(x);
    beta = r.norm();
    res.residual = beta;
    if (beta <= abs_tol) {
      res.converged = true;
      return res;
    }
    if (!std::isfinite(beta)) return res;
  }
  return res;
}

SymMat2Field difference_from_identity(const MetricPack& p) {
  const StripGrid& g = p.grid;
  SymMat2Field d{StripField(g), StripField(g), StripField(g)};
  for (int i = 0; i < g.size(); ++i) {
    d.xx.data()[i] = p.beta - p.K.xx.data()[i];
    d.xy.data()[i] = -p.K.xy.data()[i];
    d.yy.data()[i] = p.beta - p.K.yy.data()[i];
  }
  return d;
}

}  // namespace

HeadSolution head_solution_from_levels(const HeadOperator& op, std::span<const double> P,
                                       const StripGrid& upper, const StripGrid& lower) {
  const int n1 = op.n1();
  HeadSolution s;
  s.p_upper = StripField(upper);
  s.p_lower = StripField(lower);
  for (int m = 0; m < upper.n2; ++m)
    for (int j = 0; j < n1; ++j) s.p_upper(j, m) = P[op.level_of(Strip::upper, m) * n1 + j];
  for (int m = 0; m < lower.n2; ++m)
    for (int j = 0; j < n1; ++j) s.p_lower(j, m) = P[op.level_of(Strip::lower, m) * n1 + j];
  auto F = op.fluxes(P);
  auto negate = [](StripField f) {
    for (double& v : f.data()) v = -v;
    return f;
  };
  s.w1_upper = negate(std::move(F.f1_upper));
  s.w2_upper = negate(std::move(F.f2_upper));
  s.w1_lower = negate(std::move(F.f1_lower));
  s.w2_lower = negate(std::move(F.f2_lower));
  auto top = s.w2_upper.row(upper.n2 - 1);
  s.gamma_trace_w2 = PeriodicField(std::vector<double>(top.begin(), top.end()));
  return s;
}

HeadSolution solve_head(const MetricPack& up, const MetricPack& lo, const PeriodicField& h,
                        const PermeabilityProfile& profile, const SolverOptions& options) {
  check_inputs(up, lo, h, profile);
  const HeadOperator op(up.K, lo.K);
  const int n1 = op.n1();
  const int nu = op.unknowns();
  const int total = op.levels() * n1;

  // Dirichlet data alone, and the reference residual scale it produces.
  Vec P(total);
  P.setZero();
  for (int j = 0; j < n1; ++j) P[nu + j] = h[j];
  Vec ref(nu);
  op.apply(cs_(P), ms_(ref));
  const double ref_norm = ref.norm();

  if (ref_norm == 0.0) return head_solution_from_levels(op, cs_(P), up.grid, lo.grid);

  if (options.kind == SolverKind::direct) {
    const Eigen::SparseMatrix<double> A = op.assemble();
    const Eigen::SparseMatrix<double> Au = A.leftCols(nu);
    const Vec b = -(A.rightCols(n1) * Eigen::Map<const Vec>(h.values().data(), n1));
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Au);
    if (lu.info() != Eigen::Success) throw SolverDivergence("solve_head: sparse LU failed: " + lu.lastErrorMessage());
    const Vec x = lu.solve(b);
    P.head(nu) = x;
    Vec r(nu);
    op.apply(cs_(P), ms_(r));
    HeadSolution s = head_solution_from_levels(op, cs_(P), up.grid, lo.grid);
    s.residual = r.norm() / ref_norm;
    s.iterations = 1;
    if (!(s.residual <= std::max(options.rel_tol, 1e-10)))
      throw SolverDivergence("solve_head: direct solve residual too large");
    return s;
  }

  const ConstantHeadSolver pre(up.grid, lo.grid, up.beta, lo.beta);
  // Initial guess: the constant-coefficient head with the same Dirichlet data.
  Vec zero_rhs = Vec::Zero(nu);
  pre.solve(cs_(zero_rhs), h.values(), ms_(P));

  Vec r0(nu);
  op.apply(cs_(P), ms_(r0));
  const Vec b = -r0;
  Vec full(total);
  auto A = [&](const Vec& e) {
    full.head(nu) = e;
    full.tail(n1).setZero();
    Vec out(nu);
    op.apply(cs_(full), ms_(out));
    return out;
  };
  auto Minv = [&](const Vec& v) {
    Vec out(total);
    pre.solve(cs_(v), {}, ms_(out));
    return Vec(out.head(nu));
  };
  Vec e = Vec::Zero(nu);
  const GmresResult gr =
      gmres(A, Minv, b, e, options.rel_tol * ref_norm, options.restart, options.max_iter);
  if (!gr.converged) {
    std::ostringstream os;
    os << "solve_head: GMRES stalled at relative residual " << gr.residual / ref_norm << " after "
       << gr.iterations << " iterations";
    throw SolverDivergence(os.str());
  }
  P.head(nu) += e;
  HeadSolution s = head_solution_from_levels(op, cs_(P), up.grid, lo.grid);
  s.iterations = gr.iterations;
  s.residual = gr.residual / ref_norm;
  return s;
}

HeadSolution picard_head(const MetricPack& up, const MetricPack& lo, const PeriodicField& h,
                         const PermeabilityProfile& profile, int max_iter, double tol) {
  check_inputs(up, lo, h, profile);
  const HeadOperator op(up.K, lo.K);
  const HeadOperator gap(difference_from_identity(up), difference_from_identity(lo));
  const ConstantHeadSolver lap(up.grid, lo.grid, up.beta, lo.beta);
  const int nu = op.unknowns();
  const int total = op.levels() * op.n1();

  std::vector<double> P(total), next(total), rhs(nu, 0.0);
  lap.solve(rhs, h.values(), P);
  double prev = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 1; it <= max_iter; ++it) {
    gap.apply(P, rhs);
    lap.solve(rhs, h.values(), next);
    double delta = 0.0;
    for (int i = 0; i < total; ++i) delta = std::max(delta, std::abs(next[i] - P[i]));
    P.swap(next);
    if (!std::isfinite(delta)) break;
    if (delta <= tol) {
      HeadSolution s = head_solution_from_levels(op, P, up.grid, lo.grid);
      s.iterations = it;
      std::vector<double> r(nu);
      op.apply(P, r);
      double rn = 0.0;
      for (double v : r) rn += v * v;
      s.residual = std::sqrt(rn);
      return s;
    }
    growth = delta > prev ? growth + 1 : 0;
    if (growth >= 3) break;
    prev = delta;
  }
  throw NoContraction("picard_head: fixed-point iterates do not contract");
}

}  // namespace muskat
