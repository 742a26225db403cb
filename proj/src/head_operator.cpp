#include "muskat/head_operator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "muskat/errors.hpp"

namespace muskat {

Eigen::MatrixXd fourier_diff_matrix(int n) {
  if (n <= 0 || n % 2) throw std::invalid_argument("fourier_diff_matrix: n must be positive and even");
  const double h = 2.0 * std::numbers::pi / n;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      if (j == l) continue;
      const int d = j - l;
      D(j, l) = 0.5 * ((d % 2) ? -1.0 : 1.0) / std::tan(d * h / 2.0);
    }
  return D;
}

HeadOperator::HeadOperator(const SymMat2Field& k_upper, const SymMat2Field& k_lower)
    : k_upper_(k_upper), k_lower_(k_lower) {
  const StripGrid& up = k_upper_.xx.grid();
  const StripGrid& lo = k_lower_.xx.grid();
  if (up.strip != Strip::upper || lo.strip != Strip::lower)
    throw std::invalid_argument("HeadOperator: coefficient fields given for the wrong strips");
  if (up.n1 != lo.n1) throw ResolutionMismatch("HeadOperator: strips disagree on n1");
  n1_ = up.n1;
  perm_ = lo.n2 - 1;
  levels_ = lo.n2 + up.n2 - 1;

  sides_.resize(levels_);
  for (int g = 0; g < levels_; ++g) sides_[g] = {make_side(g, false), make_side(g, true)};

  faces_.resize(levels_ - 1);
  for (int g = 0; g + 1 < levels_; ++g) {
    Face& f = faces_[g];
    f.strip = g < perm_ ? Strip::lower : Strip::upper;
    const auto& K = coeff(f.strip);
    const int m = row_in_strip(g, f.strip);
    f.dx2 = K.xx.grid().dx2();
    f.k21.resize(n1_);
    f.k22.resize(n1_);
    for (int j = 0; j < n1_; ++j) {
      f.k21[j] = 0.5 * (K.xy(j, m) + K.xy(j, m + 1));
      f.k22[j] = 0.5 * (K.yy(j, m) + K.yy(j, m + 1));
    }
  }
}

Strip HeadOperator::strip_of_side(int g, bool up) const {
  if (up) return g < perm_ ? Strip::lower : Strip::upper;
  return g <= perm_ ? Strip::lower : Strip::upper;
}

HeadOperator::Side HeadOperator::make_side(int g, bool up) const {
  Side s;
  s.present = up ? g < levels_ - 1 : g > 0;
  if (!s.present) return s;
  s.strip = strip_of_side(g, up);
  s.m = row_in_strip(g, s.strip);
  const StripGrid& grid = coeff(s.strip).xx.grid();
  const double dz = grid.dx2();
  const double inv = 1.0 / (2.0 * dz);
  s.volume = 0.5 * dz;
  if (s.m > 0 && s.m < grid.n2 - 1) {
    s.taps = 2;
    s.offset = {-1, 1, 0};
    s.weight = {-inv, inv, 0.0};
  } else if (s.m == 0) {
    s.taps = 3;
    s.offset = {0, 1, 2};
    s.weight = {-3.0 * inv, 4.0 * inv, -inv};
  } else {
    s.taps = 3;
    s.offset = {0, -1, -2};
    s.weight = {3.0 * inv, -4.0 * inv, inv};
  }
  return s;
}

namespace {

void level_derivatives(std::span<const double> P, std::span<double> d1P, int n1, int levels) {
#pragma omp parallel for schedule(static)
  for (int g = 0; g < levels; ++g)
    spectral_derivative(P.subspan(g * n1, n1), d1P.subspan(g * n1, n1), 1);
}

}  // namespace

void HeadOperator::face_fluxes(std::span<const double> P, std::span<const double> d1P,
                               std::vector<double>& f2) const {
  f2.assign(std::size_t(levels_ - 1) * n1_, 0.0);
#pragma omp parallel for schedule(static)
  for (int g = 0; g < levels_ - 1; ++g) {
    const Face& f = faces_[g];
    const double inv = 1.0 / f.dx2;
    const double* p0 = P.data() + g * n1_;
    const double* p1 = p0 + n1_;
    const double* d0 = d1P.data() + g * n1_;
    const double* d1 = d0 + n1_;
    double* out = f2.data() + g * n1_;
    for (int j = 0; j < n1_; ++j)
      out[j] = f.k21[j] * 0.5 * (d0[j] + d1[j]) + f.k22[j] * (p1[j] - p0[j]) * inv;
  }
}

void HeadOperator::side_flux(const Side& s, int g, std::span<const double> P,
                             std::span<const double> d1P, std::span<double> f1) const {
  const auto& K = coeff(s.strip);
  const double* d = d1P.data() + g * n1_;
  for (int j = 0; j < n1_; ++j) {
    double dz = 0.0;
    for (int t = 0; t < s.taps; ++t) dz += s.weight[t] * P[(g + s.offset[t]) * n1_ + j];
    f1[j] = K.xx(j, s.m) * d[j] + K.xy(j, s.m) * dz;
  }
}

void HeadOperator::apply(std::span<const double> P, std::span<double> residual) const {
  if (static_cast<int>(P.size()) != levels_ * n1_ || static_cast<int>(residual.size()) != unknowns())
    throw std::invalid_argument("HeadOperator::apply: size mismatch");
  std::vector<double> d1P(P.size());
  level_derivatives(P, d1P, n1_, levels_);
  std::vector<double> f2;
  face_fluxes(P, d1P, f2);

#pragma omp parallel for schedule(static)
  for (int g = 0; g < levels_ - 1; ++g) {
    std::vector<double> f1(n1_), df1(n1_);
    double* out = residual.data() + g * n1_;
    for (int j = 0; j < n1_; ++j) out[j] = f2[g * n1_ + j] - (g > 0 ? f2[(g - 1) * n1_ + j] : 0.0);
    const Side& below = sides_[g][0];
    const Side& above = sides_[g][1];
    // Inside a strip both half cells share K and the centred stencil.
    if (below.present && above.present && below.strip == above.strip) {
      side_flux(above, g, P, d1P, f1);
      spectral_derivative(f1, df1, 1);
      const double vol = below.volume + above.volume;
      for (int j = 0; j < n1_; ++j) out[j] += vol * df1[j];
      continue;
    }
    for (const Side* s : {&below, &above}) {
      if (!s->present) continue;
      side_flux(*s, g, P, d1P, f1);
      spectral_derivative(f1, df1, 1);
      for (int j = 0; j < n1_; ++j) out[j] += s->volume * df1[j];
    }
  }
}

HeadOperator::Fluxes HeadOperator::fluxes(std::span<const double> P) const {
  std::vector<double> d1P(P.size());
  level_derivatives(P, d1P, n1_, levels_);
  std::vector<double> f2;
  face_fluxes(P, d1P, f2);

  auto strip_fluxes = [&](Strip strip, StripField& F1, StripField& F2) {
    const auto& K = coeff(strip);
    const StripGrid& grid = K.xx.grid();
    F1 = StripField(grid);
    F2 = StripField(grid);
    const int top = grid.n2 - 1;
    const double inv = 1.0 / (2.0 * grid.dx2());
    std::vector<double> df1(n1_);
    for (int m = 0; m <= top; ++m) {
      const int g = level_of(strip, m);
      const Side& s = sides_[g][m == top ? 0 : 1];
      side_flux(s, g, P, d1P, F1.row(m));
      auto f2row = F2.row(m);
      if (m == 0 || m == top) {
        // Normal flux through the strip boundary closes the half-cell balance.
        spectral_derivative(F1.row(m), df1, 1);
        for (int j = 0; j < n1_; ++j)
          f2row[j] = m == 0 ? f2[g * n1_ + j] + s.volume * df1[j]
                            : f2[(g - 1) * n1_ + j] - s.volume * df1[j];
      } else {
        for (int j = 0; j < n1_; ++j)
          f2row[j] = K.xy(j, m) * d1P[g * n1_ + j] +
                     K.yy(j, m) * (P[(g + 1) * n1_ + j] - P[(g - 1) * n1_ + j]) * inv;
      }
    }
  };

  Fluxes out;
  strip_fluxes(Strip::upper, out.f1_upper, out.f2_upper);
  strip_fluxes(Strip::lower, out.f1_lower, out.f2_lower);
  return out;
}

Eigen::SparseMatrix<double> HeadOperator::assemble() const {
  const Eigen::MatrixXd D = fourier_diff_matrix(n1_);
  const int rows = unknowns();
  std::vector<Eigen::Triplet<double>> trips;
  auto col = [this](int g, int j) { return g * n1_ + j; };
  auto add = [&](int row, int c, double v) {
    if (v != 0.0) trips.emplace_back(row, c, v);
  };

  for (int g = 0; g + 1 < levels_; ++g) {
    const Face& f = faces_[g];
    for (int j = 0; j < n1_; ++j) {
      // F2(g + 1/2)[j] enters row (g, j) with + and row (g + 1, j) with -.
      for (int sign : {+1, -1}) {
        const int rg = sign > 0 ? g : g + 1;
        if (rg >= levels_ - 1) continue;
        const int row = col(rg, j);
        for (int l = 0; l < n1_; ++l) {
          const double a = sign * f.k21[j] * 0.5 * D(j, l);
          add(row, col(g, l), a);
          add(row, col(g + 1, l), a);
        }
        add(row, col(g, j), -sign * f.k22[j] / f.dx2);
        add(row, col(g + 1, j), sign * f.k22[j] / f.dx2);
      }
    }
  }

  for (int g = 0; g + 1 < levels_; ++g) {
    for (const Side& s : sides_[g]) {
      if (!s.present) continue;
      const auto& K = coeff(s.strip);
      Eigen::VectorXd k11(n1_), k12(n1_);
      for (int l = 0; l < n1_; ++l) {
        k11[l] = K.xx(l, s.m);
        k12[l] = K.xy(l, s.m);
      }
      const Eigen::MatrixXd M = s.volume * D * k11.asDiagonal() * D;
      const Eigen::MatrixXd C = s.volume * D * k12.asDiagonal();
      for (int j = 0; j < n1_; ++j) {
        const int row = col(g, j);
        for (int l = 0; l < n1_; ++l) {
          add(row, col(g, l), M(j, l));
          for (int t = 0; t < s.taps; ++t) add(row, col(g + s.offset[t], l), C(j, l) * s.weight[t]);
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(rows, levels_ * n1_);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

ConstantHeadSolver::ConstantHeadSolver(const StripGrid& up, const StripGrid& lo, double beta_up,
                                       double beta_lo) {
  if (up.n1 != lo.n1) throw ResolutionMismatch("ConstantHeadSolver: strips disagree on n1");
  n1_ = up.n1;
  levels_ = up.n2 + lo.n2 - 1;
  const int perm = lo.n2 - 1;
  const int nu = levels_ - 1;
  auto face_coef = [&](int g) {
    return g < perm ? beta_lo / lo.dx2() : beta_up / up.dx2();
  };
  lower_.assign(nu, 0.0);
  upper_.assign(nu, 0.0);
  vol_beta_.assign(nu, 0.0);
  for (int g = 0; g < nu; ++g) {
    if (g > 0) lower_[g] = face_coef(g - 1);
    upper_[g] = face_coef(g);
    if (g > 0) vol_beta_[g] += g <= perm ? 0.5 * lo.dx2() * beta_lo : 0.5 * up.dx2() * beta_up;
    vol_beta_[g] += g < perm ? 0.5 * lo.dx2() * beta_lo : 0.5 * up.dx2() * beta_up;
  }
  const int nh = n1_ / 2 + 1;
  cprime_.assign(nh, std::vector<double>(nu));
  denom_.assign(nh, std::vector<double>(nu));
  for (int k = 0; k < nh; ++k) {
    // The Nyquist mode has no x1 coupling: odd derivatives annihilate it.
    const double lam = (k == n1_ / 2) ? 0.0 : double(k) * k;
    auto& cp = cprime_[k];
    auto& den = denom_[k];
    for (int g = 0; g < nu; ++g) {
      const double diag = -(lower_[g] + upper_[g]) - lam * vol_beta_[g];
      den[g] = g == 0 ? diag : diag - lower_[g] * cp[g - 1];
      cp[g] = upper_[g] / den[g];
    }
  }
}

void ConstantHeadSolver::solve(std::span<const double> rhs, std::span<const double> top,
                               std::span<double> P) const {
  const int nu = levels_ - 1;
  const int nh = n1_ / 2 + 1;
  if (static_cast<int>(rhs.size()) != nu * n1_ || static_cast<int>(P.size()) != levels_ * n1_ ||
      !(top.empty() || static_cast<int>(top.size()) == n1_))
    throw std::invalid_argument("ConstantHeadSolver::solve: size mismatch");
  std::vector<cplx> spec(std::size_t(nu) * nh);
  std::vector<cplx> top_hat(nh, 0.0);
#pragma omp parallel for schedule(static)
  for (int g = 0; g < nu; ++g)
    detail::forward(rhs.subspan(g * n1_, n1_), std::span<cplx>(spec.data() + g * nh, nh));
  if (!top.empty()) detail::forward(top, top_hat);

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nh; ++k) {
    const auto& cp = cprime_[k];
    const auto& den = denom_[k];
    auto at = [&](int g) -> cplx& { return spec[g * nh + k]; };
    at(nu - 1) -= upper_[nu - 1] * top_hat[k];
    at(0) /= den[0];
    for (int g = 1; g < nu; ++g) at(g) = (at(g) - lower_[g] * at(g - 1)) / den[g];
    for (int g = nu - 2; g >= 0; --g) at(g) -= cp[g] * at(g + 1);
  }

#pragma omp parallel for schedule(static)
  for (int g = 0; g < nu; ++g)
    detail::inverse(std::span<const cplx>(spec.data() + g * nh, nh), P.subspan(g * n1_, n1_));
  for (int j = 0; j < n1_; ++j) P[nu * n1_ + j] = top.empty() ? 0.0 : top[j];
}

}  // namespace muskat
