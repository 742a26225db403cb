#pragma once

#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace muskat {

using cplx = std::complex<double>;

/// x1 coordinate of node j on an n-point grid of [-pi, pi).
inline double node(int n, int j) { return -std::numbers::pi + 2.0 * std::numbers::pi * j / n; }

/// Sobolev exponent s >= 0.
class SobolevIndex {
 public:
  explicit SobolevIndex(double s);
  double value() const { return s_; }

 private:
  double s_;
};

/// Real scalar on the circle, sampled at an even number of equispaced nodes.
///
/// Values are immutable. Fourier coefficients are computed on first use and
/// shared between copies; they use the convention h(x) = sum_k c_k e^{ikx} with
/// x measured from -pi, so that 2 pi sum_k |c_k|^2 is the L2 norm squared.
class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(std::vector<double> values);

  static PeriodicField zeros(int n);
  template <class F>
  static PeriodicField sample(int n, F&& f) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = f(node(n, j));
    return PeriodicField(std::move(v));
  }
  /// Inverse of coeffs(): half spectrum k = 0..n/2.
  static PeriodicField from_coeffs(int n, std::span<const cplx> half);

  int size() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.empty(); }
  std::span<const double> values() const { return values_; }
  double operator[](int j) const { return values_[j]; }

  /// Half spectrum c_0..c_{n/2}.
  std::span<const cplx> coeffs() const;
  /// c_k for any |k| <= n/2, using c_{-k} = conj(c_k).
  cplx coeff(int k) const;

  double min() const;
  double max() const;
  double max_abs() const;

  friend PeriodicField operator+(const PeriodicField& a, const PeriodicField& b);
  friend PeriodicField operator-(const PeriodicField& a, const PeriodicField& b);
  friend PeriodicField operator*(double s, const PeriodicField& a);

 private:
  struct CoeffCache;
  std::vector<double> values_;
  mutable std::shared_ptr<CoeffCache> cache_;
};

PeriodicField deriv(const PeriodicField& h, int order);
double sobolev_norm(const PeriodicField& h, SobolevIndex s);
/// Gaussian smoothing exp(-delta^2 k^2); the mean is untouched.
PeriodicField mollify(const PeriodicField& h, double delta);
/// (2 pi)^{-1} times the integral of h.
double mean(const PeriodicField& h);
PeriodicField project_zero_mean(const PeriodicField& h);
/// Removes the mean and the Nyquist mode.
PeriodicField project_resolved(const PeriodicField& h);
/// Integral over the circle by the trapezoid rule (exact for resolved fields).
double integral(const PeriodicField& h);

/// Row-level kernels for hot loops. in and out may alias.
void spectral_derivative(std::span<const double> in, std::span<double> out, int order);
/// Multiplies the half spectrum by symbol(k), k = 0..n/2.
template <class Symbol>
void apply_symbol(std::span<const double> in, std::span<double> out, Symbol&& symbol);

namespace detail {
std::vector<cplx>& scratch_spectrum(int n);
void forward(std::span<const double> in, std::span<cplx> out);
void inverse(std::span<const cplx> in, std::span<double> out);
}  // namespace detail

template <class Symbol>
void apply_symbol(std::span<const double> in, std::span<double> out, Symbol&& symbol) {
  const int n = static_cast<int>(in.size());
  auto& spec = detail::scratch_spectrum(n);
  detail::forward(in, spec);
  for (int k = 0; k <= n / 2; ++k) spec[k] *= symbol(k);
  detail::inverse(spec, out);
}

}  // namespace muskat
