#include "muskat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "muskat/fft.hpp"

namespace muskat {

SobolevIndex::SobolevIndex(double s) : s_(s) {
  if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("SobolevIndex: s must be finite and >= 0");
}

struct PeriodicField::CoeffCache {
  std::once_flag once;
  std::vector<cplx> c;
};

namespace detail {

std::vector<cplx>& scratch_spectrum(int n) {
  thread_local std::vector<cplx> buf;
  buf.resize(n / 2 + 1);
  return buf;
}

void forward(std::span<const double> in, std::span<cplx> out) {
  fft_plan(static_cast<int>(in.size())).forward(in, out);
}

void inverse(std::span<const cplx> in, std::span<double> out) {
  fft_plan(static_cast<int>(out.size())).inverse(in, out);
}

}  // namespace detail

PeriodicField::PeriodicField(std::vector<double> values)
    : values_(std::move(values)), cache_(std::make_shared<CoeffCache>()) {
  if (values_.empty() || values_.size() % 2 != 0)
    throw std::invalid_argument("PeriodicField: number of nodes must be positive and even");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("PeriodicField: non-finite sample");
}

PeriodicField PeriodicField::zeros(int n) { return PeriodicField(std::vector<double>(n, 0.0)); }

PeriodicField PeriodicField::from_coeffs(int n, std::span<const cplx> half) {
  if (static_cast<int>(half.size()) != n / 2 + 1)
    throw std::invalid_argument("PeriodicField::from_coeffs: expected n/2+1 coefficients");
  std::vector<cplx> c(half.begin(), half.end());
  // Undo the shift of origin to x = -pi and the 1/n normalisation.
  for (int k = 0; k <= n / 2; ++k) c[k] *= (k % 2 ? -1.0 : 1.0) * n;
  std::vector<double> v(n);
  fft_plan(n).inverse(c, v);
  return PeriodicField(std::move(v));
}

std::span<const cplx> PeriodicField::coeffs() const {
  if (!cache_) return {};
  std::call_once(cache_->once, [this] {
    const int n = size();
    auto& c = cache_->c;
    c.resize(n / 2 + 1);
    fft_plan(n).forward(values_, c);
    for (int k = 0; k <= n / 2; ++k) c[k] *= (k % 2 ? -1.0 : 1.0) / n;
  });
  return cache_->c;
}

cplx PeriodicField::coeff(int k) const {
  const int n = size();
  if (std::abs(k) > n / 2) return 0.0;
  auto c = coeffs();
  return k >= 0 ? c[k] : std::conj(c[-k]);
}

double PeriodicField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PeriodicField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double PeriodicField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {
void require_same(const PeriodicField& a, const PeriodicField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("PeriodicField: size mismatch");
}
}  // namespace

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
  require_same(a, b);
  std::vector<double> v(a.values_);
  for (int j = 0; j < a.size(); ++j) v[j] += b.values_[j];
  return PeriodicField(std::move(v));
}

PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
  require_same(a, b);
  std::vector<double> v(a.values_);
  for (int j = 0; j < a.size(); ++j) v[j] -= b.values_[j];
  return PeriodicField(std::move(v));
}

PeriodicField operator*(double s, const PeriodicField& a) {
  std::vector<double> v(a.values_);
  for (double& x : v) x *= s;
  return PeriodicField(std::move(v));
}

void spectral_derivative(std::span<const double> in, std::span<double> out, int order) {
  const int n = static_cast<int>(in.size());
  const int nyq = n / 2;
  apply_symbol(in, out, [order, nyq](int k) -> cplx {
    if (order == 0) return 1.0;
    if (k == nyq && order % 2 == 1) return 0.0;
    return std::pow(cplx(0.0, k), order);
  });
}

PeriodicField deriv(const PeriodicField& h, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("deriv: order must be in 1..4");
  std::vector<double> out(h.size());
  spectral_derivative(h.values(), out, order);
  return PeriodicField(std::move(out));
}

double sobolev_norm(const PeriodicField& h, SobolevIndex s) {
  const int n = h.size();
  auto c = h.coeffs();
  double sum = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double mult = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    sum += mult * std::pow(1.0 + double(k) * k, s.value()) * std::norm(c[k]);
  }
  return std::sqrt(2.0 * std::numbers::pi * sum);
}

PeriodicField mollify(const PeriodicField& h, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("mollify: delta must be positive");
  std::vector<double> out(h.size());
  apply_symbol(h.values(), out, [delta](int k) { return cplx(std::exp(-delta * delta * k * k)); });
  return PeriodicField(std::move(out));
}

double integral(const PeriodicField& h) {
  double s = 0.0;
  for (double v : h.values()) s += v;
  return s * 2.0 * std::numbers::pi / h.size();
}

double mean(const PeriodicField& h) { return integral(h) / (2.0 * std::numbers::pi); }

PeriodicField project_zero_mean(const PeriodicField& h) {
  const double m = mean(h);
  std::vector<double> v(h.values().begin(), h.values().end());
  for (double& x : v) x -= m;
  return PeriodicField(std::move(v));
}

PeriodicField project_resolved(const PeriodicField& h) {
  const int n = h.size();
  std::vector<double> v(n);
  apply_symbol(h.values(), v, [n](int k) { return (k == 0 || k == n / 2) ? cplx(0.0) : cplx(1.0); });
  return PeriodicField(std::move(v));
}

}  // namespace muskat
