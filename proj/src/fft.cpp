#include "muskat/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace muskat {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("RealFft: length must be positive");
  std::lock_guard lock(planner_mutex());
  std::vector<double> re(n);
  std::vector<std::complex<double>> co(n / 2 + 1);
  auto* cp = reinterpret_cast<fftw_complex*>(co.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_1d(n, re.data(), cp, flags);
  // c2r destroys its input unless asked not to.
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, cp, re.data(), flags | FFTW_PRESERVE_INPUT);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_ / 2 + 1)
    throw std::invalid_argument("RealFft::forward: size mismatch");
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (static_cast<int>(out.size()) != n_ || static_cast<int>(in.size()) != n_ / 2 + 1)
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                       out.data());
  const double scale = 1.0 / n_;
  for (double& v : out) v *= scale;
}

const RealFft& fft_plan(int n) {
  static std::mutex cache_mutex;
  static std::map<int, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace muskat
