#pragma once

#include <complex>
#include <span>

namespace muskat {

/// Real-to-complex FFT of fixed length backed by FFTW.
///
/// forward() produces the unnormalised half spectrum c_k = sum_j x_j e^{-2 pi i jk/n},
/// k = 0..n/2; inverse() is its exact inverse (it divides by n). Instances are
/// immutable after construction and safe to use from several threads.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Shared plan for length n; plans are created once and cached for the process.
const RealFft& fft_plan(int n);

}  // namespace muskat
