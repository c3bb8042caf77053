#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>

#include "biodeno/error.hpp"

namespace biodeno {

namespace detail {
// FFTW's planner is not reentrant; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-input FFT of a fixed size backed by FFTW. One instance must not be
/// used from two threads at once; separate instances are independent.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    require(n > 0, ErrorCode::InvalidConfig, "FFT size must be positive");
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(bins());
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int size = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(size, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, spec_, real_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// out[k] = sum_t in[t] exp(-2 pi i k t / n), k in [0, n/2].
  void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    for (std::size_t i = 0; i < n_; ++i) real_[i] = i < in.size() ? in[i] : 0.0;
    fftw_execute(forward_);
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
  }

  /// Normalized inverse: inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    for (std::size_t k = 0; k < bins(); ++k) {
      spec_[k][0] = in[k].real();
      spec_[k][1] = in[k].imag();
    }
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_ && i < out.size(); ++i) out[i] = real_[i] * scale;
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

constexpr std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

constexpr bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace biodeno
