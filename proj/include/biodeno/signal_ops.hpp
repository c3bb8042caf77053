#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/fft.hpp"

namespace biodeno {

struct RmsFraming {
  std::size_t frame_len;
  std::size_t hop;

  /// 25 ms frames every 10 ms.
  static RmsFraming defaults_for(int sample_rate) {
    return {static_cast<std::size_t>(std::max(1L, std::lround(0.025 * sample_rate))),
            static_cast<std::size_t>(std::max(1L, std::lround(0.010 * sample_rate)))};
  }

  double hop_seconds(int sample_rate) const {
    return static_cast<double>(hop) / sample_rate;
  }
};

/// Frame-wise RMS. Frames start every `hop` samples until the last sample is
/// covered; a trailing partial frame is zero-padded to `frame_len`.
inline std::vector<double> rms_curve(const AudioClip& clip, std::size_t frame_len,
                                     std::size_t hop) {
  require_non_empty(clip);
  require(frame_len >= 1 && hop >= 1 && hop <= frame_len, ErrorCode::InvalidConfig,
          "rms framing requires frame_len >= 1 and 1 <= hop <= frame_len");
  const std::size_t len = clip.size();
  const std::size_t frames =
      len <= frame_len ? 1 : 1 + (len - frame_len + hop - 1) / hop;
  std::vector<double> out(frames);
  const auto& x = clip.samples();
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    const std::size_t stop = std::min(len, start + frame_len);
    double acc = 0.0;
    for (std::size_t i = start; i < stop; ++i) acc += x[i] * x[i];
    out[f] = std::sqrt(acc / static_cast<double>(frame_len));
  }
  return out;
}

inline std::vector<double> rms_curve(const AudioClip& clip, const RmsFraming& framing) {
  return rms_curve(clip, framing.frame_len, framing.hop);
}

namespace detail {

inline std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> k,
                                           std::size_t out_len) {
  std::vector<double> y(out_len, 0.0);
  for (std::size_t n = 0; n < out_len; ++n) {
    const std::size_t jmax = std::min(k.size() - 1, n);
    double acc = 0.0;
    for (std::size_t j = 0; j <= jmax; ++j) {
      if (n - j < x.size()) acc += k[j] * x[n - j];
    }
    y[n] = acc;
  }
  return y;
}

inline std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> k,
                                        std::size_t out_len) {
  const std::size_t n = next_pow2(x.size() + k.size() - 1);
  RealFft fft(n);
  std::vector<std::complex<double>> a(fft.bins()), b(fft.bins());
  fft.forward(x, a);
  fft.forward(k, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  std::vector<double> y(n);
  fft.inverse(a, y);
  y.resize(out_len);
  return y;
}

}  // namespace detail

/// Linear convolution truncated to the input length, rescaled so the output
/// peak equals the input peak.
inline AudioClip convolve(const AudioClip& clip, const AudioClip& kernel) {
  require_non_empty(clip);
  require(!kernel.empty(), ErrorCode::EmptyKernel, "convolution kernel is empty");
  require(clip.sample_rate() == kernel.sample_rate(), ErrorCode::RateMismatch,
          "clip at " + std::to_string(clip.sample_rate()) + " Hz, kernel at " +
              std::to_string(kernel.sample_rate()) + " Hz");
  // Direct summation is cheaper below a few dozen taps and exact for
  // trivial kernels.
  auto wet = kernel.size() <= 64
                 ? detail::convolve_direct(clip.view(), kernel.view(), clip.size())
                 : detail::convolve_fft(clip.view(), kernel.view(), clip.size());
  const double dry_peak = peak_abs(clip.view());
  const double wet_peak = peak_abs(wet);
  if (wet_peak > 0.0 && wet_peak != dry_peak) {
    const double gain = dry_peak / wet_peak;
    for (double& v : wet) v *= gain;
  }
  return AudioClip(std::move(wet), clip.sample_rate());
}

}  // namespace biodeno
