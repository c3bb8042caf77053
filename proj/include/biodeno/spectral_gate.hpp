#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/fft.hpp"

namespace biodeno {

/// Hann-windowed STFT geometry.
struct StftConfig {
  std::size_t n_fft = 1024;
  std::size_t hop = 256;

  std::size_t bins() const noexcept { return n_fft / 2 + 1; }

  void validate() const {
    require(is_pow2(n_fft) && n_fft >= 2, ErrorCode::InvalidConfig,
            "n_fft must be a power of two, got " + std::to_string(n_fft));
    require(hop >= 1 && n_fft % hop == 0 && hop <= n_fft / 2, ErrorCode::InvalidConfig,
            "hop must divide n_fft and be at most n_fft/2");
  }

  /// Leading zero padding; every input sample then lies under n_fft/hop frames.
  std::size_t left_pad() const noexcept { return n_fft - hop; }

  std::size_t frames_for(std::size_t len) const noexcept {
    const std::size_t last = left_pad() + std::max<std::size_t>(len, 1) - 1;
    return 1 + (last + hop - 1) / hop;
  }
};

template <typename T>
struct TimeFrequencyGrid {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<T> values;

  TimeFrequencyGrid() = default;
  TimeFrequencyGrid(std::size_t f, std::size_t b, T fill = T{})
      : frames(f), bins(b), values(f * b, fill) {}

  T& at(std::size_t frame, std::size_t bin) { return values[frame * bins + bin]; }
  const T& at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
  bool empty() const noexcept { return frames == 0 || bins == 0; }
};

struct Spectrogram : TimeFrequencyGrid<std::complex<double>> {
  int sample_rate = 1;

  Spectrogram() = default;
  Spectrogram(std::size_t f, std::size_t b, int rate)
      : TimeFrequencyGrid(f, b), sample_rate(rate) {}
};

using GateMask = TimeFrequencyGrid<double>;

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

inline Spectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  require_non_empty(clip);
  const std::size_t frames = cfg.frames_for(clip.size());
  Spectrogram spec(frames, cfg.bins(), clip.sample_rate());
  const auto window = hann_window(cfg.n_fft);
  RealFft fft(cfg.n_fft);
  std::vector<double> frame(cfg.n_fft);
  const auto& x = clip.samples();
  const auto pad = static_cast<std::ptrdiff_t>(cfg.left_pad());
  for (std::size_t f = 0; f < frames; ++f) {
    const auto start = static_cast<std::ptrdiff_t>(f * cfg.hop) - pad;
    for (std::size_t i = 0; i < cfg.n_fft; ++i) {
      const std::ptrdiff_t src = start + static_cast<std::ptrdiff_t>(i);
      const double v = src >= 0 && src < static_cast<std::ptrdiff_t>(x.size())
                           ? x[static_cast<std::size_t>(src)]
                           : 0.0;
      frame[i] = v * window[i];
    }
    fft.forward(frame, std::span(spec.values).subspan(f * spec.bins, spec.bins));
  }
  return spec;
}

/// Weighted overlap-add inverse; output is normalized by the summed squared
/// window and cut or zero-padded to `out_len`.
inline AudioClip istft(const Spectrogram& spec, const StftConfig& cfg, std::size_t out_len) {
  cfg.validate();
  require(spec.bins == cfg.bins() && spec.values.size() == spec.frames * spec.bins,
          ErrorCode::ShapeMismatch,
          "spectrogram has " + std::to_string(spec.bins) + " bins, config expects " +
              std::to_string(cfg.bins()));
  const std::size_t pad = cfg.left_pad();
  const std::size_t total = pad + out_len;
  std::vector<double> acc(total, 0.0), norm(total, 0.0);
  const auto window = hann_window(cfg.n_fft);
  RealFft fft(cfg.n_fft);
  std::vector<double> frame(cfg.n_fft);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t start = f * cfg.hop;
    if (start >= total) break;
    fft.inverse(std::span(spec.values).subspan(f * spec.bins, spec.bins), frame);
    for (std::size_t i = 0; i < cfg.n_fft && start + i < total; ++i) {
      acc[start + i] += frame[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double n = norm[pad + i];
    out[i] = n > 1e-12 ? acc[pad + i] / n : 0.0;
  }
  return AudioClip(std::move(out), spec.sample_rate);
}

/// Spectral-gate parameters. Defaults follow the reference noise-reduction
/// tool.
struct GateConfig {
  bool stationary = true;
  double n_std_thresh = 1.5;
  double prop_decrease = 1.0;
  double time_smooth_ms = 50.0;
  double freq_smooth_hz = 500.0;
  double nonstat_time_constant_s = 2.0;

  void validate() const {
    require(n_std_thresh >= 0.0 && std::isfinite(n_std_thresh), ErrorCode::InvalidConfig,
            "n_std_thresh must be >= 0");
    require(prop_decrease >= 0.0 && prop_decrease <= 1.0, ErrorCode::InvalidConfig,
            "prop_decrease must lie in [0, 1]");
    require(time_smooth_ms >= 0.0 && freq_smooth_hz >= 0.0, ErrorCode::InvalidConfig,
            "smoothing extents must be >= 0");
    require(nonstat_time_constant_s > 0.0, ErrorCode::InvalidConfig,
            "non-stationary time constant must be > 0");
  }
};

/// Per-bin noise magnitude statistics. A stationary profile has one frame
/// that applies to every frame of the gated spectrogram; a non-stationary
/// profile carries one row per frame.
struct NoiseProfile {
  std::size_t frames = 1;
  std::size_t bins = 0;
  std::vector<double> mean_mag;
  std::vector<double> std_mag;

  bool frame_indexed() const noexcept { return frames > 1; }
  double mean(std::size_t frame, std::size_t bin) const {
    return mean_mag[(frame_indexed() ? frame : 0) * bins + bin];
  }
  double stddev(std::size_t frame, std::size_t bin) const {
    return std_mag[(frame_indexed() ? frame : 0) * bins + bin];
  }

  /// Profile with every statistic multiplied by c (c >= 0).
  NoiseProfile scaled(double c) const {
    NoiseProfile out = *this;
    for (double& v : out.mean_mag) v *= c;
    for (double& v : out.std_mag) v *= c;
    return out;
  }
};

namespace detail {

inline void require_non_empty(const Spectrogram& spec) {
  require(!spec.empty() && spec.values.size() == spec.frames * spec.bins,
          ErrorCode::EmptySpectrogram, "spectrogram has no frames");
}

// Zero-phase one-pole smoothing along time: forward pass then backward pass.
inline std::vector<double> smooth_forward_backward(const std::vector<double>& x,
                                                   std::size_t frames, std::size_t bins,
                                                   double alpha) {
  std::vector<double> y = x;
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t f = 1; f < frames; ++f) {
      y[f * bins + b] = y[(f - 1) * bins + b] + alpha * (y[f * bins + b] - y[(f - 1) * bins + b]);
    }
    for (std::size_t f = frames - 1; f-- > 0;) {
      y[f * bins + b] = y[(f + 1) * bins + b] + alpha * (y[f * bins + b] - y[(f + 1) * bins + b]);
    }
  }
  return y;
}

// Triangular weights 1 - |j|/(n+1) for |j| <= n, normalized to unit sum.
inline std::vector<double> triangular_kernel(std::size_t half_width) {
  std::vector<double> k(2 * half_width + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double j = std::abs(static_cast<double>(i) - static_cast<double>(half_width));
    k[i] = 1.0 - j / static_cast<double>(half_width + 1);
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// 'same'-size smoothing along one axis with zero boundary.
inline void smooth_axis(GateMask& mask, std::size_t half_width, bool along_time) {
  if (half_width == 0) return;
  const auto kernel = triangular_kernel(half_width);
  const std::size_t len = along_time ? mask.frames : mask.bins;
  const std::size_t lanes = along_time ? mask.bins : mask.frames;
  std::vector<double> line(len), out(len);
  const auto hw = static_cast<std::ptrdiff_t>(half_width);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    for (std::size_t i = 0; i < len; ++i) {
      line[i] = along_time ? mask.at(i, lane) : mask.at(lane, i);
    }
    for (std::size_t i = 0; i < len; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -hw; j <= hw; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) + j;
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(len)) {
          acc += kernel[static_cast<std::size_t>(j + hw)] * line[static_cast<std::size_t>(src)];
        }
      }
      out[i] = acc;
    }
    for (std::size_t i = 0; i < len; ++i) {
      (along_time ? mask.at(i, lane) : mask.at(lane, i)) = out[i];
    }
  }
}

}  // namespace detail

/// Noise statistics for the gate. Stationary mode: mean and population std
/// of magnitude per bin over `noise_spec` when given, else over `spec`.
/// Non-stationary mode: a per-frame floor from forward-backward exponential
/// smoothing of each bin's magnitude (time constant
/// `cfg.nonstat_time_constant_s`), with a matching smoothed deviation.
inline NoiseProfile estimate_noise_profile(const Spectrogram& spec,
                                           const Spectrogram* noise_spec,
                                           const GateConfig& cfg, const StftConfig& stft_cfg) {
  cfg.validate();
  detail::require_non_empty(spec);
  NoiseProfile profile;
  profile.bins = spec.bins;
  if (cfg.stationary) {
    const Spectrogram& src = noise_spec != nullptr ? *noise_spec : spec;
    detail::require_non_empty(src);
    require(src.bins == spec.bins, ErrorCode::ShapeMismatch,
            "noise spectrogram bin count differs from signal");
    profile.frames = 1;
    profile.mean_mag.assign(src.bins, 0.0);
    profile.std_mag.assign(src.bins, 0.0);
    const auto n = static_cast<double>(src.frames);
    for (std::size_t b = 0; b < src.bins; ++b) {
      double sum = 0.0;
      for (std::size_t f = 0; f < src.frames; ++f) sum += std::abs(src.at(f, b));
      const double mean = sum / n;
      double var = 0.0;
      for (std::size_t f = 0; f < src.frames; ++f) {
        const double d = std::abs(src.at(f, b)) - mean;
        var += d * d;
      }
      profile.mean_mag[b] = mean;
      profile.std_mag[b] = std::sqrt(var / n);
    }
    return profile;
  }
  const double frame_period_s =
      static_cast<double>(stft_cfg.hop) / static_cast<double>(spec.sample_rate);
  const double alpha = 1.0 - std::exp(-frame_period_s / cfg.nonstat_time_constant_s);
  std::vector<double> mag(spec.values.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(spec.values[i]);
  profile.frames = spec.frames;
  profile.mean_mag = detail::smooth_forward_backward(mag, spec.frames, spec.bins, alpha);
  std::vector<double> dev(mag.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const double d = mag[i] - profile.mean_mag[i];
    dev[i] = d * d;
  }
  profile.std_mag = detail::smooth_forward_backward(dev, spec.frames, spec.bins, alpha);
  for (double& v : profile.std_mag) v = std::sqrt(std::max(0.0, v));
  // A single-frame input yields a one-row profile, which broadcasts the same way.
  return profile;
}

/// Soft gate mask in [0, 1]: binary detection against the noise threshold,
/// smoothed with unit-sum triangular kernels over time and frequency, then
/// blended toward 1 by (1 - prop_decrease).
inline GateMask compute_gate_mask(const Spectrogram& spec, const NoiseProfile& profile,
                                  const GateConfig& cfg, const StftConfig& stft_cfg) {
  cfg.validate();
  detail::require_non_empty(spec);
  require(profile.bins == spec.bins &&
              (profile.frames == 1 || profile.frames == spec.frames) &&
              profile.mean_mag.size() == profile.frames * profile.bins &&
              profile.std_mag.size() == profile.frames * profile.bins,
          ErrorCode::ShapeMismatch, "noise profile shape does not match spectrogram");
  GateMask mask(spec.frames, spec.bins, 0.0);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t b = 0; b < spec.bins; ++b) {
      const double threshold = profile.mean(f, b) + cfg.n_std_thresh * profile.stddev(f, b);
      mask.at(f, b) = std::abs(spec.at(f, b)) > threshold ? 1.0 : 0.0;
    }
  }
  const double frame_ms = 1000.0 * static_cast<double>(stft_cfg.hop) / spec.sample_rate;
  const double bin_hz = static_cast<double>(spec.sample_rate) / static_cast<double>(stft_cfg.n_fft);
  const auto time_half = static_cast<std::size_t>(std::lround(cfg.time_smooth_ms / frame_ms));
  const auto freq_half = static_cast<std::size_t>(std::lround(cfg.freq_smooth_hz / bin_hz));
  detail::smooth_axis(mask, time_half, true);
  detail::smooth_axis(mask, freq_half, false);
  for (double& m : mask.values) {
    m = std::clamp(1.0 - cfg.prop_decrease * (1.0 - m), 0.0, 1.0);
  }
  return mask;
}

/// Applies a magnitude mask; phase is passed through.
inline Spectrogram apply_mask(Spectrogram spec, const GateMask& mask) {
  require(mask.frames == spec.frames && mask.bins == spec.bins, ErrorCode::ShapeMismatch,
          "mask shape does not match spectrogram");
  for (std::size_t i = 0; i < spec.values.size(); ++i) spec.values[i] *= mask.values[i];
  return spec;
}

/// Spectral gating with a precomputed stationary profile.
inline AudioClip denoise_with_profile(const AudioClip& clip, const NoiseProfile& profile,
                                      const StftConfig& stft_cfg, const GateConfig& gate_cfg) {
  const auto spec = stft(clip, stft_cfg);
  const auto mask = compute_gate_mask(spec, profile, gate_cfg, stft_cfg);
  return istft(apply_mask(spec, mask), stft_cfg, clip.size());
}

/// Spectral-gating denoiser. In stationary mode the profile comes from
/// `noise_clip` when supplied, else from the clip itself; non-stationary mode
/// always tracks the clip.
inline AudioClip denoise(const AudioClip& clip, const std::optional<AudioClip>& noise_clip,
                         const StftConfig& stft_cfg = {}, const GateConfig& gate_cfg = {}) {
  require_non_empty(clip);
  gate_cfg.validate();
  stft_cfg.validate();
  const auto spec = stft(clip, stft_cfg);
  std::optional<Spectrogram> noise_spec;
  if (noise_clip && gate_cfg.stationary) {
    require(noise_clip->sample_rate() == clip.sample_rate(), ErrorCode::RateMismatch,
            "noise clip sample rate differs from signal");
    noise_spec = stft(*noise_clip, stft_cfg);
  }
  const auto profile = estimate_noise_profile(spec, noise_spec ? &*noise_spec : nullptr,
                                              gate_cfg, stft_cfg);
  const auto mask = compute_gate_mask(spec, profile, gate_cfg, stft_cfg);
  return istft(apply_mask(spec, mask), stft_cfg, clip.size());
}

}  // namespace biodeno
