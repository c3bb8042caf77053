#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/random.hpp"

namespace biodeno {

namespace detail {

/// Kaiser-windowed sinc (beta 8, 64 taps per phase at full band), tabulated
/// at `kOversample` points per zero crossing for linear interpolation.
class SincTable {
 public:
  static constexpr int kHalfTaps = 32;
  static constexpr int kOversample = 2048;
  static constexpr double kBeta = 8.0;

  static const SincTable& instance() {
    static const SincTable table;
    return table;
  }

  /// Kernel value at |t| (input-sample units, full band).
  double at(double t) const {
    const double u = std::abs(t) * kOversample;
    const auto idx = static_cast<std::size_t>(u);
    if (idx + 1 >= values_.size()) return 0.0;
    const double frac = u - static_cast<double>(idx);
    return values_[idx] + frac * (values_[idx + 1] - values_[idx]);
  }

 private:
  SincTable() {
    const std::size_t n = static_cast<std::size_t>(kHalfTaps) * kOversample + 2;
    values_.resize(n, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kOversample;
      if (t >= kHalfTaps) break;
      const double r = t / kHalfTaps;
      const double window = std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - r * r)) / norm;
      const double sinc =
          i == 0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
      values_[i] = sinc * window;
    }
  }

  std::vector<double> values_;
};

}  // namespace detail

/// Band-limited interpolation of `x` onto a grid `ratio` times denser
/// (ratio > 1 upsamples, ratio < 1 downsamples with an anti-aliasing cutoff).
/// Samples outside the input are treated as zero.
inline std::vector<double> resample_by_ratio(std::span<const double> x, double ratio,
                                             std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (x.empty()) return out;
  const auto& table = detail::SincTable::instance();
  const double scale = std::min(1.0, ratio);
  const double reach = detail::SincTable::kHalfTaps / scale;
  const auto last = static_cast<std::int64_t>(x.size()) - 1;
  for (std::size_t j = 0; j < out_len; ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t - reach)));
    const auto hi = std::min<std::int64_t>(last, static_cast<std::int64_t>(std::floor(t + reach)));
    double acc = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) {
      acc += x[static_cast<std::size_t>(i)] * table.at(scale * (t - static_cast<double>(i)));
    }
    out[j] = scale * acc;
  }
  return out;
}

/// Converts a clip to `target_rate`, preserving pitch and tempo.
/// Output length is round(len * target_rate / sample_rate).
inline AudioClip resample(const AudioClip& clip, int target_rate) {
  require(target_rate > 0, ErrorCode::InvalidRate,
          "target rate must be positive, got " + std::to_string(target_rate));
  if (target_rate == clip.sample_rate()) return clip;
  const auto len = static_cast<std::uint64_t>(clip.size());
  const auto src = static_cast<std::uint64_t>(clip.sample_rate());
  const auto dst = static_cast<std::uint64_t>(target_rate);
  const std::size_t out_len = static_cast<std::size_t>((len * dst * 2 + src) / (2 * src));
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate();
  return AudioClip(resample_by_ratio(clip.view(), ratio, out_len), target_rate);
}

/// Tempo/pitch scale factor with |value| in [1, 8]. Positive k plays k times
/// slower (longer, lower pitch); negative -k plays k times faster.
class TimeScaleFactor {
 public:
  static constexpr double kMaxMagnitude = 8.0;

  explicit TimeScaleFactor(double value) : value_(value) {
    require(std::isfinite(value) && std::abs(value) >= 1.0 && std::abs(value) <= kMaxMagnitude,
            ErrorCode::InvalidFactor,
            "time-scale factor must satisfy 1 <= |k| <= 8, got " + std::to_string(value));
  }

  /// Maps a draw u (e.g. uniform on [-4, 4]) to a factor: |u| < 1 is the
  /// identity, otherwise u itself.
  static TimeScaleFactor from_draw(double u) {
    return TimeScaleFactor(std::abs(u) < 1.0 ? 1.0 : u);
  }

  double value() const noexcept { return value_; }
  TimeScaleFactor inverse() const { return TimeScaleFactor(std::abs(value_) == 1.0 ? 1.0 : -value_); }

  /// Output-to-input length ratio.
  double length_ratio() const noexcept { return value_ > 0 ? value_ : 1.0 / -value_; }

  std::size_t output_length(std::size_t len) const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(len) * length_ratio()));
  }

 private:
  double value_;
};

/// Resampling-based time scaling: the clip is reinterpreted at
/// sample_rate / k and resampled back, so duration and pitch change together.
inline AudioClip time_scale(const AudioClip& clip, TimeScaleFactor factor) {
  if (factor.length_ratio() == 1.0) return clip;
  return AudioClip(resample_by_ratio(clip.view(), factor.length_ratio(),
                                     factor.output_length(clip.size())),
                   clip.sample_rate());
}

/// Augmentation draw: u uniform on [-max_magnitude, max_magnitude], mapped by
/// TimeScaleFactor::from_draw.
inline TimeScaleFactor draw_time_scale(RandomStream& rng, double max_magnitude = 4.0) {
  return TimeScaleFactor::from_draw(rng.uniform(-max_magnitude, max_magnitude));
}

}  // namespace biodeno
