#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biodeno/error.hpp"

namespace biodeno {

/// Mono sample sequence with its sample rate. Samples are finite and the
/// rate is positive; both are checked on construction.
class AudioClip {
 public:
  AudioClip() = default;

  AudioClip(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0, ErrorCode::InvalidRate,
            "sample rate must be positive, got " + std::to_string(sample_rate_));
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i])) {
        fail(ErrorCode::InvalidSignal,
             "non-finite sample at index " + std::to_string(i));
      }
    }
  }

  static AudioClip zeros(std::size_t length, int sample_rate) {
    return AudioClip(std::vector<double>(length, 0.0), sample_rate);
  }

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::span<const double> view() const noexcept { return samples_; }
  std::vector<double> release() && { return std::move(samples_); }

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  int sample_rate() const noexcept { return sample_rate_; }
  double duration_s() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  friend bool operator==(const AudioClip&, const AudioClip&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

inline void require_non_empty(const AudioClip& clip, const char* what = "clip") {
  require(!clip.empty(), ErrorCode::EmptyClip, std::string(what) + " is empty");
}

inline double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

inline double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

inline double energy(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

/// Rounds every sample to the nearest float32 value.
inline AudioClip quantize_float32(const AudioClip& clip) {
  std::vector<double> out(clip.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(static_cast<float>(clip[i]));
  }
  return AudioClip(std::move(out), clip.sample_rate());
}

}  // namespace biodeno
