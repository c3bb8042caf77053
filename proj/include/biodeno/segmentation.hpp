#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/random.hpp"
#include "biodeno/signal_ops.hpp"

namespace biodeno {

struct PeakParams {
  double min_height_rel = 0.1;
  double floor_dbfs = -60.0;
  double min_distance_s = 1.0;
  double prominence_rel = 0.05;

  void validate() const {
    require(min_height_rel >= 0.0 && min_height_rel <= 1.0, ErrorCode::InvalidConfig,
            "min_height_rel must lie in [0, 1]");
    require(min_distance_s > 0.0, ErrorCode::InvalidConfig, "min_distance_s must be > 0");
    require(prominence_rel >= 0.0, ErrorCode::InvalidConfig, "prominence_rel must be >= 0");
    require(std::isfinite(floor_dbfs) || floor_dbfs == -INFINITY, ErrorCode::InvalidConfig,
            "floor_dbfs must be a level in dB");
  }

  double floor_linear() const { return std::pow(10.0, floor_dbfs / 20.0); }
};

namespace detail {

// Plateau-aware local maxima. The curve is taken to be zero outside its
// range, so a boundary sample above zero can be a maximum.
inline std::vector<std::size_t> local_maxima(std::span<const double> curve) {
  std::vector<std::size_t> out;
  const std::size_t n = curve.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && curve[j + 1] == curve[i]) ++j;
    const double left = i == 0 ? 0.0 : curve[i - 1];
    const double right = j + 1 == n ? 0.0 : curve[j + 1];
    if (left < curve[i] && right < curve[i]) out.push_back((i + j) / 2);
    i = j + 1;
  }
  return out;
}

inline double prominence(std::span<const double> curve, std::size_t peak) {
  const double h = curve[peak];
  double left_min = h;
  std::size_t i = peak;
  bool blocked = false;
  while (i > 0) {
    --i;
    if (curve[i] > h) { blocked = true; break; }
    left_min = std::min(left_min, curve[i]);
  }
  if (!blocked) left_min = std::min(left_min, 0.0);
  double right_min = h;
  blocked = false;
  for (std::size_t j = peak + 1; j < curve.size(); ++j) {
    if (curve[j] > h) { blocked = true; break; }
    right_min = std::min(right_min, curve[j]);
  }
  if (!blocked) right_min = std::min(right_min, 0.0);
  return h - std::max(left_min, right_min);
}

}  // namespace detail

/// Peak picking on an envelope curve sampled every `hop_s` seconds.
///
/// A peak must be a local maximum, reach max(min_height_rel * max(curve),
/// floor), and have prominence >= prominence_rel * max(curve). Peaks closer
/// than min_distance_s / hop_s samples are resolved in favour of the higher
/// one; equal heights keep the earlier index.
inline std::vector<std::size_t> find_peaks(std::span<const double> curve, const PeakParams& params,
                                           double hop_s) {
  require(!curve.empty(), ErrorCode::EmptyCurve, "peak search on an empty curve");
  params.validate();
  require(hop_s > 0.0, ErrorCode::InvalidConfig, "hop_s must be > 0");
  const double top = *std::max_element(curve.begin(), curve.end());
  const double min_height = std::max(params.min_height_rel * top, params.floor_linear());

  std::vector<std::size_t> peaks;
  for (std::size_t p : detail::local_maxima(curve)) {
    if (curve[p] >= min_height) peaks.push_back(p);
  }

  const double distance = params.min_distance_s / hop_s;
  std::vector<std::size_t> priority(peaks.size());
  std::iota(priority.begin(), priority.end(), 0);
  std::stable_sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    return curve[peaks[a]] > curve[peaks[b]];
  });
  std::vector<bool> keep(peaks.size(), true);
  for (std::size_t rank : priority) {
    if (!keep[rank]) continue;
    for (std::size_t other = 0; other < peaks.size(); ++other) {
      if (other == rank || !keep[other]) continue;
      const double gap = std::abs(static_cast<double>(peaks[other]) - static_cast<double>(peaks[rank]));
      if (gap < distance) keep[other] = false;
    }
  }

  const double min_prominence = params.prominence_rel * top;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    if (keep[k] && detail::prominence(curve, peaks[k]) >= min_prominence) out.push_back(peaks[k]);
  }
  return out;
}

/// RMS-envelope peaks of a clip with default 25 ms / 10 ms framing.
inline std::vector<std::size_t> find_clip_peaks(const AudioClip& clip, const PeakParams& params) {
  const auto framing = RmsFraming::defaults_for(clip.sample_rate());
  return find_peaks(rms_curve(clip, framing), params, framing.hop_seconds(clip.sample_rate()));
}

/// True iff the clip's RMS envelope has no qualifying peak.
inline bool is_silent(const AudioClip& clip, const PeakParams& params = {}) {
  if (clip.empty()) return true;
  return find_clip_peaks(clip, params).empty();
}

inline std::size_t samples_for(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

/// Start offsets of the fixed-length windows centred on each peak. Windows
/// that would cross a clip boundary are shifted inward.
inline std::vector<std::size_t> window_starts(std::size_t clip_len, int sample_rate,
                                              std::span<const std::size_t> peaks, double T,
                                              double hop_s) {
  require(T > 0.0, ErrorCode::InvalidConfig, "window length must be > 0");
  const std::size_t win = samples_for(T, sample_rate);
  if (clip_len <= win) return {0};
  std::vector<std::size_t> starts;
  starts.reserve(peaks.size());
  const auto max_start = static_cast<std::int64_t>(clip_len - win);
  for (std::size_t p : peaks) {
    const auto center = std::llround(static_cast<double>(p) * hop_s * sample_rate);
    const auto start = std::clamp<std::int64_t>(center - static_cast<std::int64_t>(win / 2), 0, max_start);
    starts.push_back(static_cast<std::size_t>(start));
  }
  return starts;
}

/// One T-second window per peak; a clip no longer than T comes back whole.
inline std::vector<AudioClip> extract_windows(const AudioClip& clip,
                                              std::span<const std::size_t> peaks, double T,
                                              double hop_s) {
  require(std::is_sorted(peaks.begin(), peaks.end()), ErrorCode::InvalidConfig,
          "peaks must be sorted");
  const std::size_t win = samples_for(T, clip.sample_rate());
  const auto starts = window_starts(clip.size(), clip.sample_rate(), peaks, T, hop_s);
  if (clip.size() <= win) return {clip};
  std::vector<AudioClip> out;
  out.reserve(starts.size());
  const auto& x = clip.samples();
  for (std::size_t s : starts) {
    out.emplace_back(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(s),
                                         x.begin() + static_cast<std::ptrdiff_t>(s + win)),
                     clip.sample_rate());
  }
  return out;
}

/// Brings a clip up to exactly T seconds: with probability 1/2 zero-pads with
/// a uniformly drawn left/right split, otherwise tiles the clip and cuts it.
/// A clip already T long is returned unchanged without consuming the rng.
inline AudioClip fit_to_length(const AudioClip& clip, double T, RandomStream& rng) {
  require(T > 0.0, ErrorCode::InvalidConfig, "target length must be > 0");
  const std::size_t target = samples_for(T, clip.sample_rate());
  require(clip.size() <= target, ErrorCode::TooLong,
          "clip has " + std::to_string(clip.size()) + " samples, target is " +
              std::to_string(target));
  if (clip.size() == target) return clip;
  require_non_empty(clip);
  std::vector<double> out(target, 0.0);
  const auto& x = clip.samples();
  if (rng.bernoulli(0.5)) {
    const std::size_t offset = static_cast<std::size_t>(rng.uniform_int(0, target - x.size()));
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
  } else {
    for (std::size_t i = 0; i < target; ++i) out[i] = x[i % x.size()];
  }
  return AudioClip(std::move(out), clip.sample_rate());
}

}  // namespace biodeno
