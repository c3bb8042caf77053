#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/backend.hpp"
#include "biodeno/error.hpp"
#include "biodeno/manifest.hpp"
#include "biodeno/random.hpp"
#include "biodeno/resample.hpp"
#include "biodeno/segmentation.hpp"
#include "biodeno/signal_ops.hpp"
#include "biodeno/wav_io.hpp"

namespace biodeno {

/// Time-scale ensemble: each factor k slows the input by k, denoises, and
/// scales the estimate back; estimates are averaged.
struct EnsembleConfig {
  std::vector<double> scale_factors{1.0, 2.0, 3.0, 4.0};
  /// Used only to decide whether every estimate came back silent.
  PeakParams silence{};

  void validate() const {
    require(!scale_factors.empty(), ErrorCode::InvalidConfig, "no scale factors");
    for (std::size_t i = 0; i < scale_factors.size(); ++i) {
      const double k = scale_factors[i];
      require(k >= 1.0 && k <= TimeScaleFactor::kMaxMagnitude, ErrorCode::InvalidConfig,
              "scale factors must lie in [1, 8], got " + std::to_string(k));
      for (std::size_t j = 0; j < i; ++j) {
        require(scale_factors[j] != k, ErrorCode::InvalidConfig, "scale factors must be distinct");
      }
    }
  }
};

struct ExcerptConfig {
  double T = 4.0;
  double rir_prob = 0.5;
  PeakParams peak_params{};

  void validate() const {
    require(T > 0.0, ErrorCode::InvalidConfig, "excerpt length T must be > 0");
    require(rir_prob >= 0.0 && rir_prob <= 1.0, ErrorCode::InvalidConfig,
            "rir_prob must lie in [0, 1]");
    peak_params.validate();
  }
};

struct ImpulseResponse {
  std::string id;
  AudioClip audio;
};

using RirPool = std::vector<ImpulseResponse>;

/// Loads every WAV under `dir` (sorted by relative path), resampled to
/// `sample_rate`.
inline RirPool load_rir_pool(const std::filesystem::path& dir, int sample_rate) {
  std::error_code ec;
  require(std::filesystem::is_directory(dir, ec), ErrorCode::FileNotFound,
          "impulse-response directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && detail::has_wav_extension(e.path())) {
      files.push_back(e.path().lexically_relative(dir));
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
  RirPool pool;
  for (const auto& rel : files) {
    auto clip = read_audio(dir / rel);
    if (clip.empty()) continue;
    pool.push_back({rel.generic_string(), resample(clip, sample_rate)});
  }
  return pool;
}

/// Pseudo-clean target from a time-scale ensemble of one backend. The
/// result has the input's length and rate.
inline AudioClip generate_pseudo_clean(const AudioClip& clip, const DenoiserBackend& backend,
                                       const EnsembleConfig& cfg = {}, std::uint64_t seed = 0) {
  require_non_empty(clip);
  cfg.validate();
  std::vector<AudioClip> estimates;
  estimates.reserve(cfg.scale_factors.size());
  bool all_silent = true;
  for (double k : cfg.scale_factors) {
    const TimeScaleFactor slower(k);
    const auto scaled = time_scale(clip, slower);
    auto estimate = time_scale(run_backend(backend, scaled, seed), slower.inverse());
    all_silent = all_silent && is_silent(estimate, cfg.silence);
    estimates.push_back(std::move(estimate));
  }
  require(!all_silent, ErrorCode::AllSilent,
          backend.name() + ": every ensemble estimate is silent");
  std::size_t common = clip.size();
  for (const auto& e : estimates) common = std::min(common, e.size());
  std::vector<double> mean(clip.size(), 0.0);
  for (std::size_t i = 0; i < common; ++i) {
    double acc = 0.0;
    for (const auto& e : estimates) acc += e[i];
    mean[i] = acc / static_cast<double>(estimates.size());
  }
  return AudioClip(std::move(mean), clip.sample_rate());
}

/// Noisy-target baseline: the recording itself is the target.
inline AudioClip noisy_target(const AudioClip& clip) { return clip; }

struct Excerpt {
  AudioClip audio;
  /// Window index within the source clip (stable across runs).
  std::size_t index = 0;
  bool reverberated = false;
  std::string rir_id;
};

/// Pseudo-clean target -> silence filter -> RMS peaks -> T-second windows
/// (short clips padded or tiled) -> optional reverberation.
///
/// Randomness comes from streams keyed by (seed, clip_id) for segmentation
/// and (seed, clip_id, window index) for reverberation, so results do not
/// depend on the order clips are processed in.
inline std::vector<Excerpt> make_training_excerpts(const AudioClip& clip,
                                                   const DenoiserBackend& backend,
                                                   const EnsembleConfig& ens_cfg,
                                                   const ExcerptConfig& exc_cfg,
                                                   const RirPool& rir_pool, std::uint64_t seed,
                                                   std::string_view clip_id) {
  exc_cfg.validate();
  require(exc_cfg.rir_prob == 0.0 || !rir_pool.empty(), ErrorCode::EmptyRirPool,
          "reverberation requested but the impulse-response pool is empty");
  AudioClip target;
  try {
    target = generate_pseudo_clean(clip, backend, ens_cfg, seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllSilent) return {};
    throw;
  }
  if (is_silent(target, exc_cfg.peak_params)) return {};

  const auto framing = RmsFraming::defaults_for(target.sample_rate());
  const double hop_s = framing.hop_seconds(target.sample_rate());
  const auto peaks = find_peaks(rms_curve(target, framing), exc_cfg.peak_params, hop_s);
  const auto windows = extract_windows(target, peaks, exc_cfg.T, hop_s);

  RandomStream seg_rng(derive_seed(seed, "segmentation", clip_id, 0));
  std::vector<Excerpt> out;
  for (std::size_t j = 0; j < windows.size(); ++j) {
    auto audio = fit_to_length(windows[j], exc_cfg.T, seg_rng);
    if (is_silent(audio, exc_cfg.peak_params)) continue;
    Excerpt ex{std::move(audio), j, false, {}};
    RandomStream rir_rng(derive_seed(seed, "rir", clip_id, j));
    if (exc_cfg.rir_prob > 0.0 && rir_rng.bernoulli(exc_cfg.rir_prob)) {
      const auto& rir = rir_pool[rir_rng.uniform_int(0, rir_pool.size() - 1)];
      const auto kernel = rir.audio.sample_rate() == ex.audio.sample_rate()
                              ? rir.audio
                              : resample(rir.audio, ex.audio.sample_rate());
      ex.audio = convolve(ex.audio, kernel);
      ex.reverberated = true;
      ex.rir_id = rir.id;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace biodeno
