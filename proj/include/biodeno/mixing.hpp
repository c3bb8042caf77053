#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <map>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/csv.hpp"
#include "biodeno/error.hpp"
#include "biodeno/manifest.hpp"
#include "biodeno/parallel.hpp"
#include "biodeno/random.hpp"
#include "biodeno/resample.hpp"
#include "biodeno/wav_io.hpp"

namespace biodeno {

/// Target-SNR distribution for a benchmark: uniform on [lo, hi] or fixed.
struct SnrPolicy {
  enum class Kind { Uniform, Fixed };
  Kind kind = Kind::Uniform;
  double lo_db = -5.0;
  double hi_db = 10.0;

  static SnrPolicy uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, ErrorCode::InvalidConfig,
            "SNR bounds must satisfy lo <= hi");
    return {Kind::Uniform, lo, hi};
  }
  static SnrPolicy fixed(double snr_db) {
    require(std::isfinite(snr_db), ErrorCode::InvalidConfig, "SNR must be finite");
    return {Kind::Fixed, snr_db, snr_db};
  }

  double draw(RandomStream& rng) const {
    return kind == Kind::Fixed ? lo_db : rng.uniform(lo_db, hi_db);
  }
};

/// The first `count` SNR draws of the benchmark's SNR stream.
inline std::vector<double> draw_snrs(const SnrPolicy& policy, std::uint64_t seed, std::size_t count) {
  RandomStream rng(seed, "snr");
  std::vector<double> out(count);
  for (double& v : out) v = policy.draw(rng);
  return out;
}

/// Gain g such that signal + g * noise has the requested SNR, with power
/// measured as mean square over the whole clip.
inline double scale_noise_to_snr(const AudioClip& signal, const AudioClip& noise, double snr_db) {
  require(signal.size() == noise.size(), ErrorCode::LengthMismatch,
          "signal has " + std::to_string(signal.size()) + " samples, noise " +
              std::to_string(noise.size()));
  require(signal.sample_rate() == noise.sample_rate(), ErrorCode::RateMismatch,
          "signal and noise sample rates differ");
  require(std::isfinite(snr_db), ErrorCode::InvalidConfig, "SNR must be finite");
  const double ps = mean_square(signal.view());
  const double pn = mean_square(noise.view());
  require(ps > 0.0, ErrorCode::SilentSignal, "signal has zero power");
  require(pn > 0.0, ErrorCode::SilentNoise, "noise has zero power");
  return std::sqrt(ps / pn * std::pow(10.0, -snr_db / 10.0));
}

/// SNR in dB of signal against noise, both as given.
inline double measure_snr_db(std::span<const double> signal, std::span<const double> noise) {
  return 10.0 * std::log10(mean_square(signal) / mean_square(noise));
}

/// Crops (uniform random offset) or tiles the noise to exactly `target_len`.
/// Noise already of that length is returned without consuming the rng.
inline AudioClip fit_noise_duration(const AudioClip& noise, std::size_t target_len, RandomStream& rng) {
  require(!noise.empty(), ErrorCode::EmptyNoise, "noise clip is empty");
  if (noise.size() == target_len) return noise;
  const auto& x = noise.samples();
  std::vector<double> out(target_len);
  if (noise.size() > target_len) {
    const auto offset = static_cast<std::ptrdiff_t>(rng.uniform_int(0, noise.size() - target_len));
    std::copy(x.begin() + offset, x.begin() + offset + static_cast<std::ptrdiff_t>(target_len),
              out.begin());
  } else {
    for (std::size_t i = 0; i < target_len; ++i) out[i] = x[i % x.size()];
  }
  return AudioClip(std::move(out), noise.sample_rate());
}

struct MixtureSpec {
  std::string voc_id;
  std::string noise_id;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// How noise assets reach the working rate: relabelled at the new rate
/// (time scaling, shifts tempo and pitch) or band-limited resampling.
enum class NoiseRateMode { TimeScale, Resample };

struct MixOptions {
  int working_rate = 16000;
  NoiseRateMode noise_rate_mode = NoiseRateMode::TimeScale;
};

/// A realized mixture. All three clips hold float32-representable samples
/// and mixture[i] == float(clean[i]) + float(noise[i]) in float arithmetic.
struct Mixture {
  AudioClip mixture;
  AudioClip clean;
  AudioClip noise;
  double gain = 1.0;
  double rescale = 1.0;
};

inline AudioClip load_asset(const AssetEntry& entry, const MixOptions& options) {
  auto clip = read_audio(entry.path);
  if (clip.sample_rate() == options.working_rate) return clip;
  if (entry.role == Role::Noise && options.noise_rate_mode == NoiseRateMode::TimeScale) {
    return AudioClip(std::move(clip).release(), options.working_rate);
  }
  return resample(clip, options.working_rate);
}

/// Mixes clean + g * fitted noise at `snr_db`. When the mixture would clip,
/// all three signals are scaled by the same factor, so SNR is unchanged.
inline Mixture mix_at_snr(const AudioClip& clean, const AudioClip& noise, double snr_db,
                          RandomStream& rng) {
  require(clean.sample_rate() == noise.sample_rate(), ErrorCode::RateMismatch,
          "clean and noise sample rates differ");
  require_non_empty(clean, "vocalization");
  const auto fitted = fit_noise_duration(noise, clean.size(), rng);
  const double gain = scale_noise_to_snr(clean, fitted, snr_db);
  double peak = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    peak = std::max(peak, std::abs(clean[i] + gain * fitted[i]));
  }
  const double rescale = peak > 1.0 ? (1.0 - 0x1.0p-20) / peak : 1.0;
  std::vector<float> c(clean.size()), n(clean.size());
  std::vector<double> cd(clean.size()), nd(clean.size()), md(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    c[i] = static_cast<float>(clean[i] * rescale);
    n[i] = static_cast<float>(fitted[i] * gain * rescale);
    const float m = c[i] + n[i];
    cd[i] = c[i];
    nd[i] = n[i];
    md[i] = m;
  }
  require(mean_square(nd) > 0.0, ErrorCode::SilentNoise, "scaled noise underflows float32");
  const int rate = clean.sample_rate();
  return {AudioClip(std::move(md), rate), AudioClip(std::move(cd), rate),
          AudioClip(std::move(nd), rate), gain, rescale};
}

inline Mixture make_mixture(const MixtureSpec& spec, const Manifest& manifest,
                            const MixOptions& options = {}) {
  const auto& voc = manifest.find(spec.voc_id);
  const auto& noise = manifest.find(spec.noise_id);
  RandomStream rng(spec.seed, "noise_fit");
  return mix_at_snr(load_asset(voc, options), load_asset(noise, options), spec.snr_db, rng);
}

/// Pairs vocalizations with noises by duration rank (longest with longest;
/// equal durations ordered by asset id). Each vocalization appears once;
/// when there are fewer noises than vocalizations the noise ranking wraps.
inline std::vector<std::pair<std::string, std::string>> pair_by_duration(
    std::vector<AssetEntry> vocs, std::vector<AssetEntry> noises) {
  require(!vocs.empty(), ErrorCode::EmptyList, "no vocalizations to pair");
  require(!noises.empty(), ErrorCode::EmptyList, "no noises to pair");
  const auto by_duration = [](const AssetEntry& a, const AssetEntry& b) {
    if (a.duration_s != b.duration_s) return a.duration_s > b.duration_s;
    return a.asset_id < b.asset_id;
  };
  std::sort(vocs.begin(), vocs.end(), by_duration);
  std::sort(noises.begin(), noises.end(), by_duration);
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(vocs.size());
  for (std::size_t i = 0; i < vocs.size(); ++i) {
    pairs.emplace_back(vocs[i].asset_id, noises[i % noises.size()].asset_id);
  }
  return pairs;
}

struct BenchmarkMode {
  enum class Kind { Random, Fixed, AllCombinations };
  Kind kind = Kind::Random;
  SnrPolicy policy = SnrPolicy::uniform(-5.0, 10.0);
  std::uint64_t seed = 0;

  static BenchmarkMode random(SnrPolicy p, std::uint64_t seed) { return {Kind::Random, p, seed}; }
  static BenchmarkMode fixed(double snr_db, std::uint64_t seed) {
    return {Kind::Fixed, SnrPolicy::fixed(snr_db), seed};
  }
  static BenchmarkMode all_combinations(SnrPolicy p, std::uint64_t seed) {
    return {Kind::AllCombinations, p, seed};
  }

  std::string name() const {
    switch (kind) {
      case Kind::Random: return "random";
      case Kind::Fixed: return "fixed:" + csv::format_double(policy.lo_db);
      case Kind::AllCombinations: return "combinations";
    }
    return "random";
  }

  /// Subset label used when aggregating evaluation results.
  std::string label() const {
    switch (kind) {
      case Kind::Random: return "small";
      case Kind::Fixed: return "snr_" + csv::format_double(policy.lo_db);
      case Kind::AllCombinations: return "large";
    }
    return "small";
  }
};

struct MixtureRecord {
  std::string mix_id;
  Scenario scenario = Scenario::Underwater;
  MixtureSpec spec;
  std::string mix_path;
  std::string clean_path;
  std::string noise_path;
  double duration_s = 0.0;
  int sample_rate = 0;
};

/// Mixture catalog plus its provenance header (`key=value` comment lines).
struct MixtureManifest {
  std::map<std::string, std::string> header;
  std::vector<MixtureRecord> records;
  /// Directory that relative record paths resolve against.
  std::filesystem::path base_dir;

  std::string label() const {
    auto it = header.find("label");
    return it == header.end() ? "all" : it->second;
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  }
};

inline constexpr const char* kMixtureColumns[] = {
    "mix_id",   "scenario",   "voc_id",     "noise_id",   "snr_db",     "seed",
    "mix_path", "clean_path", "noise_path", "duration_s", "sample_rate"};

inline std::string format_mixture_manifest(const MixtureManifest& m) {
  std::string out;
  for (const auto& [key, value] : m.header) out += "# " + key + "=" + value + "\n";
  out += csv::join_row({std::begin(kMixtureColumns), std::end(kMixtureColumns)});
  for (const auto& r : m.records) {
    out += csv::join_row({r.mix_id, std::string(to_string(r.scenario)), r.spec.voc_id,
                          r.spec.noise_id, csv::format_double(r.spec.snr_db),
                          std::to_string(r.spec.seed), r.mix_path, r.clean_path, r.noise_path,
                          csv::format_double(r.duration_s), std::to_string(r.sample_rate)});
  }
  return out;
}

inline MixtureManifest read_mixture_manifest(const std::filesystem::path& path) {
  const auto table = csv::parse(csv::read_text(path));
  MixtureManifest m;
  m.base_dir = path.parent_path();
  for (const auto& line : table.comments) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    m.header[key] = line.substr(eq + 1);
  }
  std::size_t col[std::size(kMixtureColumns)];
  for (std::size_t i = 0; i < std::size(kMixtureColumns); ++i) col[i] = table.column(kMixtureColumns[i]);
  for (const auto& row : table.rows) {
    MixtureRecord r;
    r.mix_id = row[col[0]];
    r.scenario = parse_scenario(row[col[1]]);
    r.spec.voc_id = row[col[2]];
    r.spec.noise_id = row[col[3]];
    r.spec.snr_db = csv::parse_double(row[col[4]], "snr_db");
    r.spec.seed = csv::parse_u64(row[col[5]], "seed");
    r.mix_path = row[col[6]];
    r.clean_path = row[col[7]];
    r.noise_path = row[col[8]];
    r.duration_s = csv::parse_double(row[col[9]], "duration_s");
    r.sample_rate = static_cast<int>(csv::parse_u64(row[col[10]], "sample_rate"));
    m.records.push_back(std::move(r));
  }
  return m;
}

/// Plans every mixture of a benchmark without touching audio: pairing per
/// scenario, SNR draws taken in record order from the (seed, "snr") stream,
/// and a per-record seed for noise fitting.
inline std::vector<MixtureRecord> plan_benchmark(const Manifest& manifest, const BenchmarkMode& mode) {
  std::vector<std::tuple<Scenario, std::string, std::string>> plan;
  for (Scenario s : kScenarios) {
    const auto vocs = manifest.select(Role::Voc, s);
    const auto noises = manifest.select(Role::Noise, s);
    if (vocs.empty() && noises.empty()) continue;
    require(!vocs.empty() && !noises.empty(), ErrorCode::EmptyScenario,
            std::string(to_string(s)) + " scenario needs at least one vocalization and one noise");
    if (mode.kind == BenchmarkMode::Kind::AllCombinations) {
      for (const auto& v : vocs) {
        for (const auto& n : noises) plan.emplace_back(s, v.asset_id, n.asset_id);
      }
    } else {
      for (auto& [v, n] : pair_by_duration(vocs, noises)) plan.emplace_back(s, v, n);
    }
  }
  require(!plan.empty(), ErrorCode::EmptyScenario, "manifest has no usable scenario");

  RandomStream snr_rng(mode.seed, "snr");
  std::vector<MixtureRecord> records;
  records.reserve(plan.size());
  std::map<Scenario, std::size_t> counters;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& [scenario, voc, noise] = plan[i];
    MixtureRecord r;
    char id[64];
    std::snprintf(id, sizeof id, "%s_%05zu", std::string(to_string(scenario)).c_str(),
                  counters[scenario]++);
    r.mix_id = id;
    r.scenario = scenario;
    r.spec = {voc, noise, mode.policy.draw(snr_rng), derive_seed(mode.seed, "mixture", i)};
    r.mix_path = "mixtures/" + r.mix_id + ".wav";
    r.clean_path = "clean/" + r.mix_id + ".wav";
    r.noise_path = "noise/" + r.mix_id + ".wav";
    records.push_back(std::move(r));
  }
  return records;
}

struct BenchmarkOptions {
  MixOptions mix;
  std::size_t jobs = 1;
};

/// Renders a benchmark into `out_dir` (mixtures/, clean/, noise/ and
/// mixtures.csv). The result is a pure function of (manifest, mode, options).
inline MixtureManifest build_benchmark(const Manifest& manifest, const BenchmarkMode& mode,
                                       const std::filesystem::path& out_dir,
                                       const BenchmarkOptions& options = {}) {
  auto records = plan_benchmark(manifest, mode);
  std::error_code ec;
  for (const char* sub : {"mixtures", "clean", "noise"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    require(!ec, ErrorCode::IoError, "cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
  parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    auto& r = records[i];
    const auto mix = make_mixture(r.spec, manifest, options.mix);
    write_audio(mix.mixture, out_dir / r.mix_path);
    write_audio(mix.clean, out_dir / r.clean_path);
    write_audio(mix.noise, out_dir / r.noise_path);
    r.duration_s = mix.mixture.duration_s();
    r.sample_rate = mix.mixture.sample_rate();
  });

  MixtureManifest out;
  out.base_dir = out_dir;
  out.header["mode"] = mode.name();
  out.header["label"] = mode.label();
  out.header["seed"] = std::to_string(mode.seed);
  out.header["snr_lo"] = csv::format_double(mode.policy.lo_db);
  out.header["snr_hi"] = csv::format_double(mode.policy.hi_db);
  out.header["sample_rate"] = std::to_string(options.mix.working_rate);
  out.records = std::move(records);
  csv::write_text_atomic(out_dir / "mixtures.csv", format_mixture_manifest(out));
  return out;
}

}  // namespace biodeno
