// Shared fixtures for the test binaries.
#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "biodeno/biodeno.hpp"

namespace biodeno::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "biodeno-test-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline AudioClip sine(double freq, double seconds, int rate, double amp = 0.5, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  }
  return AudioClip(std::move(x), rate);
}

inline AudioClip white_noise(std::size_t n, int rate, double sigma, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal(0.0, sigma);
  return AudioClip(std::move(x), rate);
}

// Raised-cosine fade at both ends so the signal stays band-limited at the
// clip boundaries.
inline AudioClip taper(const AudioClip& clip, double fade_s) {
  auto x = clip.samples();
  const auto fade = std::min(x.size() / 2, static_cast<std::size_t>(fade_s * clip.sample_rate()));
  for (std::size_t i = 0; i < fade; ++i) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
  return AudioClip(std::move(x), clip.sample_rate());
}

// Linear chirp from f0 to f1 Hz with tapered ends.
inline AudioClip chirp(double f0, double f1, double seconds, int rate, double amp = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    x[i] = amp * std::sin(2.0 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) / seconds * t * t));
  }
  return taper(AudioClip(std::move(x), rate), 0.05);
}

inline double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

inline AudioClip add(const AudioClip& a, const AudioClip& b) {
  std::vector<double> x(a.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + b[i];
  return AudioClip(std::move(x), a.sample_rate());
}

inline AudioClip scale(const AudioClip& a, double c) {
  std::vector<double> x(a.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = c * a[i];
  return AudioClip(std::move(x), a.sample_rate());
}

// Writes `<root>/<scenario>/{voc,noise}/NNN.wav` with noise-like content of
// the given length. Durations vary slightly so pairing is well defined.
inline void write_asset_tree(const std::filesystem::path& root, Scenario scenario, std::size_t n_voc,
                             std::size_t n_noise, double seconds, int rate, std::uint64_t seed = 1) {
  const std::filesystem::path base = root / std::string(to_string(scenario));
  for (auto [role, count] : {std::pair{"voc", n_voc}, std::pair{"noise", n_noise}}) {
    std::filesystem::create_directories(base / role);
    for (std::size_t i = 0; i < count; ++i) {
      const double dur = seconds * (1.0 + 0.01 * static_cast<double>(i % 7));
      const auto n = static_cast<std::size_t>(dur * rate);
      AudioClip clip = std::string(role) == "voc"
                           ? chirp(300.0 + 40.0 * static_cast<double>(i % 11), 2000.0, dur, rate, 0.3)
                           : white_noise(n, rate, 0.1, derive_seed(seed, role, i));
      char name[32];
      std::snprintf(name, sizeof name, "%03zu.wav", i);
      write_audio(clip, base / role / name);
    }
  }
}

}  // namespace biodeno::testing
