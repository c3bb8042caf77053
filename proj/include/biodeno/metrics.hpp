#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/random.hpp"

namespace biodeno {

/// SI-SDR values are clamped to +/- this many dB; +cap is the zero-residual
/// sentinel.
inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB. Both signals are mean-subtracted, the
/// reference is scaled by the optimal projection gain, and the ratio of
/// projected energy to residual energy is returned, clamped to +/-100 dB.
inline double si_sdr(std::span<const double> est, std::span<const double> ref) {
  require(est.size() == ref.size(), ErrorCode::LengthMismatch,
          "estimate has " + std::to_string(est.size()) + " samples, reference " +
              std::to_string(ref.size()));
  require(!ref.empty(), ErrorCode::ZeroReference, "reference is empty");
  const auto n = static_cast<double>(ref.size());
  double est_mean = 0.0, ref_mean = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    est_mean += est[i];
    ref_mean += ref[i];
  }
  est_mean /= n;
  ref_mean /= n;
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double r = ref[i] - ref_mean;
    dot += (est[i] - est_mean) * r;
    ref_energy += r * r;
  }
  require(ref_energy > 0.0, ErrorCode::ZeroReference, "reference has no energy after mean removal");
  const double alpha = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * (ref[i] - ref_mean);
    const double e = t - (est[i] - est_mean);
    target += t * t;
    residual += e * e;
  }
  if (target == 0.0) return -kSiSdrCapDb;
  if (residual == 0.0) return kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

inline double si_sdr(const AudioClip& est, const AudioClip& ref) {
  require(est.sample_rate() == ref.sample_rate(), ErrorCode::RateMismatch,
          "estimate and reference sample rates differ");
  return si_sdr(est.view(), ref.view());
}

/// SI-SDR improvement of `est` over the unprocessed mixture.
inline double si_sdri(const AudioClip& est, const AudioClip& mix, const AudioClip& ref) {
  return si_sdr(est, ref) - si_sdr(mix, ref);
}

struct ExcerptScore {
  std::string mix_id;
  double sisdr_db = 0.0;
  double sisdri_db = 0.0;
  std::uint64_t seed = 0;
};

enum class Metric { SiSdr, SiSdrI };

inline double metric_value(const ExcerptScore& s, Metric m) {
  return m == Metric::SiSdr ? s.sisdr_db : s.sisdri_db;
}

struct AggregateStat {
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mad = 0.0;
  std::size_t n = 0;

  friend bool operator==(const AggregateStat&, const AggregateStat&) = default;
};

inline double median_of(std::vector<double> values) {
  require(!values.empty(), ErrorCode::EmptyScores, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

/// Linear-interpolation percentile (q in [0, 1]) of sorted data.
inline double percentile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Median, median absolute deviation, and a 95% percentile-bootstrap CI of
/// the median over per-excerpt values.
inline AggregateStat summarize(const std::vector<double>& values, std::size_t bootstrap_n,
                               std::uint64_t seed) {
  require(!values.empty(), ErrorCode::EmptyScores, "no scores to aggregate");
  AggregateStat stat;
  stat.n = values.size();
  stat.median = median_of(values);
  std::vector<double> deviations(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) deviations[i] = std::abs(values[i] - stat.median);
  stat.mad = median_of(std::move(deviations));
  stat.ci_low = stat.ci_high = stat.median;
  if (bootstrap_n == 0) return stat;

  RandomStream rng(seed, "bootstrap");
  std::vector<double> medians(bootstrap_n), sample(values.size());
  for (std::size_t b = 0; b < bootstrap_n; ++b) {
    for (double& v : sample) v = values[rng.uniform_int(0, values.size() - 1)];
    medians[b] = median_of(sample);
  }
  std::sort(medians.begin(), medians.end());
  // The percentile interval can exclude a skewed median; widen it to keep
  // ci_low <= median <= ci_high.
  stat.ci_low = std::min(percentile_sorted(medians, 0.025), stat.median);
  stat.ci_high = std::max(percentile_sorted(medians, 0.975), stat.median);
  return stat;
}

/// Per-excerpt mean across seeds, ordered by mix_id.
inline std::vector<std::pair<std::string, double>> seed_means(std::span<const ExcerptScore> scores,
                                                              Metric metric) {
  std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> groups;
  for (const auto& s : scores) groups[s.mix_id].emplace_back(s.seed, metric_value(s, metric));
  std::vector<std::pair<std::string, double>> out;
  out.reserve(groups.size());
  for (auto& [id, entries] : groups) {
    // Fixed summation order keeps the mean independent of input order.
    std::sort(entries.begin(), entries.end());
    double sum = 0.0;
    for (const auto& e : entries) sum += e.second;
    out.emplace_back(id, sum / static_cast<double>(entries.size()));
  }
  return out;
}

/// Seed-mean per excerpt, then median and bootstrap CI across excerpts.
inline AggregateStat aggregate(std::span<const ExcerptScore> scores, Metric metric,
                               std::size_t bootstrap_n = 1000, std::uint64_t seed = 0) {
  require(!scores.empty(), ErrorCode::EmptyScores, "no scores to aggregate");
  const auto means = seed_means(scores, metric);
  std::vector<double> values;
  values.reserve(means.size());
  for (const auto& m : means) values.push_back(m.second);
  return summarize(values, bootstrap_n, seed);
}

/// Per-excerpt differences (a - b) of seed-meaned scores, aggregated.
inline AggregateStat paired_differences(std::span<const ExcerptScore> a,
                                        std::span<const ExcerptScore> b,
                                        Metric metric = Metric::SiSdr,
                                        std::size_t bootstrap_n = 1000, std::uint64_t seed = 0) {
  require(!a.empty() && !b.empty(), ErrorCode::EmptyScores, "no scores to compare");
  const auto ma = seed_means(a, metric);
  const auto mb = seed_means(b, metric);
  require(ma.size() == mb.size(), ErrorCode::IdSetMismatch,
          "score sets cover different excerpts");
  std::vector<double> diffs;
  diffs.reserve(ma.size());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    require(ma[i].first == mb[i].first, ErrorCode::IdSetMismatch,
            "excerpt " + ma[i].first + " has no counterpart");
    diffs.push_back(ma[i].second - mb[i].second);
  }
  return summarize(diffs, bootstrap_n, seed);
}

}  // namespace biodeno
