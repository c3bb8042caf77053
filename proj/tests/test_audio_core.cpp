#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace biodeno;
using namespace biodeno::testing;

namespace {

// Minimal PCM16 writer for fixtures the library itself never produces.
void write_pcm16(const std::filesystem::path& p, int rate, int channels,
                 const std::vector<std::int16_t>& interleaved) {
  std::vector<unsigned char> b;
  auto put32 = [&](std::uint32_t v) { for (int s = 0; s < 32; s += 8) b.push_back((v >> s) & 0xFF); };
  auto put16 = [&](std::uint16_t v) { b.push_back(v & 0xFF); b.push_back(v >> 8); };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  tag("RIFF"); put32(36 + data_bytes); tag("WAVE");
  tag("fmt "); put32(16); put16(1); put16(static_cast<std::uint16_t>(channels)); put32(rate);
  put32(rate * channels * 2); put16(static_cast<std::uint16_t>(channels * 2)); put16(16);
  tag("data"); put32(data_bytes);
  for (auto s : interleaved) put16(static_cast<std::uint16_t>(s));
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

double dominant_freq(const AudioClip& clip) {
  const std::size_t n = next_pow2(clip.size());
  std::vector<double> x(n, 0.0);
  std::copy(clip.samples().begin(), clip.samples().end(), x.begin());
  std::vector<std::complex<double>> spec(n / 2 + 1);
  RealFft(n).forward(x, spec);
  std::size_t best = 0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  return static_cast<double>(best) * clip.sample_rate() / static_cast<double>(n);
}

}  // namespace

TEST(AudioClip, RejectsNonFiniteSamplesAndBadRates) {
  EXPECT_THROW(AudioClip({0.0, std::nan("")}, 16000), Error);
  try {
    AudioClip({std::numeric_limits<double>::infinity()}, 16000);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSignal);
  }
  EXPECT_THROW(AudioClip({0.0}, 0), Error);
}

TEST(WavIo, ZeroPcm16FileReadsAsZeros) {
  TempDir dir;
  write_pcm16(dir / "z.wav", 16000, 1, std::vector<std::int16_t>(16000, 0));
  const auto clip = read_audio(dir / "z.wav");
  ASSERT_EQ(clip.size(), 16000u);
  EXPECT_EQ(clip.sample_rate(), 16000);
  for (double v : clip.samples()) EXPECT_EQ(v, 0.0);
}

TEST(WavIo, StereoIsAveragedToMono) {
  TempDir dir;
  write_pcm16(dir / "s.wav", 16000, 2, {32767, 0});
  const auto clip = read_audio(dir / "s.wav");
  ASSERT_EQ(clip.size(), 1u);
  EXPECT_NEAR(clip[0], 0.5, 1e-4);
}

TEST(WavIo, Float32RoundTrip) {
  TempDir dir;
  const auto clip = white_noise(4000, 16000, 0.3, 7);
  write_audio(clip, dir / "r.wav");
  const auto back = read_audio(dir / "r.wav");
  ASSERT_EQ(back.size(), clip.size());
  for (std::size_t i = 0; i < clip.size(); ++i) EXPECT_NEAR(back[i], clip[i], 1e-6);

  write_audio(AudioClip({0.0, 0.5, -0.5}, 16000), dir / "t.wav");
  EXPECT_EQ(read_audio(dir / "t.wav").samples(), (std::vector<double>{0.0, 0.5, -0.5}));
}

TEST(WavIo, HeaderDeclaresRate) {
  TempDir dir;
  write_audio(AudioClip::zeros(480, 48000), dir / "h.wav");
  const auto info = probe_wav(dir / "h.wav");
  EXPECT_EQ(info.sample_rate, 48000);
  EXPECT_EQ(info.channels, 1);
  EXPECT_EQ(info.format, SampleFormat::Float32);
  EXPECT_EQ(read_audio(dir / "h.wav").sample_rate(), 48000);
}

TEST(WavIo, ErrorsAreTyped) {
  TempDir dir;
  try {
    read_audio(dir / "missing.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
  std::ofstream(dir / "junk.wav") << "not a wav file at all";
  try {
    read_audio(dir / "junk.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::CorruptHeader || e.code() == ErrorCode::UnsupportedFormat);
  }
}

TEST(Resample, SameRateIsIdentity) {
  const auto clip = white_noise(1000, 16000, 0.2, 3);
  EXPECT_EQ(resample(clip, 16000), clip);
}

TEST(Resample, LengthArithmetic) {
  EXPECT_EQ(resample(AudioClip::zeros(16000, 16000), 48000).size(), 48000u);
  EXPECT_EQ(resample(AudioClip::zeros(48000, 48000), 16000).size(), 16000u);
}

TEST(Resample, SinePeakSurvivesUpsampling) {
  const auto up = resample(sine(1000.0, 1.0, 16000), 48000);
  const double bin_hz = 48000.0 / static_cast<double>(next_pow2(up.size()));
  EXPECT_NEAR(dominant_freq(up), 1000.0, bin_hz);
}

TEST(Resample, DoubleRateRoundTripIsAccurate) {
  const auto x = chirp(200.0, 3000.0, 1.0, 16000);
  const auto back = resample(resample(x, 32000), 16000);
  ASSERT_EQ(back.size(), x.size());
  EXPECT_LE(rel_l2(back.view(), x.view()), 1e-3);
}

TEST(TimeScale, FactorBounds) {
  EXPECT_THROW(TimeScaleFactor(0.5), Error);
  EXPECT_THROW(TimeScaleFactor(9.0), Error);
  EXPECT_EQ(TimeScaleFactor::from_draw(0.7).value(), 1.0);
  EXPECT_EQ(TimeScaleFactor::from_draw(-2.5).value(), -2.5);
}

TEST(TimeScale, PlusOneIsIdentity) {
  const auto clip = white_noise(500, 16000, 0.2, 4);
  EXPECT_EQ(time_scale(clip, TimeScaleFactor(1.0)), clip);
}

TEST(TimeScale, SlowerByTwoHalvesPitch) {
  const auto slow = time_scale(sine(1000.0, 1.0, 16000), TimeScaleFactor(2.0));
  EXPECT_EQ(slow.size(), 32000u);
  EXPECT_EQ(slow.sample_rate(), 16000);
  const double bin_hz = 16000.0 / static_cast<double>(next_pow2(slow.size()));
  EXPECT_NEAR(dominant_freq(slow), 500.0, bin_hz);
}

TEST(TimeScale, RoundTripPreservesLengthAndShape) {
  const auto x = taper(sine(440.0, 1.0, 16000), 0.05);
  for (double k : {2.0, 3.0, 4.0}) {
    const TimeScaleFactor f(k);
    const auto back = time_scale(time_scale(x, f), f.inverse());
    EXPECT_LE(std::abs(static_cast<long>(back.size()) - static_cast<long>(x.size())), 2) << k;
    const std::size_t n = std::min(back.size(), x.size());
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      xy += x[i] * back[i];
      xx += x[i] * x[i];
      yy += back[i] * back[i];
    }
    EXPECT_GE(xy / std::sqrt(xx * yy), 0.99) << k;
  }
}

TEST(TimeScale, DrawIsDeterministic) {
  RandomStream a(5, "aug"), b(5, "aug");
  for (int i = 0; i < 20; ++i) {
    const auto fa = draw_time_scale(a), fb = draw_time_scale(b);
    EXPECT_EQ(fa.value(), fb.value());
    EXPECT_LE(std::abs(fa.value()), 4.0);
  }
}

TEST(RmsCurve, ConstantAndZeroAndDirect) {
  for (double v : rms_curve(AudioClip(std::vector<double>(16, 0.5), 16000), 4, 4)) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : rms_curve(AudioClip::zeros(100, 16000), 10, 5)) EXPECT_EQ(v, 0.0);
  const auto x = white_noise(777, 16000, 0.4, 9);
  const auto c = rms_curve(x, x.size(), x.size());
  ASSERT_EQ(c.size(), 1u);
  double ms = 0.0;
  for (double v : x.samples()) ms += v * v;
  EXPECT_NEAR(c[0], std::sqrt(ms / static_cast<double>(x.size())), 1e-12);
}

TEST(RmsCurve, SignInvariant) {
  const auto x = white_noise(3000, 16000, 0.4, 10);
  EXPECT_EQ(rms_curve(x, 400, 160), rms_curve(scale(x, -1.0), 400, 160));
}

TEST(Convolve, ImpulseIsIdentity) {
  const auto x = white_noise(2000, 16000, 0.3, 11);
  const auto y = convolve(x, AudioClip({1.0}, 16000));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-12);
}

TEST(Convolve, DelayShiftsByOneSample) {
  const AudioClip x({0.1, -0.5, 0.25, 0.3}, 16000);
  const auto y = convolve(x, AudioClip({0.0, 1.0}, 16000));
  // The shifted signal keeps the dry peak, so no rescaling happens.
  const double g = 1.0;
  EXPECT_EQ(y.size(), 4u);
  EXPECT_NEAR(y[0], 0.0, 1e-12);
  EXPECT_NEAR(y[1], 0.1 * g, 1e-12);
  EXPECT_NEAR(y[2], -0.5 * g, 1e-12);
  EXPECT_NEAR(y[3], 0.25 * g, 1e-12);
}

TEST(Convolve, MatchesNaiveOracle) {
  const auto x = white_noise(16000, 16000, 0.3, 12);
  const auto k = white_noise(1600, 16000, 0.1, 13);
  const auto y = convolve(x, k);
  std::vector<double> ref(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t m = 0; m < k.size() && m <= n; ++m) acc += k[m] * x[n - m];
    ref[n] = acc;
  }
  const double g = peak_abs(x.view()) / peak_abs(ref);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(y[n], g * ref[n], 1e-5);
}

TEST(Convolve, RateMismatchAndEmptyKernel) {
  const auto x = white_noise(100, 16000, 0.3, 14);
  EXPECT_THROW(convolve(x, AudioClip({1.0}, 8000)), Error);
  EXPECT_THROW(convolve(x, AudioClip(std::vector<double>{}, 16000)), Error);
}
