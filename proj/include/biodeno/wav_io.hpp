#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"

namespace biodeno {

enum class SampleFormat { Pcm16, Pcm24, Pcm32, Float32, Float64 };

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  SampleFormat format = SampleFormat::Float32;
  std::uint64_t frames = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

namespace detail {

inline std::uint16_t read_le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_le16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_le32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<unsigned char>((v >> shift) & 0xFF));
  }
}

inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct ParsedWav {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
};

inline std::size_t bytes_per_sample(SampleFormat f) {
  switch (f) {
    case SampleFormat::Pcm16: return 2;
    case SampleFormat::Pcm24: return 3;
    case SampleFormat::Pcm32: return 4;
    case SampleFormat::Float32: return 4;
    case SampleFormat::Float64: return 8;
  }
  return 0;
}

// Parses the RIFF chunk list. `bytes` may hold only the header prefix when
// `full_file_size` says how long the real file is.
inline ParsedWav parse_wav(const std::vector<unsigned char>& bytes,
                           std::size_t full_file_size, const std::string& name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::UnsupportedFormat, name + ": not a RIFF/WAVE file");
  }
  ParsedWav parsed;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        fail(ErrorCode::CorruptHeader, name + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      std::uint16_t tag = read_le16(f);
      const int channels = read_le16(f + 2);
      const std::uint32_t rate = read_le32(f + 4);
      const int bits = read_le16(f + 14);
      if (tag == 0xFFFE) {
        if (size < 40) fail(ErrorCode::CorruptHeader, name + ": truncated extensible fmt");
        tag = read_le16(f + 24);
      }
      if (channels <= 0 || rate == 0 || rate > 0x7FFFFFFF) {
        fail(ErrorCode::CorruptHeader, name + ": invalid channel count or rate");
      }
      parsed.info.channels = channels;
      parsed.info.sample_rate = static_cast<int>(rate);
      if (tag == 1 && bits == 16) {
        parsed.info.format = SampleFormat::Pcm16;
      } else if (tag == 1 && bits == 24) {
        parsed.info.format = SampleFormat::Pcm24;
      } else if (tag == 1 && bits == 32) {
        parsed.info.format = SampleFormat::Pcm32;
      } else if (tag == 3 && bits == 32) {
        parsed.info.format = SampleFormat::Float32;
      } else if (tag == 3 && bits == 64) {
        parsed.info.format = SampleFormat::Float64;
      } else {
        fail(ErrorCode::UnsupportedFormat,
             name + ": unsupported encoding (format tag " + std::to_string(tag) +
                 ", " + std::to_string(bits) + " bits)");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorCode::CorruptHeader, name + ": data chunk before fmt chunk");
      if (body + size > full_file_size) {
        fail(ErrorCode::CorruptHeader, name + ": data chunk extends past end of file");
      }
      const std::size_t frame_bytes =
          bytes_per_sample(parsed.info.format) * static_cast<std::size_t>(parsed.info.channels);
      parsed.data_offset = body;
      parsed.data_bytes = size - size % frame_bytes;
      parsed.info.frames = parsed.data_bytes / frame_bytes;
      return parsed;
    }
    pos = body + size + (size & 1U);
  }
  fail(ErrorCode::CorruptHeader,
       name + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

inline std::vector<unsigned char> slurp(const std::filesystem::path& path,
                                        std::size_t limit = SIZE_MAX) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(std::filesystem::file_size(path, ec));
  const std::size_t n = std::min(size, limit);
  std::vector<unsigned char> bytes(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n))) {
    fail(ErrorCode::IoError, "short read on " + path.string());
  }
  return bytes;
}

inline double decode_sample(const unsigned char* p, SampleFormat format) {
  switch (format) {
    case SampleFormat::Pcm16:
      return static_cast<std::int16_t>(read_le16(p)) / 32768.0;
    case SampleFormat::Pcm24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case SampleFormat::Pcm32:
      return static_cast<std::int32_t>(read_le32(p)) / 2147483648.0;
    case SampleFormat::Float32: {
      const std::uint32_t bits = read_le32(p);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      return f;
    }
    case SampleFormat::Float64: {
      const std::uint64_t bits = static_cast<std::uint64_t>(read_le32(p)) |
                                 (static_cast<std::uint64_t>(read_le32(p + 4)) << 32);
      double d;
      std::memcpy(&d, &bits, sizeof d);
      return d;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Reads only the header of a WAV file.
inline WavInfo probe_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorCode::FileNotFound, path.string());
  const auto size = static_cast<std::size_t>(std::filesystem::file_size(path, ec));
  // Header chunks almost always fit in the first few KiB; fall back to the
  // whole file when they do not.
  auto bytes = detail::slurp(path, 1 << 16);
  try {
    return detail::parse_wav(bytes, size, path.string()).info;
  } catch (const Error&) {
    if (bytes.size() == size) throw;
  }
  return detail::parse_wav(detail::slurp(path), size, path.string()).info;
}

/// Reads a RIFF/WAVE file as a mono clip; multichannel frames are averaged.
inline AudioClip read_audio(const std::filesystem::path& path) {
  const auto bytes = detail::slurp(path);
  const auto parsed = detail::parse_wav(bytes, bytes.size(), path.string());
  const auto& info = parsed.info;
  const std::size_t width = detail::bytes_per_sample(info.format);
  const std::size_t channels = static_cast<std::size_t>(info.channels);
  std::vector<double> samples(info.frames);
  const unsigned char* p = bytes.data() + parsed.data_offset;
  for (std::size_t frame = 0; frame < info.frames; ++frame) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < channels; ++ch, p += width) {
      acc += detail::decode_sample(p, info.format);
    }
    samples[frame] = channels == 1 ? acc : acc / static_cast<double>(channels);
    if (!std::isfinite(samples[frame])) {
      fail(ErrorCode::InvalidSignal,
           path.string() + ": non-finite sample at frame " + std::to_string(frame));
    }
  }
  return AudioClip(std::move(samples), info.sample_rate);
}

/// Encodes a clip as a mono IEEE float32 WAV image.
inline std::vector<unsigned char> encode_wav_float32(const AudioClip& clip) {
  for (std::size_t i = 0; i < clip.size(); ++i) {
    if (!std::isfinite(clip[i])) {
      fail(ErrorCode::InvalidSignal, "non-finite sample at index " + std::to_string(i));
    }
  }
  const std::uint64_t data_bytes = 4ULL * clip.size();
  require(data_bytes + 58 <= UINT32_MAX, ErrorCode::IoError, "clip too long for RIFF");
  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(data_bytes) + 58);
  using detail::put_le16;
  using detail::put_le32;
  detail::put_tag(out, "RIFF");
  put_le32(out, static_cast<std::uint32_t>(50 + data_bytes));
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  put_le32(out, 18);
  put_le16(out, 3);  // WAVE_FORMAT_IEEE_FLOAT
  put_le16(out, 1);
  put_le32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_le32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 4U);
  put_le16(out, 4);
  put_le16(out, 32);
  put_le16(out, 0);
  detail::put_tag(out, "fact");
  put_le32(out, 4);
  put_le32(out, static_cast<std::uint32_t>(clip.size()));
  detail::put_tag(out, "data");
  put_le32(out, static_cast<std::uint32_t>(data_bytes));
  for (double v : clip.samples()) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_le32(out, bits);
  }
  return out;
}

inline void write_bytes(const std::filesystem::path& path,
                        const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "write failed on " + path.string());
}

/// Writes a float32 mono WAV. Rejects non-finite samples with InvalidSignal.
inline void write_audio(const AudioClip& clip, const std::filesystem::path& path) {
  write_bytes(path, encode_wav_float32(clip));
}

}  // namespace biodeno
