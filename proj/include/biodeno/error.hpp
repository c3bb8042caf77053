#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biodeno {

enum class ErrorCode {
  // audio_core
  FileNotFound,
  UnsupportedFormat,
  CorruptHeader,
  IoError,
  InvalidSignal,
  InvalidRate,
  InvalidFactor,
  EmptyClip,
  RateMismatch,
  EmptyKernel,
  // spectral_gate
  InvalidConfig,
  ShapeMismatch,
  EmptySpectrogram,
  // segmentation
  EmptyCurve,
  TooLong,
  // mixing
  SilentSignal,
  SilentNoise,
  LengthMismatch,
  EmptyNoise,
  AssetNotFound,
  EmptyList,
  EmptyScenario,
  // metrics
  ZeroReference,
  EmptyScores,
  IdSetMismatch,
  // pseudo_target
  BackendFailure,
  Timeout,
  AllSilent,
  EmptyRirPool,
  // bench_harness
  UnreadableFile,
  EmptyRoot,
  MissingReference,
  ManifestMismatch,
  InternalError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidSignal: return "InvalidSignal";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySpectrogram: return "EmptySpectrogram";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::TooLong: return "TooLong";
    case ErrorCode::SilentSignal: return "SilentSignal";
    case ErrorCode::SilentNoise: return "SilentNoise";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyNoise: return "EmptyNoise";
    case ErrorCode::AssetNotFound: return "AssetNotFound";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::EmptyScenario: return "EmptyScenario";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::IdSetMismatch: return "IdSetMismatch";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::AllSilent: return "AllSilent";
    case ErrorCode::EmptyRirPool: return "EmptyRirPool";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::EmptyRoot: return "EmptyRoot";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace biodeno
