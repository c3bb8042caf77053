#pragma once

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "biodeno/audio_clip.hpp"
#include "biodeno/error.hpp"
#include "biodeno/resample.hpp"
#include "biodeno/spectral_gate.hpp"
#include "biodeno/wav_io.hpp"

extern char** environ;

namespace biodeno {

/// A denoiser treated as a black box. Implementations must return a clip of
/// the input's length and rate and be callable concurrently.
class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;
  virtual std::string name() const = 0;
  /// `seed` parameterizes stochastic backends; deterministic ones ignore it.
  virtual AudioClip denoise(const AudioClip& clip, std::uint64_t seed) const = 0;
};

/// Calls the backend and enforces its contract. Failures of any kind come
/// back as BackendFailure naming the backend; Timeout passes through.
inline AudioClip run_backend(const DenoiserBackend& backend, const AudioClip& clip,
                             std::uint64_t seed = 0) {
  AudioClip out;
  try {
    out = backend.denoise(clip, seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendFailure || e.code() == ErrorCode::Timeout) throw;
    fail(ErrorCode::BackendFailure, backend.name() + ": " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorCode::BackendFailure, backend.name() + ": " + e.what());
  }
  require(out.size() == clip.size() && out.sample_rate() == clip.sample_rate(),
          ErrorCode::BackendFailure,
          backend.name() + ": returned " + std::to_string(out.size()) + " samples at " +
              std::to_string(out.sample_rate()) + " Hz for an input of " +
              std::to_string(clip.size()) + " at " + std::to_string(clip.sample_rate()) + " Hz");
  return out;
}

/// Returns its input: the noisy-target baseline.
class IdentityBackend final : public DenoiserBackend {
 public:
  std::string name() const override { return "identity"; }
  AudioClip denoise(const AudioClip& clip, std::uint64_t) const override { return clip; }
};

/// Built-in spectral gate. Without a noise clip the stationary profile is
/// estimated from each input.
class SpectralGateBackend final : public DenoiserBackend {
 public:
  explicit SpectralGateBackend(StftConfig stft = {}, GateConfig gate = {},
                               std::optional<AudioClip> noise_clip = std::nullopt)
      : stft_(stft), gate_(gate), noise_(std::move(noise_clip)) {
    stft_.validate();
    gate_.validate();
  }

  std::string name() const override { return "gate"; }
  AudioClip denoise(const AudioClip& clip, std::uint64_t) const override {
    return biodeno::denoise(clip, noise_, stft_, gate_);
  }

  const StftConfig& stft_config() const noexcept { return stft_; }
  const GateConfig& gate_config() const noexcept { return gate_; }

 private:
  StftConfig stft_;
  GateConfig gate_;
  std::optional<AudioClip> noise_;
};

inline std::filesystem::path default_scratch_dir() {
  if (const char* env = std::getenv("BIODENO_SCRATCH"); env != nullptr && *env != '\0') {
    return env;
  }
  return std::filesystem::temp_directory_path();
}

struct ExternalOptions {
  double timeout_s = 300.0;
  /// Empty means $BIODENO_SCRATCH, else the system temp directory.
  std::filesystem::path scratch_dir;
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

inline void replace_all(std::string& text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& parent) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    std::string pattern = (parent / "biodeno-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      fail(ErrorCode::IoError, "cannot create scratch directory under " + parent.string());
    }
    path_ = pattern;
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string tail_of_file(const std::filesystem::path& p, std::size_t max_chars = 400) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.size() > max_chars) s = "..." + s.substr(s.size() - max_chars);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

struct ProcessResult {
  bool timed_out = false;
  int exit_code = 0;
};

// Runs `/bin/sh -c command` in its own process group, output to `log`.
inline ProcessResult run_shell(const std::string& command, const std::filesystem::path& log,
                               double timeout_s) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) fail(ErrorCode::BackendFailure, "cannot spawn /bin/sh: " + std::to_string(rc));

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_s));
  auto pause = std::chrono::milliseconds(1);
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) fail(ErrorCode::BackendFailure, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return {true, -1};
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(50));
  }
  if (WIFEXITED(status)) return {false, WEXITSTATUS(status)};
  return {false, 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0)};
}

}  // namespace detail

/// Runs an external program per clip. The command template must contain
/// `{in}` and `{out}`; `{seed}` and `{rate}` are substituted when present.
/// Output of the wrong rate or length is resampled and cut/padded to match
/// the input, and a warning is recorded.
class ExternalBackend final : public DenoiserBackend {
 public:
  explicit ExternalBackend(std::string command_template, ExternalOptions options = {})
      : template_(std::move(command_template)), options_(std::move(options)) {
    require(template_.find("{in}") != std::string::npos &&
                template_.find("{out}") != std::string::npos,
            ErrorCode::InvalidConfig, "command template needs {in} and {out} placeholders");
    require(options_.timeout_s > 0.0, ErrorCode::InvalidConfig, "timeout must be positive");
  }

  std::string name() const override { return "external"; }

  AudioClip denoise(const AudioClip& clip, std::uint64_t seed) const override {
    detail::ScratchDir scratch(options_.scratch_dir.empty() ? default_scratch_dir()
                                                            : options_.scratch_dir);
    const auto in_path = scratch.path() / "in.wav";
    const auto out_path = scratch.path() / "out.wav";
    const auto log_path = scratch.path() / "log.txt";
    write_audio(clip, in_path);
    std::string command = template_;
    detail::replace_all(command, "{in}", detail::shell_quote(in_path.string()));
    detail::replace_all(command, "{out}", detail::shell_quote(out_path.string()));
    detail::replace_all(command, "{seed}", std::to_string(seed));
    detail::replace_all(command, "{rate}", std::to_string(clip.sample_rate()));

    const auto result = detail::run_shell(command, log_path, options_.timeout_s);
    if (result.timed_out) {
      fail(ErrorCode::Timeout, "external backend exceeded " + std::to_string(options_.timeout_s) +
                                   " s: " + template_);
    }
    if (result.exit_code != 0) {
      fail(ErrorCode::BackendFailure, "external backend exited with code " +
                                          std::to_string(result.exit_code) + ": " +
                                          detail::tail_of_file(log_path));
    }
    AudioClip out;
    try {
      out = read_audio(out_path);
    } catch (const Error& e) {
      fail(ErrorCode::BackendFailure, std::string("external backend output unreadable: ") + e.what());
    }
    if (out.sample_rate() != clip.sample_rate()) {
      warn("output at " + std::to_string(out.sample_rate()) + " Hz resampled to " +
           std::to_string(clip.sample_rate()) + " Hz");
      out = resample(out, clip.sample_rate());
    }
    if (out.size() != clip.size()) {
      warn("output length " + std::to_string(out.size()) + " fitted to " +
           std::to_string(clip.size()));
      auto samples = std::move(out).release();
      samples.resize(clip.size(), 0.0);
      out = AudioClip(std::move(samples), clip.sample_rate());
    }
    return out;
  }

  std::vector<std::string> warnings() const {
    std::lock_guard lock(mutex_);
    return warnings_;
  }

 private:
  void warn(std::string message) const {
    std::lock_guard lock(mutex_);
    warnings_.push_back(std::move(message));
  }

  std::string template_;
  ExternalOptions options_;
  mutable std::mutex mutex_;
  mutable std::vector<std::string> warnings_;
};

inline std::unique_ptr<ExternalBackend> external_backend(std::string command_template,
                                                         ExternalOptions options = {}) {
  return std::make_unique<ExternalBackend>(std::move(command_template), std::move(options));
}

}  // namespace biodeno
