// Command-line front end: denoise, pseudo, bench-build, eval, compare, scan.
//
// Exit codes: 0 success, 1 usage/configuration, 2 I/O or data, 3 backend.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "biodeno/biodeno.hpp"

namespace fs = std::filesystem;
using namespace biodeno;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitBackend = 3;

const std::set<std::string> kConfigKeys = {
    "run.sample_rate",       "run.jobs",
    "stft.n_fft",            "stft.hop",
    "gate.stationary",       "gate.n_std_thresh",
    "gate.prop_decrease",    "gate.time_smooth_ms",
    "gate.freq_smooth_hz",   "gate.nonstat_time_constant_s",
    "peaks.min_height_rel",  "peaks.floor_dbfs",
    "peaks.min_distance_s",  "peaks.prominence_rel",
    "ensemble.scales",       "excerpt.T",
    "excerpt.rir_prob",      "excerpt.rir_dir",
    "external.command",      "external.timeout_s",
    "bench.snr_lo",          "bench.snr_hi",
    "bench.noise_rate_mode", "eval.bootstrap_n",
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendFailure:
    case ErrorCode::Timeout:
      return kExitBackend;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidFactor:
    case ErrorCode::InvalidRate:
    case ErrorCode::EmptyRirPool:
      return kExitUsage;
    default:
      return kExitIo;
  }
}

int report_error(ErrorCode code, const std::string& message) {
  const int exit_code = exit_code_for(code);
  std::cerr << "error: " << nlohmann::json{{"code", std::string(to_string(code))},
                                           {"exit", exit_code},
                                           {"message", message}}
                                .dump()
            << "\n";
  return exit_code;
}

void warn(const std::string& message) {
  std::cerr << "warning: " << nlohmann::json{{"message", message}}.dump() << "\n";
}

/// Options shared by every pipeline subcommand.
struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t jobs = default_jobs();
  CLI::Option* jobs_opt = nullptr;
  int sample_rate = 16000;
  CLI::Option* rate_opt = nullptr;

  void attach(CLI::App* app, bool with_rate) {
    app->add_option("--config", config_path, "Flat key = value configuration file");
    app->add_option("--seed", seed, "Global seed")->capture_default_str();
    jobs_opt = app->add_option("--jobs", jobs, "Worker threads (default: all cores)");
    if (with_rate) {
      rate_opt = app->add_option("--sample-rate", sample_rate, "Working sample rate in Hz")
                     ->capture_default_str();
    }
  }

  Config load() const {
    Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
    cfg.check_keys(kConfigKeys);
    return cfg;
  }

  std::size_t resolve_jobs(const Config& cfg) const {
    if (jobs_opt != nullptr && jobs_opt->count() > 0) return std::max<std::size_t>(1, jobs);
    return static_cast<std::size_t>(std::max<long long>(1, cfg.get_int("run.jobs", static_cast<long long>(jobs))));
  }

  int resolve_rate(const Config& cfg) const {
    if (rate_opt != nullptr && rate_opt->count() > 0) return sample_rate;
    return static_cast<int>(cfg.get_int("run.sample_rate", sample_rate));
  }
};

StftConfig stft_from(const Config& cfg) {
  StftConfig s;
  s.n_fft = static_cast<std::size_t>(cfg.get_int("stft.n_fft", static_cast<long long>(s.n_fft)));
  s.hop = static_cast<std::size_t>(cfg.get_int("stft.hop", static_cast<long long>(s.hop)));
  s.validate();
  return s;
}

GateConfig gate_from(const Config& cfg) {
  GateConfig g;
  g.stationary = cfg.get_bool("gate.stationary", g.stationary);
  g.n_std_thresh = cfg.get_double("gate.n_std_thresh", g.n_std_thresh);
  g.prop_decrease = cfg.get_double("gate.prop_decrease", g.prop_decrease);
  g.time_smooth_ms = cfg.get_double("gate.time_smooth_ms", g.time_smooth_ms);
  g.freq_smooth_hz = cfg.get_double("gate.freq_smooth_hz", g.freq_smooth_hz);
  g.nonstat_time_constant_s = cfg.get_double("gate.nonstat_time_constant_s", g.nonstat_time_constant_s);
  g.validate();
  return g;
}

PeakParams peaks_from(const Config& cfg) {
  PeakParams p;
  p.min_height_rel = cfg.get_double("peaks.min_height_rel", p.min_height_rel);
  p.floor_dbfs = cfg.get_double("peaks.floor_dbfs", p.floor_dbfs);
  p.min_distance_s = cfg.get_double("peaks.min_distance_s", p.min_distance_s);
  p.prominence_rel = cfg.get_double("peaks.prominence_rel", p.prominence_rel);
  p.validate();
  return p;
}

std::unique_ptr<DenoiserBackend> make_backend(const std::string& name, const Config& cfg,
                                              const std::optional<AudioClip>& noise_clip = std::nullopt) {
  if (name == "identity") return std::make_unique<IdentityBackend>();
  if (name == "gate") return std::make_unique<SpectralGateBackend>(stft_from(cfg), gate_from(cfg), noise_clip);
  if (name == "external") {
    const std::string command = cfg.get_string("external.command", "");
    require(!command.empty(), ErrorCode::InvalidConfig,
            "external backend needs --command or external.command in the config");
    ExternalOptions opts;
    opts.timeout_s = cfg.get_double("external.timeout_s", opts.timeout_s);
    return external_backend(command, opts);
  }
  fail(ErrorCode::InvalidConfig, "unknown backend '" + name + "' (expected gate, identity or external)");
}

std::vector<fs::path> wav_files_under(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && detail::has_wav_extension(e.path())) {
      files.push_back(e.path().lexically_relative(root));
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
  return files;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    require(!ec, ErrorCode::IoError, "cannot create " + p.parent_path().string() + ": " + ec.message());
  }
}

void print_backend_warnings(const DenoiserBackend& backend) {
  if (const auto* ext = dynamic_cast<const ExternalBackend*>(&backend)) {
    for (const auto& w : ext->warnings()) warn(w);
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const auto lo = csv::parse_u64(text.substr(0, range), "--seeds");
    const auto hi = csv::parse_u64(text.substr(range + 2), "--seeds");
    require(lo <= hi, ErrorCode::InvalidConfig, "--seeds range must be ascending");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (double v : Config::parse_double_list(text, "--seeds")) {
    require(v >= 0 && v == std::floor(v), ErrorCode::InvalidConfig, "--seeds expects integers");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  require(!seeds.empty(), ErrorCode::InvalidConfig, "--seeds is empty");
  return seeds;
}

// ---------------------------------------------------------------------------

struct DenoiseArgs {
  CommonArgs common;
  std::string in, out, backend = "gate", noise, command;
};

int run_denoise(const DenoiseArgs& a) {
  Config cfg = a.common.load();
  if (!a.command.empty()) cfg.set("external.command", a.command);
  std::error_code ec;
  require(fs::exists(a.in, ec), ErrorCode::FileNotFound, "input not found: " + a.in);
  std::optional<AudioClip> noise;
  if (!a.noise.empty()) noise = read_audio(a.noise);
  const auto backend = make_backend(a.backend, cfg, noise);
  const std::size_t jobs = a.common.resolve_jobs(cfg);

  std::vector<std::pair<fs::path, fs::path>> work;
  if (fs::is_directory(a.in)) {
    for (const auto& rel : wav_files_under(a.in)) work.emplace_back(fs::path(a.in) / rel, fs::path(a.out) / rel);
  } else {
    work.emplace_back(a.in, a.out);
  }
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto clip = read_audio(work[i].first);
    const auto out = run_backend(*backend, clip, a.common.seed);
    ensure_parent(work[i].second);
    write_audio(out, work[i].second);
  });
  print_backend_warnings(*backend);
  std::cout << "denoised " << work.size() << " file(s) with backend " << backend->name()
            << " (seed " << a.common.seed << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct PseudoArgs {
  CommonArgs common;
  std::string in, out, backend = "gate", command, rir_dir, scales;
  double T = 4.0, rir_prob = 0.5;
  CLI::Option* T_opt = nullptr;
  CLI::Option* rir_prob_opt = nullptr;
};

int run_pseudo(const PseudoArgs& a) {
  Config cfg = a.common.load();
  if (!a.command.empty()) cfg.set("external.command", a.command);
  if (!a.scales.empty()) cfg.set("ensemble.scales", a.scales);
  if (!a.rir_dir.empty()) cfg.set("excerpt.rir_dir", a.rir_dir);
  if (a.T_opt->count() > 0) cfg.set("excerpt.T", csv::format_double(a.T));
  if (a.rir_prob_opt->count() > 0) cfg.set("excerpt.rir_prob", csv::format_double(a.rir_prob));

  std::error_code ec;
  require(fs::exists(a.in, ec), ErrorCode::FileNotFound, "input not found: " + a.in);
  const int rate = a.common.resolve_rate(cfg);
  const std::size_t jobs = a.common.resolve_jobs(cfg);
  const auto backend = make_backend(a.backend, cfg);

  EnsembleConfig ens;
  ens.scale_factors = cfg.get_doubles("ensemble.scales", ens.scale_factors);
  ens.validate();
  ExcerptConfig exc;
  exc.T = cfg.get_double("excerpt.T", exc.T);
  exc.rir_prob = cfg.get_double("excerpt.rir_prob", exc.rir_prob);
  exc.peak_params = peaks_from(cfg);
  ens.silence = exc.peak_params;
  exc.validate();

  RirPool pool;
  const std::string rir_dir = cfg.get_string("excerpt.rir_dir", "");
  if (!rir_dir.empty()) pool = load_rir_pool(rir_dir, rate);
  if (exc.rir_prob > 0.0 && pool.empty()) {
    fail(ErrorCode::EmptyRirPool, rir_dir.empty()
                                      ? "--rir-prob > 0 needs --rir-dir (or pass --rir-prob 0)"
                                      : "no impulse responses under " + rir_dir);
  }

  std::vector<fs::path> inputs;
  fs::path in_root;
  if (fs::is_directory(a.in)) {
    in_root = a.in;
    inputs = wav_files_under(a.in);
  } else {
    in_root = fs::path(a.in).parent_path();
    inputs.push_back(fs::path(a.in).filename());
  }

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir / "excerpts", ec);
  require(!ec, ErrorCode::IoError, "cannot create " + (out_dir / "excerpts").string());

  std::vector<std::vector<Excerpt>> results(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    const std::string clip_id = inputs[i].generic_string();
    const auto clip = resample(read_audio(in_root / inputs[i]), rate);
    if (clip.empty()) return;
    results[i] = make_training_excerpts(clip, *backend, ens, exc, pool, a.common.seed, clip_id);
  });

  std::string manifest;
  manifest += "# seed=" + std::to_string(a.common.seed) + "\n";
  manifest += "# backend=" + backend->name() + "\n";
  manifest += "# T=" + csv::format_double(exc.T) + "\n";
  manifest += "# rir_prob=" + csv::format_double(exc.rir_prob) + "\n";
  std::string scales;
  for (double k : ens.scale_factors) scales += (scales.empty() ? "" : ",") + csv::format_double(k);
  manifest += "# scales=" + scales + "\n";
  manifest += "# sample_rate=" + std::to_string(rate) + "\n";
  manifest += csv::join_row({"excerpt_id", "source_id", "window_index", "path", "reverberated",
                             "rir_id", "duration_s", "sample_rate"});
  std::size_t total = 0, reverberated = 0, silent_sources = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string source = inputs[i].generic_string();
    if (results[i].empty()) {
      ++silent_sources;
      warn("no excerpts from " + source + " (silent after denoising)");
    }
    auto stem = inputs[i];
    stem.replace_extension();
    for (const auto& ex : results[i]) {
      const std::string excerpt_id = stem.generic_string() + "__" + std::to_string(ex.index);
      const std::string rel = "excerpts/" + excerpt_id + ".wav";
      ensure_parent(out_dir / rel);
      write_audio(ex.audio, out_dir / rel);
      manifest += csv::join_row({excerpt_id, source, std::to_string(ex.index), rel,
                                 ex.reverberated ? "1" : "0", ex.rir_id,
                                 csv::format_double(ex.audio.duration_s()),
                                 std::to_string(ex.audio.sample_rate())});
      ++total;
      reverberated += ex.reverberated ? 1 : 0;
    }
  }
  csv::write_text_atomic(out_dir / "excerpts.csv", manifest);
  print_backend_warnings(*backend);
  if (total == 0) warn("no excerpts were produced; every input was silent");
  std::cout << "wrote " << total << " excerpt(s) from " << inputs.size() << " input(s), "
            << reverberated << " reverberated, " << silent_sources << " silent input(s); seed "
            << a.common.seed << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  CommonArgs common;
  std::string assets, mode = "random", out;
  double snr_lo = -5.0, snr_hi = 10.0;
  CLI::Option* lo_opt = nullptr;
  CLI::Option* hi_opt = nullptr;
};

BenchmarkMode parse_mode(const std::string& text, const SnrPolicy& policy, std::uint64_t seed) {
  if (text == "random") return BenchmarkMode::random(policy, seed);
  if (text == "combinations") return BenchmarkMode::all_combinations(policy, seed);
  if (text.rfind("fixed:", 0) == 0) {
    const auto values = Config::parse_double_list(text.substr(6), "--mode");
    require(values.size() == 1, ErrorCode::InvalidConfig, "--mode fixed:<db> expects one level");
    return BenchmarkMode::fixed(values[0], seed);
  }
  fail(ErrorCode::InvalidConfig, "--mode must be random, fixed:<db> or combinations");
}

int run_bench_build(const BenchArgs& a) {
  Config cfg = a.common.load();
  if (a.lo_opt->count() > 0) cfg.set("bench.snr_lo", csv::format_double(a.snr_lo));
  if (a.hi_opt->count() > 0) cfg.set("bench.snr_hi", csv::format_double(a.snr_hi));
  const auto policy = SnrPolicy::uniform(cfg.get_double("bench.snr_lo", -5.0),
                                         cfg.get_double("bench.snr_hi", 10.0));
  const auto mode = parse_mode(a.mode, policy, a.common.seed);

  BenchmarkOptions options;
  options.mix.working_rate = a.common.resolve_rate(cfg);
  const std::string noise_mode = cfg.get_string("bench.noise_rate_mode", "timescale");
  require(noise_mode == "timescale" || noise_mode == "resample", ErrorCode::InvalidConfig,
          "bench.noise_rate_mode must be timescale or resample");
  options.mix.noise_rate_mode =
      noise_mode == "timescale" ? NoiseRateMode::TimeScale : NoiseRateMode::Resample;
  options.jobs = a.common.resolve_jobs(cfg);

  const fs::path out_dir(a.out);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out_dir.string());
  Manifest manifest;
  if (fs::is_directory(a.assets)) {
    auto scan = scan_assets(a.assets);
    for (const auto& w : scan.warnings) warn(w);
    manifest = std::move(scan.manifest);
    write_manifest_csv(manifest, out_dir / "assets.csv");
  } else {
    manifest = read_manifest_csv(a.assets);
  }
  const auto built = build_benchmark(manifest, mode, out_dir, options);
  std::cout << "built " << built.records.size() << " mixture(s), mode " << mode.name()
            << ", snr bounds [" << csv::format_double(policy.lo_db) << ", "
            << csv::format_double(policy.hi_db) << "] dB, seed " << a.common.seed << " -> "
            << (out_dir / "mixtures.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  CommonArgs common;
  std::string mixtures, backend = "gate", seeds = "0", out, command;
  std::size_t bootstrap_n = 1000;
  CLI::Option* bootstrap_opt = nullptr;
};

int run_eval(const EvalArgs& a) {
  Config cfg = a.common.load();
  if (!a.command.empty()) cfg.set("external.command", a.command);
  if (a.bootstrap_opt->count() > 0) cfg.set("eval.bootstrap_n", std::to_string(a.bootstrap_n));
  const auto mixtures = read_mixture_manifest(a.mixtures);
  const auto backend = make_backend(a.backend, cfg);
  EvalOptions options;
  options.bootstrap_n = static_cast<std::size_t>(cfg.get_int("eval.bootstrap_n", 1000));
  options.global_seed = a.common.seed;
  options.jobs = a.common.resolve_jobs(cfg);
  options.config_text = cfg.canonical_text();
  const auto report = run_evaluation(mixtures, *backend, parse_seeds(a.seeds), a.out, options);
  print_backend_warnings(*backend);
  std::cout << format_stat_table(report.subsets);
  std::cout << "excluded " << report.n_excluded << " excerpt run(s); seed " << a.common.seed
            << "; report -> " << (fs::path(a.out) / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string a, b, out;
  std::uint64_t seed = 0;
  std::size_t bootstrap_n = 1000;
};

int run_compare(const CompareArgs& args) {
  const auto ra = load_report(args.a);
  const auto rb = load_report(args.b);
  const auto diffs = compare_runs(ra, rb, args.bootstrap_n, args.seed);
  std::cout << format_comparison_table(diffs);
  if (!args.out.empty()) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["seed"] = args.seed;
    j["a"] = args.a;
    j["b"] = args.b;
    for (const auto& [name, s] : diffs) j["subsets"][name] = stat_to_json(s);
    ensure_parent(args.out);
    csv::write_text_atomic(args.out, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ScanArgs {
  std::string assets, out;
};

int run_scan(const ScanArgs& a) {
  const auto scan = scan_assets(a.assets);
  for (const auto& w : scan.warnings) warn(w);
  ensure_parent(a.out);
  write_manifest_csv(scan.manifest, a.out);
  std::cout << "cataloged " << scan.manifest.size() << " asset(s), skipped "
            << scan.warnings.size() << " -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Animal-vocalization denoising toolkit: pseudo-clean targets, benchmarks, SI-SDR evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  DenoiseArgs denoise_args;
  auto* denoise_cmd = app.add_subcommand("denoise", "Denoise a WAV file or a directory tree");
  denoise_cmd->add_option("--in", denoise_args.in, "Input WAV or directory")->required();
  denoise_cmd->add_option("--out", denoise_args.out, "Output WAV or directory")->required();
  denoise_cmd->add_option("--backend", denoise_args.backend)
      ->check(CLI::IsMember({"gate", "identity", "external"}))
      ->capture_default_str();
  denoise_cmd->add_option("--noise", denoise_args.noise, "Noise-only WAV for the stationary gate profile");
  denoise_cmd->add_option("--command", denoise_args.command, "External command template with {in} and {out}");
  denoise_args.common.attach(denoise_cmd, false);

  PseudoArgs pseudo_args;
  auto* pseudo_cmd = app.add_subcommand("pseudo", "Generate pseudo-clean training excerpts");
  pseudo_cmd->add_option("--in", pseudo_args.in, "Input WAV or directory")->required();
  pseudo_cmd->add_option("--out", pseudo_args.out, "Output directory")->required();
  pseudo_cmd->add_option("--backend", pseudo_args.backend)
      ->check(CLI::IsMember({"gate", "identity", "external"}))
      ->capture_default_str();
  pseudo_cmd->add_option("--command", pseudo_args.command, "External command template");
  pseudo_cmd->add_option("--scales", pseudo_args.scales, "Ensemble time-scale factors, e.g. 1,2,3,4");
  pseudo_args.T_opt = pseudo_cmd->add_option("--T", pseudo_args.T, "Excerpt length in seconds")->capture_default_str();
  pseudo_cmd->add_option("--rir-dir", pseudo_args.rir_dir, "Directory of impulse-response WAVs");
  pseudo_args.rir_prob_opt =
      pseudo_cmd->add_option("--rir-prob", pseudo_args.rir_prob, "Probability of reverberating an excerpt")
          ->capture_default_str();
  pseudo_args.common.attach(pseudo_cmd, true);

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench-build", "Synthesize an SNR-controlled benchmark");
  bench_cmd->add_option("--assets", bench_args.assets, "Asset tree or asset manifest CSV")->required();
  bench_cmd->add_option("--mode", bench_args.mode, "random | fixed:<db> | combinations")->capture_default_str();
  bench_args.lo_opt = bench_cmd->add_option("--snr-lo", bench_args.snr_lo)->capture_default_str();
  bench_args.hi_opt = bench_cmd->add_option("--snr-hi", bench_args.snr_hi)->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "Output directory")->required();
  bench_args.common.attach(bench_cmd, true);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a denoiser on a mixture manifest");
  eval_cmd->add_option("--mixtures", eval_args.mixtures, "Mixture manifest CSV")->required();
  eval_cmd->add_option("--backend", eval_args.backend)
      ->check(CLI::IsMember({"gate", "identity", "external"}))
      ->capture_default_str();
  eval_cmd->add_option("--command", eval_args.command, "External command template");
  eval_cmd->add_option("--seeds", eval_args.seeds, "Seed list (0,1,2) or range (0..9)")->capture_default_str();
  eval_args.bootstrap_opt = eval_cmd->add_option("--bootstrap-n", eval_args.bootstrap_n)->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "Report directory")->required();
  eval_args.common.attach(eval_cmd, false);

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Paired SI-SDR differences between two reports");
  compare_cmd->add_option("--a", compare_args.a, "Report JSON")->required();
  compare_cmd->add_option("--b", compare_args.b, "Report JSON")->required();
  compare_cmd->add_option("--out", compare_args.out, "Optional JSON output");
  compare_cmd->add_option("--seed", compare_args.seed)->capture_default_str();
  compare_cmd->add_option("--bootstrap-n", compare_args.bootstrap_n)->capture_default_str();

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "Catalog an asset tree into a manifest CSV");
  scan_cmd->add_option("--assets", scan_args.assets, "Asset root")->required();
  scan_cmd->add_option("--out", scan_args.out, "Manifest CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error(ErrorCode::InvalidConfig, e.what());
  }

  try {
    if (*denoise_cmd) return run_denoise(denoise_args);
    if (*pseudo_cmd) return run_pseudo(pseudo_args);
    if (*bench_cmd) return run_bench_build(bench_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*compare_cmd) return run_compare(compare_args);
    if (*scan_cmd) return run_scan(scan_args);
  } catch (const Error& e) {
    return report_error(e.code(), e.detail());
  } catch (const fs::filesystem_error& e) {
    return report_error(ErrorCode::IoError, e.what());
  } catch (const std::exception& e) {
    return report_error(ErrorCode::InternalError, e.what());
  }
  return kExitUsage;
}
