#include <gtest/gtest.h>

#include "support.hpp"

using namespace biodeno;
using namespace biodeno::testing;

namespace {

// Returns the clean reference for any mixture it was built with.
class OracleBackend final : public DenoiserBackend {
 public:
  explicit OracleBackend(const MixtureManifest& m) {
    for (const auto& r : m.records) {
      pairs_.emplace_back(read_audio(m.resolve(r.mix_path)), read_audio(m.resolve(r.clean_path)));
    }
  }
  std::string name() const override { return "oracle"; }
  AudioClip denoise(const AudioClip& clip, std::uint64_t) const override {
    for (const auto& [mix, clean] : pairs_) {
      if (mix == clip) return clean;
    }
    fail(ErrorCode::InternalError, "unknown mixture");
  }

 private:
  std::vector<std::pair<AudioClip, AudioClip>> pairs_;
};

// Fails on a chosen mixture.
class FlakyBackend final : public DenoiserBackend {
 public:
  explicit FlakyBackend(std::size_t bad_len) : bad_len_(bad_len) {}
  std::string name() const override { return "flaky"; }
  AudioClip denoise(const AudioClip& clip, std::uint64_t) const override {
    if (clip.size() == bad_len_) fail(ErrorCode::BackendFailure, "simulated failure");
    return clip;
  }

 private:
  std::size_t bad_len_;
};

struct Bench {
  TempDir assets, out;
  MixtureManifest mixtures;

  explicit Bench(BenchmarkMode mode = BenchmarkMode::fixed(0.0, 0)) {
    write_asset_tree(assets.path(), Scenario::Underwater, 4, 3, 0.5, 16000);
    write_asset_tree(assets.path(), Scenario::Terrestrial, 3, 2, 0.5, 16000, 2);
    build_benchmark(scan_assets(assets.path()).manifest, mode, out / "bench");
    mixtures = read_mixture_manifest(out / "bench" / "mixtures.csv");
  }
};

}  // namespace

TEST(ScanAssets, ThreeFilesSortedAndDeterministic) {
  TempDir dir;
  std::filesystem::create_directories(dir / "underwater/voc");
  std::filesystem::create_directories(dir / "underwater/noise");
  write_audio(sine(300, 0.2, 16000), dir / "underwater/voc/b.wav");
  write_audio(sine(300, 0.3, 16000), dir / "underwater/voc/a.wav");
  write_audio(white_noise(800, 8000, 0.1, 1), dir / "underwater/noise/n.WAV");
  std::ofstream(dir / "underwater/voc/readme.txt") << "ignored";
  const auto r = scan_assets(dir.path());
  ASSERT_EQ(r.manifest.size(), 3u);
  EXPECT_EQ(r.manifest.entries()[0].asset_id, "underwater/noise/n.WAV");
  EXPECT_EQ(r.manifest.entries()[1].asset_id, "underwater/voc/a.wav");
  EXPECT_EQ(r.manifest.entries()[2].asset_id, "underwater/voc/b.wav");
  EXPECT_EQ(r.manifest.entries()[0].sample_rate, 8000);
  EXPECT_NEAR(r.manifest.entries()[1].duration_s, 0.3, 1e-9);
  EXPECT_EQ(format_manifest_csv(r.manifest), format_manifest_csv(scan_assets(dir.path()).manifest));
}

TEST(ScanAssets, UnreadableFilesBecomeWarnings) {
  TempDir dir;
  std::filesystem::create_directories(dir / "terrestrial/noise");
  std::filesystem::create_directories(dir / "terrestrial/voc");
  write_audio(sine(300, 0.2, 16000), dir / "terrestrial/voc/ok.wav");
  std::ofstream(dir / "terrestrial/noise/broken.wav") << "garbage";
  const auto r = scan_assets(dir.path());
  EXPECT_EQ(r.manifest.size(), 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("broken.wav"), std::string::npos);
}

TEST(ScanAssets, EmptyAndMissingRoots) {
  TempDir dir;
  try {
    scan_assets(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRoot);
  }
  try {
    scan_assets(dir / "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
}

TEST(ScanAssets, BenchmarkShapedTree) {
  TempDir dir;
  write_asset_tree(dir.path(), Scenario::Underwater, 11, 26, 0.05, 8000);
  write_asset_tree(dir.path(), Scenario::Terrestrial, 51, 20, 0.05, 8000);
  const auto r = scan_assets(dir.path());
  EXPECT_EQ(r.manifest.size(), 108u);
  EXPECT_EQ(r.manifest.select(Role::Voc, Scenario::Terrestrial).size(), 51u);
}

TEST(ManifestCsv, RoundTripWithRelativePaths) {
  TempDir dir;
  write_asset_tree(dir.path(), Scenario::Underwater, 2, 1, 0.1, 16000);
  const auto m = scan_assets(dir.path()).manifest;
  write_manifest_csv(m, dir / "assets.csv");
  const auto back = read_manifest_csv(dir / "assets.csv");
  EXPECT_EQ(back.entries(), m.entries());

  std::ofstream(dir / "rel.csv") << "asset_id,path,role,scenario,duration_s,sample_rate\n"
                                 << "v1,underwater/voc/000.wav,voc,underwater,0.1,16000\n";
  const auto rel = read_manifest_csv(dir / "rel.csv");
  EXPECT_TRUE(std::filesystem::exists(rel.find("v1").path));
}

TEST(RunEvaluation, IdentityGivesZeroImprovement) {
  Bench b;
  const auto report = run_evaluation(b.mixtures, IdentityBackend{}, {0, 1, 2}, b.out / "eval");
  EXPECT_EQ(report.rows.size(), 7u * 3u);
  ASSERT_TRUE(report.subsets.count("snr_0"));
  const auto& s = *report.subsets.at("snr_0").sisdri;
  EXPECT_EQ(s.median, 0.0);
  EXPECT_EQ(s.ci_low, 0.0);
  EXPECT_EQ(s.ci_high, 0.0);
  EXPECT_EQ(s.n, 7u);
  EXPECT_TRUE(report.subsets.count("snr_0/underwater"));
  EXPECT_TRUE(report.subsets.count("snr_0/terrestrial"));
  for (const char* f : {"report.json", "scores.csv", "report.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(b.out / "eval" / f)) << f;
  }
}

TEST(RunEvaluation, OracleHitsCap) {
  Bench b;
  const auto report = run_evaluation(b.mixtures, OracleBackend(b.mixtures), {0}, b.out / "eval");
  EXPECT_EQ(report.subsets.at("snr_0").sisdr->median, 100.0);
}

TEST(RunEvaluation, GateImproves) {
  Bench b;
  const auto report = run_evaluation(b.mixtures, SpectralGateBackend{}, {0}, b.out / "eval");
  EXPECT_GT(report.subsets.at("snr_0").sisdri->median, 0.0);
}

TEST(RunEvaluation, DeterministicAndJobIndependent) {
  Bench b;
  EvalOptions o1, o4;
  o4.jobs = 4;
  run_evaluation(b.mixtures, SpectralGateBackend{}, {0, 1}, b.out / "e1", o1);
  run_evaluation(b.mixtures, SpectralGateBackend{}, {0, 1}, b.out / "e2", o4);
  for (const char* f : {"report.json", "scores.csv", "report.txt"}) {
    EXPECT_EQ(csv::read_text(b.out / "e1" / f), csv::read_text(b.out / "e2" / f)) << f;
  }
}

TEST(RunEvaluation, FailuresAreExcludedAndCounted) {
  Bench b;
  const auto len = read_audio(b.mixtures.resolve(b.mixtures.records[0].mix_path)).size();
  std::size_t same_len = 0;
  for (const auto& r : b.mixtures.records) {
    same_len += read_audio(b.mixtures.resolve(r.mix_path)).size() == len ? 1 : 0;
  }
  const auto report = run_evaluation(b.mixtures, FlakyBackend(len), {0, 1}, b.out / "eval");
  EXPECT_EQ(report.n_excluded, 2 * same_len);
  EXPECT_EQ(report.subsets.at("snr_0").excluded, 2 * same_len);
  EXPECT_EQ(report.subsets.at("snr_0").sisdri->n, 7u - same_len);
  EXPECT_NE(csv::read_text(b.out / "eval" / "scores.csv").find("failed"), std::string::npos);
}

TEST(RunEvaluation, MissingReference) {
  Bench b;
  std::filesystem::remove(b.mixtures.resolve(b.mixtures.records[2].clean_path));
  try {
    run_evaluation(b.mixtures, IdentityBackend{}, {0}, b.out / "eval");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingReference);
  }
}

TEST(Report, JsonRoundTrip) {
  Bench b;
  const auto report = run_evaluation(b.mixtures, SpectralGateBackend{}, {3, 4}, b.out / "eval");
  const auto back = load_report(b.out / "eval" / "report.json");
  EXPECT_EQ(back.schema_version, kReportSchemaVersion);
  EXPECT_EQ(back.label, report.label);
  EXPECT_EQ(back.seeds, report.seeds);
  EXPECT_EQ(back.rows.size(), report.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].sisdr_db, report.rows[i].sisdr_db);
    EXPECT_EQ(back.rows[i].mix_id, report.rows[i].mix_id);
  }
  for (const auto& [name, s] : report.subsets) {
    EXPECT_EQ(back.subsets.at(name).sisdri, s.sisdri) << name;
  }
}

TEST(CompareRuns, SelfIsZero) {
  Bench b;
  const auto report = run_evaluation(b.mixtures, SpectralGateBackend{}, {0, 1}, b.out / "eval");
  for (const auto& [name, d] : compare_runs(report, report)) {
    EXPECT_EQ(d.median, 0.0) << name;
    EXPECT_EQ(d.ci_low, 0.0);
    EXPECT_EQ(d.ci_high, 0.0);
  }
}

TEST(CompareRuns, ShiftedByOneDb) {
  Bench b;
  const auto a = run_evaluation(b.mixtures, SpectralGateBackend{}, {0}, b.out / "eval");
  auto shifted = a;
  for (auto& r : shifted.rows) r.sisdr_db += 1.0;
  const auto d = compare_runs(a, shifted);
  EXPECT_NEAR(d.at("snr_0").median, -1.0, 1e-12);
}

TEST(CompareRuns, RecomputedFromScoreCsvs) {
  Bench b;
  const auto a = run_evaluation(b.mixtures, SpectralGateBackend{}, {0, 1}, b.out / "ea");
  GateConfig g;
  g.n_std_thresh = 0.5;
  const auto c = run_evaluation(b.mixtures, SpectralGateBackend({}, g), {0, 1}, b.out / "ec");
  const auto diffs = compare_runs(a, c, 1000, 0);

  // Independent pass over the two CSV files.
  auto read_scores = [](const std::filesystem::path& p) {
    std::map<std::string, std::vector<double>> by_id;
    const auto t = csv::parse(csv::read_text(p));
    for (const auto& row : t.rows) by_id[row[0]].push_back(csv::parse_double(row[2], "sisdr"));
    return by_id;
  };
  const auto sa = read_scores(b.out / "ea" / "scores.csv");
  const auto sc = read_scores(b.out / "ec" / "scores.csv");
  std::vector<double> d;
  for (const auto& [id, va] : sa) {
    const auto& vc = sc.at(id);
    d.push_back((va[0] + va[1]) / 2.0 - (vc[0] + vc[1]) / 2.0);
  }
  std::sort(d.begin(), d.end());
  const double median = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
  EXPECT_NEAR(diffs.at("snr_0").median, median, 1e-9);
}

TEST(CompareRuns, MismatchedReports) {
  Bench b;
  const auto a = run_evaluation(b.mixtures, IdentityBackend{}, {0}, b.out / "ea");
  const auto c = run_evaluation(b.mixtures, IdentityBackend{}, {1}, b.out / "ec");
  try {
    compare_runs(a, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ManifestMismatch);
  }
}

TEST(Config, ParsesAndValidates) {
  const auto cfg = Config::parse("# comment\ngate.n_std_thresh = 2.5\nensemble.scales = 1, 2\nflag = true # trailing\n");
  EXPECT_EQ(cfg.get_double("gate.n_std_thresh", 0.0), 2.5);
  EXPECT_EQ(cfg.get_doubles("ensemble.scales", {}), (std::vector<double>{1.0, 2.0}));
  EXPECT_TRUE(cfg.get_bool("flag", false));
  EXPECT_EQ(cfg.get_int("missing", 7), 7);
  EXPECT_THROW(cfg.check_keys({"gate.n_std_thresh"}), Error);
  EXPECT_THROW(Config::parse("no equals sign"), Error);
  EXPECT_THROW(Config::parse("x = abc").get_double("x", 0.0), Error);
}

TEST(Csv, QuotingRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", ""};
  auto line = csv::join_row(fields);
  ASSERT_EQ(line.back(), '\n');
  line.pop_back();
  EXPECT_EQ(csv::split_row(line), fields);
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::parse_double(csv::format_double(1.0 / 3.0), "x"), 1.0 / 3.0);
}

TEST(Random, KeyedStreamsAreIndependentAndStable) {
  EXPECT_EQ(derive_seed(0, "snr"), derive_seed(0, "snr"));
  EXPECT_NE(derive_seed(0, "snr"), derive_seed(0, "rir"));
  EXPECT_NE(derive_seed(0, "snr"), derive_seed(1, "snr"));
  EXPECT_NE(derive_seed(0, "rir", "a", 0), derive_seed(0, "rir", "a", 1));
  RandomStream r(3);
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_int(2, 5);
    EXPECT_GE(v, 2u);
    EXPECT_LE(v, 5u);
  }
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) fail(ErrorCode::IoError, "item " + std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("item 7"), std::string::npos);
  }
}
