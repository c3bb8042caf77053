#include <gtest/gtest.h>

#include "cli_runner.hpp"

using namespace biodeno;
using namespace biodeno::testing;

namespace {

void write_noisy_dir(const std::filesystem::path& dir, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto sub = dir / (i % 2 ? "a" : "b/c");
    std::filesystem::create_directories(sub);
    const auto clip = add(chirp(300, 2000, 1.0, 16000), white_noise(16000, 16000, 0.05, i));
    write_audio(clip, sub / ("f" + std::to_string(i) + ".wav"));
  }
}

}  // namespace

TEST(Cli, DenoiseSingleFile) {
  TempDir t;
  write_audio(add(chirp(300, 2000, 1.0, 16000), white_noise(16000, 16000, 0.05, 1)), t / "in.wav");
  const auto r = run_cli("denoise --in " + q(t / "in.wav") + " --out " + q(t / "out/den.wav"), t.path());
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read_audio(t / "out/den.wav").size(), 16000u);
  EXPECT_NE(r.out.find("seed 0"), std::string::npos);
}

TEST(Cli, DenoiseMissingInputExitsTwo) {
  TempDir t;
  const auto r = run_cli("denoise --in " + q(t / "nope.wav") + " --out " + q(t / "o.wav"), t.path());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("nope.wav"), std::string::npos);
  EXPECT_NE(r.err.find("\"code\":\"FileNotFound\""), std::string::npos);
}

TEST(Cli, DenoiseDirectoryMirrorsTree) {
  TempDir t;
  write_noisy_dir(t / "in", 5);
  const auto r = run_cli("denoise --jobs 2 --backend identity --in " + q(t / "in") + " --out " + q(t / "out"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto rel = std::filesystem::path(i % 2 ? "a" : "b/c") / ("f" + std::to_string(i) + ".wav");
    EXPECT_EQ(read_audio(t / "out" / rel.string()), read_audio(t / "in" / rel.string()));
  }
}

TEST(Cli, UsageErrorsExitOne) {
  TempDir t;
  EXPECT_EQ(run_cli("denoise --in x.wav", t.path()).exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate", t.path()).exit_code, 1);
  std::ofstream(t / "bad.cfg") << "gate.no_such_key = 1\n";
  write_audio(sine(440, 0.1, 16000), t / "in.wav");
  const auto r = run_cli("denoise --in " + q(t / "in.wav") + " --out " + q(t / "o.wav") + " --config " + q(t / "bad.cfg"), t.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("gate.no_such_key"), std::string::npos);
}

TEST(Cli, BackendFailureExitsThree) {
  TempDir t;
  write_audio(sine(440, 0.1, 16000), t / "in.wav");
  const auto r = run_cli("denoise --backend external --command 'exit 4 # {in} {out}' --in " + q(t / "in.wav") +
                             " --out " + q(t / "o.wav"), t.path());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("BackendFailure"), std::string::npos);
}

TEST(Cli, ConfigValuesAreApplied) {
  TempDir t;
  write_audio(add(chirp(300, 2000, 1.0, 16000), white_noise(16000, 16000, 0.05, 1)), t / "in.wav");
  std::ofstream(t / "id.cfg") << "gate.prop_decrease = 0\n";
  ASSERT_EQ(run_cli("denoise --config " + q(t / "id.cfg") + " --in " + q(t / "in.wav") + " --out " + q(t / "o.wav"), t.path()).exit_code, 0);
  const auto in = read_audio(t / "in.wav"), out = read_audio(t / "o.wav");
  for (std::size_t i = 0; i < in.size(); ++i) ASSERT_NEAR(in[i], out[i], 1e-6);
}

TEST(Cli, PseudoSilentInputGivesEmptyManifest) {
  TempDir t;
  std::filesystem::create_directories(t / "in");
  write_audio(AudioClip::zeros(32000, 16000), t / "in/s1.wav");
  write_audio(AudioClip::zeros(16000, 16000), t / "in/s2.wav");
  const auto r = run_cli("pseudo --in " + q(t / "in") + " --out " + q(t / "out") + " --rir-prob 0", t.path());
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto table = csv::parse(csv::read_text(t / "out/excerpts.csv"));
  EXPECT_TRUE(table.rows.empty());
  EXPECT_FALSE(table.header.empty());
}

TEST(Cli, PseudoIsDeterministicAndEchoesSeed) {
  TempDir t;
  write_noisy_dir(t / "in", 3);
  std::filesystem::create_directories(t / "rirs");
  write_audio(AudioClip({1.0, 0.4, 0.2, 0.1}, 16000), t / "rirs/r.wav");
  const std::string common = " --in " + q(t / "in") + " --rir-dir " + q(t / "rirs") + " --scales 1,2 --T 0.5 --seed 9";
  ASSERT_EQ(run_cli("pseudo --out " + q(t / "o1") + common, t.path()).exit_code, 0);
  ASSERT_EQ(run_cli("pseudo --jobs 3 --out " + q(t / "o2") + common, t.path()).exit_code, 0);
  const auto m1 = csv::read_text(t / "o1/excerpts.csv");
  EXPECT_EQ(m1, csv::read_text(t / "o2/excerpts.csv"));
  EXPECT_NE(m1.find("# seed=9"), std::string::npos);
  const auto table = csv::parse(m1);
  ASSERT_FALSE(table.rows.empty());
  for (const auto& row : table.rows) {
    const auto clip = read_audio(t / "o1" / row[table.column("path")]);
    EXPECT_EQ(clip.size(), 8000u);
    EXPECT_EQ(clip, read_audio(t / "o2" / row[table.column("path")]));
  }
}

TEST(Cli, BenchBuildEvalCompare) {
  TempDir t;
  write_asset_tree(t / "assets", Scenario::Underwater, 3, 2, 0.5, 16000);
  write_asset_tree(t / "assets", Scenario::Terrestrial, 2, 2, 0.5, 16000, 2);
  auto r = run_cli("bench-build --assets " + q(t / "assets") + " --mode fixed:0 --out " + q(t / "bench"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto bench = read_mixture_manifest(t / "bench/mixtures.csv");
  EXPECT_EQ(bench.records.size(), 5u);
  for (const auto& rec : bench.records) EXPECT_EQ(rec.spec.snr_db, 0.0);
  EXPECT_TRUE(std::filesystem::exists(t / "bench/assets.csv"));

  r = run_cli("bench-build --assets " + q(t / "bench/assets.csv") + " --out " + q(t / "bench_r"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto text = csv::read_text(t / "bench_r/mixtures.csv");
  EXPECT_NE(text.find("# snr_lo=-5"), std::string::npos);
  EXPECT_NE(text.find("# snr_hi=10"), std::string::npos);
  EXPECT_NE(text.find("# seed=0"), std::string::npos);

  r = run_cli("eval --backend identity --seeds 0..2 --mixtures " + q(t / "bench/mixtures.csv") + " --out " + q(t / "ev_id"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto rep = load_report(t / "ev_id/report.json");
  EXPECT_EQ(rep.subsets.at("snr_0").sisdri->median, 0.0);
  EXPECT_EQ(rep.seeds, (std::vector<std::uint64_t>{0, 1, 2}));

  r = run_cli("eval --backend gate --seeds 0,1,2 --mixtures " + q(t / "bench/mixtures.csv") + " --out " + q(t / "ev_g1"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run_cli("eval --backend gate --seeds 0..2 --jobs 3 --mixtures " + q(t / "bench/mixtures.csv") + " --out " + q(t / "ev_g2"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(csv::read_text(t / "ev_g1/report.json"), csv::read_text(t / "ev_g2/report.json"));

  r = run_cli("compare --a " + q(t / "ev_g1/report.json") + " --b " + q(t / "ev_g1/report.json") + " --out " + q(t / "cmp.json"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto cmp = nlohmann::json::parse(csv::read_text(t / "cmp.json"));
  for (const auto& [name, s] : cmp["subsets"].items()) EXPECT_EQ(s["median"].get<double>(), 0.0) << name;

  r = run_cli("compare --a " + q(t / "ev_g1/report.json") + " --b " + q(t / "ev_id/report.json"), t.path());
  EXPECT_EQ(r.exit_code, 0) << r.err;
}

TEST(Cli, ScanWritesManifest) {
  TempDir t;
  write_asset_tree(t / "assets", Scenario::Terrestrial, 2, 1, 0.1, 16000);
  const auto r = run_cli("scan --assets " + q(t / "assets") + " --out " + q(t / "m.csv"), t.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read_manifest_csv(t / "m.csv").size(), 3u);
}
