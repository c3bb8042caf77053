#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "biodeno/backend.hpp"
#include "biodeno/csv.hpp"
#include "biodeno/error.hpp"
#include "biodeno/metrics.hpp"
#include "biodeno/mixing.hpp"
#include "biodeno/parallel.hpp"
#include "biodeno/random.hpp"
#include "biodeno/version.hpp"
#include "biodeno/wav_io.hpp"

namespace biodeno {

struct ScoreRow {
  std::string mix_id;
  std::string scenario;
  std::uint64_t seed = 0;
  double sisdr_db = std::numeric_limits<double>::quiet_NaN();
  double sisdri_db = std::numeric_limits<double>::quiet_NaN();
  bool ok = true;
  std::string message;
};

struct SubsetSummary {
  std::optional<AggregateStat> sisdr;
  std::optional<AggregateStat> sisdri;
  std::size_t excluded = 0;
};

struct Provenance {
  std::uint64_t global_seed = 0;
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::string backend;
};

/// Per-excerpt scores plus per-subset aggregates. Subsets are the manifest
/// label (e.g. "small") and "<label>/<scenario>".
struct EvalReport {
  int schema_version = kReportSchemaVersion;
  Provenance provenance;
  std::string label;
  std::vector<std::uint64_t> seeds;
  std::size_t bootstrap_n = 1000;
  std::vector<ScoreRow> rows;
  std::map<std::string, SubsetSummary> subsets;
  std::size_t n_excluded = 0;
};

inline std::string hex_digest(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(text)));
  return buf;
}

inline std::vector<std::string> subsets_of(const std::string& label, const std::string& scenario) {
  return {label, label + "/" + scenario};
}

inline std::vector<ExcerptScore> ok_scores(const std::vector<ScoreRow>& rows,
                                           const std::string& subset, const std::string& label) {
  std::vector<ExcerptScore> out;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    if (subset != label && subset != label + "/" + r.scenario) continue;
    out.push_back({r.mix_id, r.sisdr_db, r.sisdri_db, r.seed});
  }
  return out;
}

/// Aggregates computed from the per-excerpt rows alone.
inline std::map<std::string, SubsetSummary> summarize_rows(const std::vector<ScoreRow>& rows,
                                                           const std::string& label,
                                                           std::size_t bootstrap_n,
                                                           std::uint64_t seed) {
  std::map<std::string, SubsetSummary> out;
  for (const auto& r : rows) {
    for (const auto& s : subsets_of(label, r.scenario)) {
      auto& summary = out[s];
      if (!r.ok) ++summary.excluded;
    }
  }
  for (auto& [name, summary] : out) {
    const auto scores = ok_scores(rows, name, label);
    if (scores.empty()) continue;
    const std::uint64_t stream = derive_seed(seed, name);
    summary.sisdr = aggregate(scores, Metric::SiSdr, bootstrap_n, stream);
    summary.sisdri = aggregate(scores, Metric::SiSdrI, bootstrap_n, stream);
  }
  return out;
}

inline constexpr const char* kScoreColumns[] = {"mix_id", "seed", "sisdr_db", "sisdri_db", "status"};

inline std::string format_scores_csv(const EvalReport& report) {
  std::string out = csv::join_row({std::begin(kScoreColumns), std::end(kScoreColumns)});
  for (const auto& r : report.rows) {
    out += csv::join_row({r.mix_id, std::to_string(r.seed),
                          r.ok ? csv::format_double(r.sisdr_db) : "",
                          r.ok ? csv::format_double(r.sisdri_db) : "", r.ok ? "ok" : "failed"});
  }
  return out;
}

/// Parses a per-excerpt CSV. Scenario labels are not part of the CSV and are
/// taken from `scenario_of` (mix_id -> scenario).
inline std::vector<ScoreRow> parse_scores_csv(std::string_view text,
                                              const std::map<std::string, std::string>& scenario_of) {
  const auto table = csv::parse(text);
  const auto c_id = table.column("mix_id"), c_seed = table.column("seed"),
             c_sdr = table.column("sisdr_db"), c_sdri = table.column("sisdri_db"),
             c_status = table.column("status");
  std::vector<ScoreRow> rows;
  for (const auto& row : table.rows) {
    ScoreRow r;
    r.mix_id = row[c_id];
    auto it = scenario_of.find(r.mix_id);
    r.scenario = it == scenario_of.end() ? "" : it->second;
    r.seed = csv::parse_u64(row[c_seed], "seed");
    r.ok = row[c_status] == "ok";
    if (r.ok) {
      r.sisdr_db = csv::parse_double(row[c_sdr], "sisdr_db");
      r.sisdri_db = csv::parse_double(row[c_sdri], "sisdri_db");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json stat_to_json(const std::optional<AggregateStat>& s) {
  if (!s) return nullptr;
  return {{"median", s->median}, {"ci_low", s->ci_low}, {"ci_high", s->ci_high},
          {"mad", s->mad},       {"n", s->n}};
}

inline std::optional<AggregateStat> stat_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return AggregateStat{j.at("median").get<double>(), j.at("ci_low").get<double>(),
                       j.at("ci_high").get<double>(), j.at("mad").get<double>(),
                       j.at("n").get<std::size_t>()};
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["schema_version"] = report.schema_version;
  j["provenance"] = {{"global_seed", report.provenance.global_seed},
                     {"config_digest", report.provenance.config_digest},
                     {"tool_version", report.provenance.tool_version},
                     {"backend", report.provenance.backend}};
  j["label"] = report.label;
  j["seeds"] = report.seeds;
  j["bootstrap_n"] = report.bootstrap_n;
  j["n_excluded"] = report.n_excluded;
  nlohmann::json subsets = nlohmann::json::object();
  for (const auto& [name, s] : report.subsets) {
    subsets[name] = {{"sisdr", stat_to_json(s.sisdr)},
                     {"sisdri", stat_to_json(s.sisdri)},
                     {"excluded", s.excluded}};
  }
  j["subsets"] = subsets;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"mix_id", r.mix_id}, {"scenario", r.scenario}, {"seed", r.seed},
                          {"status", r.ok ? "ok" : "failed"}};
    row["sisdr_db"] = r.ok ? nlohmann::json(r.sisdr_db) : nlohmann::json(nullptr);
    row["sisdri_db"] = r.ok ? nlohmann::json(r.sisdri_db) : nlohmann::json(nullptr);
    if (!r.message.empty()) row["message"] = r.message;
    rows.push_back(std::move(row));
  }
  j["excerpts"] = rows;
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.schema_version = j.at("schema_version").get<int>();
  require(r.schema_version == kReportSchemaVersion, ErrorCode::CorruptHeader,
          "unsupported report schema version " + std::to_string(r.schema_version));
  const auto& p = j.at("provenance");
  r.provenance = {p.at("global_seed").get<std::uint64_t>(), p.at("config_digest").get<std::string>(),
                  p.at("tool_version").get<std::string>(), p.at("backend").get<std::string>()};
  r.label = j.at("label").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.bootstrap_n = j.at("bootstrap_n").get<std::size_t>();
  r.n_excluded = j.at("n_excluded").get<std::size_t>();
  for (const auto& [name, s] : j.at("subsets").items()) {
    r.subsets[name] = {stat_from_json(s.at("sisdr")), stat_from_json(s.at("sisdri")),
                       s.at("excluded").get<std::size_t>()};
  }
  for (const auto& row : j.at("excerpts")) {
    ScoreRow sr;
    sr.mix_id = row.at("mix_id").get<std::string>();
    sr.scenario = row.at("scenario").get<std::string>();
    sr.seed = row.at("seed").get<std::uint64_t>();
    sr.ok = row.at("status").get<std::string>() == "ok";
    if (sr.ok) {
      sr.sisdr_db = row.at("sisdr_db").get<double>();
      sr.sisdri_db = row.at("sisdri_db").get<double>();
    }
    if (row.contains("message")) sr.message = row.at("message").get<std::string>();
    r.rows.push_back(std::move(sr));
  }
  return r;
}

inline EvalReport load_report(const std::filesystem::path& path) {
  const auto text = csv::read_text(path);
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptHeader, path.string() + ": " + e.what());
  }
}

inline std::string format_stat_table(const std::map<std::string, SubsetSummary>& subsets) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-7s %9s %9s %9s %8s %6s\n", "subset", "metric",
                "median", "ci_low", "ci_high", "mad", "n");
  out += line;
  for (const auto& [name, s] : subsets) {
    for (const auto& [metric, stat] : {std::pair{"sisdr", s.sisdr}, std::pair{"sisdri", s.sisdri}}) {
      if (!stat) {
        std::snprintf(line, sizeof line, "%-28s %-7s %9s\n", name.c_str(), metric, "n/a");
      } else {
        std::snprintf(line, sizeof line, "%-28s %-7s %9.3f %9.3f %9.3f %8.3f %6zu\n",
                      name.c_str(), metric, stat->median, stat->ci_low, stat->ci_high, stat->mad,
                      stat->n);
      }
      out += line;
    }
  }
  return out;
}

struct EvalOptions {
  std::size_t bootstrap_n = 1000;
  std::uint64_t global_seed = 0;
  std::size_t jobs = 1;
  /// Free-form description of the run configuration, hashed into the report.
  std::string config_text;
};

/// Denoises every mixture once per seed, scores SI-SDR and SI-SDRi against
/// the stored clean reference, and writes report.json, scores.csv and
/// report.txt to `out_dir`. Backend failures exclude the excerpt from the
/// aggregates and are counted.
inline EvalReport run_evaluation(const MixtureManifest& mixtures, const DenoiserBackend& backend,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::filesystem::path& out_dir,
                                 const EvalOptions& options = {}) {
  require(!seeds.empty(), ErrorCode::InvalidConfig, "at least one seed is required");
  require(!mixtures.records.empty(), ErrorCode::EmptyScores, "mixture manifest is empty");
  EvalReport report;
  report.label = mixtures.label();
  report.seeds = seeds;
  report.bootstrap_n = options.bootstrap_n;
  report.provenance.global_seed = options.global_seed;
  report.provenance.backend = backend.name();
  report.provenance.config_digest =
      hex_digest(options.config_text + "\nbackend=" + backend.name() +
                 "\nbootstrap_n=" + std::to_string(options.bootstrap_n));

  const std::size_t n_seeds = seeds.size();
  report.rows.resize(mixtures.records.size() * n_seeds);
  parallel_for(mixtures.records.size(), options.jobs, [&](std::size_t i) {
    const auto& rec = mixtures.records[i];
    const auto clean_path = mixtures.resolve(rec.clean_path);
    std::error_code ec;
    require(std::filesystem::is_regular_file(clean_path, ec), ErrorCode::MissingReference,
            "clean reference for " + rec.mix_id + " not found at " + clean_path.string());
    const auto clean = read_audio(clean_path);
    const auto mix = read_audio(mixtures.resolve(rec.mix_path));
    for (std::size_t s = 0; s < n_seeds; ++s) {
      ScoreRow& row = report.rows[i * n_seeds + s];
      row.mix_id = rec.mix_id;
      row.scenario = std::string(to_string(rec.scenario));
      row.seed = seeds[s];
      try {
        const auto est = run_backend(backend, mix, seeds[s]);
        row.sisdr_db = si_sdr(est, clean);
        row.sisdri_db = row.sisdr_db - si_sdr(mix, clean);
        row.ok = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BackendFailure && e.code() != ErrorCode::Timeout) throw;
        row.ok = false;
        row.message = e.what();
      }
    }
  });

  for (const auto& r : report.rows) report.n_excluded += r.ok ? 0 : 1;
  report.subsets =
      summarize_rows(report.rows, report.label, options.bootstrap_n, options.global_seed);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  const std::string scores_csv = format_scores_csv(report);
  csv::write_text_atomic(out_dir / "scores.csv", scores_csv);
  csv::write_text_atomic(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  csv::write_text_atomic(out_dir / "report.txt", format_stat_table(report.subsets));

  // The stored aggregates must be reproducible from the stored table alone.
  std::map<std::string, std::string> scenario_of;
  for (const auto& rec : mixtures.records) scenario_of[rec.mix_id] = std::string(to_string(rec.scenario));
  const auto recomputed = summarize_rows(parse_scores_csv(scores_csv, scenario_of), report.label,
                                         options.bootstrap_n, options.global_seed);
  for (const auto& [name, s] : report.subsets) {
    const auto it = recomputed.find(name);
    require(it != recomputed.end() && it->second.sisdr == s.sisdr &&
                it->second.sisdri == s.sisdri && it->second.excluded == s.excluded,
            ErrorCode::InternalError, "aggregates for subset " + name +
                                          " do not match the per-excerpt table");
  }
  return report;
}

/// Paired SI-SDR differences (a - b) per subset. Both reports must cover the
/// same excerpts and seeds; excerpts that failed in either are left out.
inline std::map<std::string, AggregateStat> compare_runs(const EvalReport& a, const EvalReport& b,
                                                         std::size_t bootstrap_n = 1000,
                                                         std::uint64_t seed = 0) {
  const auto keys = [](const EvalReport& r) {
    std::set<std::pair<std::string, std::uint64_t>> k;
    for (const auto& row : r.rows) k.emplace(row.mix_id, row.seed);
    return k;
  };
  require(a.label == b.label && keys(a) == keys(b), ErrorCode::ManifestMismatch,
          "reports cover different mixtures or seeds");
  std::set<std::string> failed;
  for (const auto* r : {&a, &b}) {
    for (const auto& row : r->rows) {
      if (!row.ok) failed.insert(row.mix_id);
    }
  }
  const auto usable = [&](const EvalReport& r) {
    std::vector<ScoreRow> rows;
    for (const auto& row : r.rows) {
      if (failed.count(row.mix_id) == 0) rows.push_back(row);
    }
    return rows;
  };
  const auto rows_a = usable(a), rows_b = usable(b);
  std::set<std::string> subset_names;
  for (const auto& row : rows_a) {
    for (const auto& s : subsets_of(a.label, row.scenario)) subset_names.insert(s);
  }
  std::map<std::string, AggregateStat> out;
  for (const auto& name : subset_names) {
    out[name] = paired_differences(ok_scores(rows_a, name, a.label), ok_scores(rows_b, name, b.label),
                                   Metric::SiSdr, bootstrap_n, derive_seed(seed, name));
  }
  return out;
}

inline std::string format_comparison_table(const std::map<std::string, AggregateStat>& diffs) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %9s %9s %9s %8s %6s\n", "subset", "d_median",
                "ci_low", "ci_high", "mad", "n");
  out += line;
  for (const auto& [name, s] : diffs) {
    std::snprintf(line, sizeof line, "%-28s %9.3f %9.3f %9.3f %8.3f %6zu\n", name.c_str(),
                  s.median, s.ci_low, s.ci_high, s.mad, s.n);
    out += line;
  }
  return out;
}

}  // namespace biodeno
