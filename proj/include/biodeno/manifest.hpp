#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "biodeno/csv.hpp"
#include "biodeno/error.hpp"
#include "biodeno/wav_io.hpp"

namespace biodeno {

enum class Role { Voc, Noise };
enum class Scenario { Underwater, Terrestrial };

constexpr std::string_view to_string(Role r) { return r == Role::Voc ? "voc" : "noise"; }
constexpr std::string_view to_string(Scenario s) {
  return s == Scenario::Underwater ? "underwater" : "terrestrial";
}

inline Role parse_role(std::string_view text) {
  if (text == "voc") return Role::Voc;
  if (text == "noise") return Role::Noise;
  fail(ErrorCode::CorruptHeader, "unknown role '" + std::string(text) + "'");
}

inline Scenario parse_scenario(std::string_view text) {
  if (text == "underwater") return Scenario::Underwater;
  if (text == "terrestrial") return Scenario::Terrestrial;
  fail(ErrorCode::CorruptHeader, "unknown scenario '" + std::string(text) + "'");
}

inline constexpr Scenario kScenarios[] = {Scenario::Underwater, Scenario::Terrestrial};

struct AssetEntry {
  std::string asset_id;
  std::string path;
  Role role = Role::Voc;
  Scenario scenario = Scenario::Underwater;
  double duration_s = 0.0;
  int sample_rate = 0;

  friend bool operator==(const AssetEntry&, const AssetEntry&) = default;
};

/// Catalog of audio assets, kept sorted by asset_id.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<AssetEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const AssetEntry& a, const AssetEntry& b) { return a.asset_id < b.asset_id; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      require(i == 0 || entries_[i].asset_id != entries_[i - 1].asset_id, ErrorCode::CorruptHeader,
              "duplicate asset id " + entries_[i].asset_id);
      require(entries_[i].duration_s > 0.0, ErrorCode::CorruptHeader,
              "asset " + entries_[i].asset_id + " has non-positive duration");
    }
  }

  const std::vector<AssetEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const AssetEntry& find(std::string_view id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const AssetEntry& e, std::string_view v) { return e.asset_id < v; });
    if (it == entries_.end() || it->asset_id != id) {
      fail(ErrorCode::AssetNotFound, "asset '" + std::string(id) + "' is not in the manifest");
    }
    return *it;
  }

  std::vector<AssetEntry> select(Role role, Scenario scenario) const {
    std::vector<AssetEntry> out;
    for (const auto& e : entries_) {
      if (e.role == role && e.scenario == scenario) out.push_back(e);
    }
    return out;
  }

 private:
  std::vector<AssetEntry> entries_;
};

inline constexpr const char* kManifestColumns[] = {"asset_id", "path",       "role",
                                                   "scenario", "duration_s", "sample_rate"};

inline std::string format_manifest_csv(const Manifest& manifest) {
  std::string out = csv::join_row({std::begin(kManifestColumns), std::end(kManifestColumns)});
  for (const auto& e : manifest.entries()) {
    out += csv::join_row({e.asset_id, e.path, std::string(to_string(e.role)),
                          std::string(to_string(e.scenario)), csv::format_double(e.duration_s),
                          std::to_string(e.sample_rate)});
  }
  return out;
}

inline void write_manifest_csv(const Manifest& manifest, const std::filesystem::path& path) {
  csv::write_text_atomic(path, format_manifest_csv(manifest));
}

inline Manifest read_manifest_csv(const std::filesystem::path& path) {
  const auto table = csv::parse(csv::read_text(path));
  const auto c_id = table.column("asset_id"), c_path = table.column("path"),
             c_role = table.column("role"), c_scen = table.column("scenario"),
             c_dur = table.column("duration_s"), c_rate = table.column("sample_rate");
  std::vector<AssetEntry> entries;
  const auto base = path.parent_path();
  for (const auto& row : table.rows) {
    AssetEntry e;
    e.asset_id = row[c_id];
    std::filesystem::path p(row[c_path]);
    e.path = (p.is_relative() ? base / p : p).lexically_normal().string();
    e.role = parse_role(row[c_role]);
    e.scenario = parse_scenario(row[c_scen]);
    e.duration_s = csv::parse_double(row[c_dur], "duration_s");
    e.sample_rate = static_cast<int>(csv::parse_u64(row[c_rate], "sample_rate"));
    entries.push_back(std::move(e));
  }
  return Manifest(std::move(entries));
}

/// Maps a subdirectory of the asset root to a role and scenario.
struct ScanRule {
  std::filesystem::path subdir;
  Role role;
  Scenario scenario;
};

/// `<scenario>/<role>/...` with singular or plural role directory names.
inline std::vector<ScanRule> default_scan_rules() {
  std::vector<ScanRule> rules;
  for (Scenario s : kScenarios) {
    const std::filesystem::path base{std::string(to_string(s))};
    rules.push_back({base / "voc", Role::Voc, s});
    rules.push_back({base / "vocalizations", Role::Voc, s});
    rules.push_back({base / "noise", Role::Noise, s});
    rules.push_back({base / "noises", Role::Noise, s});
  }
  return rules;
}

struct ScanResult {
  Manifest manifest;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool has_wav_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

// Returns the remainder of `path` under `prefix`, or empty when not under it.
inline std::filesystem::path strip_prefix(const std::filesystem::path& path,
                                          const std::filesystem::path& prefix) {
  auto pi = path.begin();
  for (auto qi = prefix.begin(); qi != prefix.end(); ++qi, ++pi) {
    if (pi == path.end() || *pi != *qi) return {};
  }
  std::filesystem::path rest;
  for (; pi != path.end(); ++pi) rest /= *pi;
  return rest;
}

}  // namespace detail

/// Catalogs WAV files under `root` in lexicographic order. Asset ids are
/// `<scenario>/<role>/<path below the rule's subdirectory>`; durations come
/// from headers. Unreadable files are skipped and reported as warnings.
inline ScanResult scan_assets(const std::filesystem::path& root,
                              const std::vector<ScanRule>& rules = default_scan_rules()) {
  std::error_code ec;
  require(std::filesystem::is_directory(root, ec), ErrorCode::FileNotFound,
          "asset root " + root.string() + " is not a directory");
  const auto base = std::filesystem::weakly_canonical(root);
  std::vector<std::filesystem::path> files;
  for (auto it = std::filesystem::recursive_directory_iterator(
           base, std::filesystem::directory_options::follow_directory_symlink, ec);
       !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file(ec) && detail::has_wav_extension(it->path())) {
      files.push_back(it->path().lexically_relative(base));
    }
  }
  require(!ec, ErrorCode::IoError, "scanning " + root.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.generic_string() < b.generic_string();
  });

  ScanResult result;
  std::map<std::string, AssetEntry> by_id;
  for (const auto& rel : files) {
    const ScanRule* match = nullptr;
    std::filesystem::path rest;
    for (const auto& rule : rules) {
      rest = detail::strip_prefix(rel, rule.subdir);
      if (!rest.empty()) {
        match = &rule;
        break;
      }
    }
    if (match == nullptr) continue;
    const std::string id = std::string(to_string(match->scenario)) + "/" +
                           std::string(to_string(match->role)) + "/" + rest.generic_string();
    WavInfo info;
    try {
      info = probe_wav(base / rel);
    } catch (const Error& e) {
      result.warnings.push_back("UnreadableFile: " + rel.generic_string() + ": " + e.detail());
      continue;
    }
    if (info.frames == 0) {
      result.warnings.push_back("UnreadableFile: " + rel.generic_string() + ": no audio frames");
      continue;
    }
    if (by_id.count(id) != 0) {
      result.warnings.push_back("duplicate asset id " + id + " from " + rel.generic_string());
      continue;
    }
    by_id.emplace(id, AssetEntry{id, (base / rel).string(), match->role, match->scenario,
                                 info.duration_s(), info.sample_rate});
  }
  require(!by_id.empty(), ErrorCode::EmptyRoot,
          "no readable audio assets under " + root.string());
  std::vector<AssetEntry> entries;
  for (auto& [id, e] : by_id) entries.push_back(std::move(e));
  result.manifest = Manifest(std::move(entries));
  return result;
}

}  // namespace biodeno
