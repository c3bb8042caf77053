#pragma once

#include <cctype>
#include <charconv>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biodeno/csv.hpp"
#include "biodeno/error.hpp"

namespace biodeno {

/// Flat `key = value` configuration. '#' starts a comment; later
/// assignments win. Keys are checked against a known set on lookup.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text, std::string_view origin = "config") {
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos, end - pos));
      pos = end + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos, ErrorCode::InvalidConfig,
              std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      require(!key.empty(), ErrorCode::InvalidConfig,
              std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    return parse(csv::read_text(path), path.string());
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Fails with InvalidConfig on any key outside `known`.
  void check_keys(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
      require(known.count(key) != 0, ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  }

  std::string get_string(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorCode::InvalidConfig,
            "config key '" + key + "' expects a number, got '" + s + "'");
    return v;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorCode::InvalidConfig,
            "config key '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(ErrorCode::InvalidConfig, "config key '" + key + "' expects a boolean, got '" + s + "'");
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double_list(it->second, key);
  }

  /// Canonical `key=value` lines, sorted by key.
  std::string canonical_text() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
    return out;
  }

  static std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find(',', pos);
      if (end == std::string_view::npos) end = text.size();
      const std::string item = trim(std::string(text.substr(pos, end - pos)));
      pos = end + 1;
      if (item.empty()) continue;
      double v = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      require(res.ec == std::errc{} && res.ptr == item.data() + item.size(),
              ErrorCode::InvalidConfig,
              std::string(what) + ": expected a comma-separated list of numbers");
      out.push_back(v);
    }
    return out;
  }

 private:
  static std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace biodeno
