#pragma once

// INI-style run configuration: [section] headers, key = value lines,
// ';' or '#' comments. Typed getters raise ConfigParse naming the key.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aep/model.hpp"

namespace aep::cli {

class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  JumpLaw law(const std::string& key) const;

  /// Sets or replaces a value ("section.key").
  void set(const std::string& key, const std::string& value);

  /// SHA-256 of the sorted key = value lines, run.threads and run.output excluded.
  std::string hash() const;

  const std::filesystem::path& directory() const noexcept { return directory_; }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw value
  std::string origin_;
  std::filesystem::path directory_;
};

/// Comma-separated times; an item "a..b/n" expands to n evenly spaced
/// points from a to b. The result is sorted with duplicates removed.
std::vector<double> parse_time_list(const std::string& text);

std::string sha256_hex(const std::string& bytes);

}  // namespace aep::cli
