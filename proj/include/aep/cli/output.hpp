#pragma once

// Output files of a run. Every file embeds the tool version, the config
// hash and the master seed; nothing depends on wall-clock time unless a
// timestamp is requested for the manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aep/estimators.hpp"
#include "json.hpp"

namespace aep::cli {

inline constexpr const char* kToolVersion = AEP_VERSION;
inline constexpr int kCsvSchema = 1;
inline constexpr int kJsonSchema = 1;

struct RunInfo {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// %.17g
std::string format_double(double v);

struct CsvRow {
  std::string method;
  double t = 0.0;
  std::optional<std::int64_t> x;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t replicas = 0;
};

/// Columns method,t,x,estimate,se,replicas,seed after one '#' line.
std::string estimates_csv(const RunInfo& info, const std::vector<CsvRow>& rows);

/// Rows of one method read back from an estimates CSV, in file order.
std::vector<CsvRow> read_estimates_csv(const std::filesystem::path& path, const std::string& method);

/// The rows of a method as a diffusivity curve.
DiffusivityCurve read_curve(const std::filesystem::path& path, const std::string& method);

/// version, schema, command, config hash and seed.
nlohmann::ordered_json header_json(const RunInfo& info);

void write_file(const std::filesystem::path& path, const std::string& content);

/// Writes manifest.json listing each file with its SHA-256 and size.
void write_manifest(const std::filesystem::path& dir, const RunInfo& info, const std::vector<std::string>& files,
                    bool timestamp);

}  // namespace aep::cli
