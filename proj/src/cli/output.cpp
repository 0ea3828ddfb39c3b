#include "aep/cli/output.hpp"

#include <chrono>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "aep/cli/config.hpp"
#include "aep/errors.hpp"

namespace aep::cli {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string estimates_csv(const RunInfo& info, const std::vector<CsvRow>& rows) {
  std::string out = fmt::format("# aep {} schema={} command={} config={} seed={}\n", kToolVersion, kCsvSchema,
                                info.command, info.config_hash, info.seed);
  out += "method,t,x,estimate,se,replicas,seed\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.method, format_double(r.t), r.x ? std::to_string(*r.x) : "",
                       format_double(r.estimate), format_double(r.se), r.replicas, info.seed);
  }
  return out;
}

std::vector<CsvRow> read_estimates_csv(const std::filesystem::path& path, const std::string& method) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigParse, "cannot open " + path.string());
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "method,t,x,estimate,se,replicas,seed") {
        fail(ErrorCode::ConfigParse, path.string() + ": unexpected header '" + line + "'");
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 7) fail(ErrorCode::ConfigParse, path.string() + ":" + std::to_string(lineno) + ": expected 7 fields");
    if (f[0] != method) continue;
    try {
      CsvRow r;
      r.method = f[0];
      r.t = std::stod(f[1]);
      if (!f[2].empty()) r.x = std::stoll(f[2]);
      r.estimate = std::stod(f[3]);
      r.se = std::stod(f[4]);
      r.replicas = std::stoull(f[5]);
      rows.push_back(r);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigParse, path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

DiffusivityCurve read_curve(const std::filesystem::path& path, const std::string& method) {
  DiffusivityCurve c;
  c.method = method;
  for (const auto& r : read_estimates_csv(path, method)) {
    if (r.x) continue;
    c.times.push_back(r.t);
    c.values.push_back({r.estimate, r.se});
    c.replicas = r.replicas;
  }
  if (c.times.empty()) fail(ErrorCode::ConfigParse, path.string() + ": no rows for method '" + method + "'");
  return c;
}

nlohmann::ordered_json header_json(const RunInfo& info) {
  nlohmann::ordered_json j;
  j["tool"] = "aep";
  j["version"] = kToolVersion;
  j["schema"] = kJsonSchema;
  j["command"] = info.command;
  j["config_hash"] = info.config_hash;
  j["seed"] = info.seed;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidConfig, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::InvalidConfig, "write failed for " + path.string());
}

void write_manifest(const std::filesystem::path& dir, const RunInfo& info, const std::vector<std::string>& files,
                    bool timestamp) {
  nlohmann::ordered_json j = header_json(info);
  if (timestamp) {
    const auto now = std::chrono::system_clock::now();
    j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  }
  auto list = nlohmann::ordered_json::array();
  for (const auto& name : files) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    list.push_back({{"name", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  j["files"] = list;
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace aep::cli
