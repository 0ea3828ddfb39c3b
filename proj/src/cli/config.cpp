#include "aep/cli/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aep/errors.hpp"

namespace aep::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    fail(ErrorCode::ConfigParse, "key '" + key + "': '" + s + "' is not a finite number");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// property_tree's ini parser keeps trailing comments; strip them
std::string strip_comment(const std::string& v) {
  std::string out = v;
  for (const char c : {';', '#'}) {
    const auto p = out.find(c);
    if (p != std::string::npos) out = out.substr(0, p);
  }
  return trim(out);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ConfigParse, origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config c;
  c.origin_ = origin;
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::ConfigParse, origin + ": key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      if (!value.empty()) fail(ErrorCode::ConfigParse, origin + ": nested key under " + section + "." + key);
      c.values_[section + "." + key] = strip_comment(value.data());
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigParse, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Config c = parse(buf.str(), path.string());
  c.directory_ = path.parent_path();
  return c;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::ConfigParse, origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Config::number(const std::string& key) const { return to_double(key, text(key)); }

double Config::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t Config::integer(const std::string& key) const {
  const std::string s = text(key);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::ConfigParse, "key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorCode::ConfigParse, "key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(text(key), ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? numbers(key) : fallback;
}

JumpLaw Config::law(const std::string& key) const {
  try {
    return parse_jump_law(text(key));
  } catch (const Error& e) {
    throw Error(e.code(), "key '" + key + "': " + e.what());
  }
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string Config::hash() const {
  std::string canonical;
  for (const auto& [k, v] : values_) {
    if (k == "run.threads" || k == "run.output") continue;
    canonical += k + " = " + v + "\n";
  }
  return sha256_hex(canonical);
}

std::vector<double> parse_time_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_double("times", item));
      continue;
    }
    const auto slash = item.find('/', dots);
    if (slash == std::string::npos) fail(ErrorCode::ConfigParse, "time range '" + item + "' needs a /count");
    const double a = to_double("times", item.substr(0, dots));
    const double b = to_double("times", item.substr(dots + 2, slash - dots - 2));
    const double n = to_double("times", item.substr(slash + 1));
    if (!(n >= 2.0) || n != std::floor(n) || !(b > a)) {
      fail(ErrorCode::ConfigParse, "time range '" + item + "' needs b > a and an integer count >= 2");
    }
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (double t : out) {
    if (!(t >= 0.0)) fail(ErrorCode::ConfigParse, "times must be nonnegative");
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::InvalidConfig, "SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace aep::cli
