#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aep/cli/commands.hpp"
#include "aep/cli/config.hpp"
#include "aep/cli/output.hpp"
#include "aep/errors.hpp"

using namespace aep;
using namespace aep::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aep_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"([run]
seed = 5
replicas = 200
batches = 10

[model]
law = 1:0.7, -1:0.3 ; nearest neighbour
rho = 0.5

[estimate]
method = variance
times = 1, 2, 4
)";

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse("[a]\nx = 1.5 # note\ny = 3\nz = 1..3/3, 10\n[b]\nlaw = 1:1\n", "<test>");
  CHECK(c.number("a.x") == 1.5);
  CHECK(c.integer("a.y") == 3);
  CHECK(c.integer("a.missing", 7) == 7);
  CHECK(parse_time_list(c.text("a.z")) == std::vector<double>{1, 2, 3, 10});
  CHECK(c.law("b.law") == JumpLaw::tasep());
  CHECK_THROWS_AS(c.integer("a.x"), Error);
  CHECK_THROWS_AS(Config::parse("x = 1\n", "<test>"), Error);
  CHECK_THROWS_AS(parse_time_list("1..0/3"), Error);
  CHECK_THROWS_AS(parse_time_list("1..3"), Error);
}

TEST_CASE("config hash ignores thread count and output directory") {
  Config a = Config::parse(kSmall, "<a>");
  Config b = a;
  b.set("run.threads", "4");
  b.set("run.output", "elsewhere");
  CHECK(a.hash() == b.hash());
  b.set("run.seed", "6");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 64);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("estimates csv round trip") {
  const fs::path dir = scratch("csv");
  const RunInfo info{"simulate", "deadbeef", 3};
  const std::vector<CsvRow> rows{{"variance", 1.0, std::nullopt, 1.25, 0.01, 100},
                                 {"two_point", 1.0, -2, 0.1 / 3.0, 1e-3, 100},
                                 {"variance", 2.0, std::nullopt, 1.5, 0.02, 100}};
  write_file(dir / "e.csv", estimates_csv(info, rows));
  const auto back = read_estimates_csv(dir / "e.csv", "two_point");
  REQUIRE(back.size() == 1);
  CHECK(back[0].x == -2);
  CHECK(back[0].estimate == 0.1 / 3.0);
  const DiffusivityCurve c = read_curve(dir / "e.csv", "variance");
  CHECK(c.times == std::vector<double>{1.0, 2.0});
  CHECK(c.values[1].value == 1.5);
  CHECK_THROWS_AS(read_curve(dir / "e.csv", "height"), Error);
}

TEST_CASE("simulate writes reproducible outputs") {
  const fs::path dir = scratch("simulate");
  const fs::path cfg = write_config(dir, kSmall);
  REQUIRE(run({"simulate", "-c", cfg.string(), "-o", (dir / "a").string()}) == kOk);
  REQUIRE(run({"simulate", "-c", cfg.string(), "-o", (dir / "b").string(), "-j", "3"}) == kOk);
  for (const char* f : {"estimates.csv", "summary.json", "raw.jsonl", "manifest.json"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const std::string manifest = slurp(dir / "a" / "manifest.json");
  CHECK(manifest.find(sha256_hex(slurp(dir / "a" / "estimates.csv"))) != std::string::npos);
  CHECK(manifest.find("created_unix") == std::string::npos);
  const std::string csv = slurp(dir / "a" / "estimates.csv");
  CHECK(csv.rfind("# aep ", 0) == 0);
  CHECK(csv.find("seed=5") != std::string::npos);
  // an override changes the hash and the output
  REQUIRE(run({"simulate", "-c", cfg.string(), "-o", (dir / "c").string(), "--set", "run.seed=6"}) == kOk);
  CHECK(slurp(dir / "c" / "estimates.csv") != csv);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  const fs::path cfg = write_config(dir, kSmall);
  CHECK(run({"simulate", "-c", cfg.string(), "-o", (dir / "x").string(), "--set", "model.law=1:0.5, -1:0.6"}) ==
        kInputError);
  CHECK(run({"simulate", "-c", cfg.string(), "-o", (dir / "x").string(), "--set", "estimate.method=nope"}) ==
        kInputError);
  CHECK(run({"simulate", "-c", (dir / "missing.ini").string()}) == kInputError);
  CHECK(run({"simulate"}) == kInputError);
  CHECK(run({"frobnicate"}) == kInputError);
  CHECK(run({"resolvent", "-o", (dir / "r").string(), "--lambdas", "0"}) == kInputError);
  CHECK(run({"resolvent", "-o", (dir / "r").string(), "--k", "1,2", "--lambdas", "0.1,0.01"}) == kOk);
  // a runtime failure: the ring is too small for the horizon
  CHECK(run({"simulate", "-c", cfg.string(), "-o", (dir / "x").string(), "--set", "model.ring_size=20"}) ==
        kRuntimeError);
}

TEST_CASE("golden drift is detected") {
  const fs::path dir = scratch("golden");
  const std::vector<std::string> args{"oracle", "-o", dir.string(), "--set", "oracle.diffusivity_ring=8",
                                      "--set", "oracle.h1_ring=8"};
  REQUIRE(run(args) == kOk);
  const std::string before = slurp(dir / "prop22_value.json");
  REQUIRE(run(args) == kOk);
  CHECK(slurp(dir / "prop22_value.json") == before);
  // tamper with a stored value
  std::string text = slurp(dir / "exact_diffusivity.json");
  const auto pos = text.find("\"value\": ");
  REQUIRE(pos != std::string::npos);
  text.insert(pos + 9, "1");
  std::ofstream(dir / "exact_diffusivity.json") << text;
  CHECK(run(args) == kRuntimeError);
  auto forced = args;
  forced.push_back("--force");
  CHECK(run(forced) == kOk);
  CHECK(run(args) == kOk);
}

TEST_CASE("report without a baseline surfaces the grid mismatch") {
  const fs::path dir = scratch("report");
  const RunInfo info{"simulate", "x", 1};
  std::vector<CsvRow> rows;
  for (double t : {1.0, 2.0, 4.0, 8.0, 16.0}) rows.push_back({"variance", t, std::nullopt, std::pow(t, 0.3), 0.01, 100});
  write_file(dir / "curve.csv", estimates_csv(info, rows));
  const fs::path cfg = write_config(dir, "[report]\ncurve = curve.csv\nrequire = monotone, d_exponent\n");
  REQUIRE(run({"report", "-c", cfg.string(), "-o", (dir / "out").string()}) == kOk);
  const std::string verdict = slurp(dir / "out" / "verdict.json");
  CHECK(verdict.find("GridMismatch") != std::string::npos);
  CHECK(run({"report", "-c", cfg.string(), "-o", (dir / "out2").string(), "--set", "report.require=ratio"}) ==
        kVerdictFailed);
  // a decreasing curve fails the monotonicity section
  std::vector<CsvRow> down;
  for (double t : {1.0, 2.0, 4.0, 8.0, 16.0}) down.push_back({"variance", t, std::nullopt, 2.0 / (t * t), 0.01, 100});
  write_file(dir / "down.csv", estimates_csv(info, down));
  CHECK(run({"report", "-c", cfg.string(), "-o", (dir / "out3").string(), "--curve", (dir / "down.csv").string(),
             "--set", "report.require=monotone"}) == kVerdictFailed);
}

TEST_CASE("bundled configs run") {
  const fs::path dir = scratch("bundled");
  const fs::path configs = fs::path(AEP_SOURCE_DIR) / "configs";
  REQUIRE(run({"report", "-c", (configs / "report_demo.ini").string(), "-o", (dir / "report").string()}) == kOk);
  const std::string verdict = slurp(dir / "report" / "verdict.json");
  for (const char* key : {"\"d_fit\"", "\"monotonicity\"", "\"weak_sense\"", "\"ratio\"", "\"checks\""}) {
    CHECK(verdict.find(key) != std::string::npos);
  }
  CHECK(fs::exists(dir / "report" / "ratio.csv"));
  REQUIRE(run({"simulate", "-c", (configs / "quickstart.ini").string(), "-o", (dir / "quick").string(), "--set",
               "run.replicas=400"}) == kOk);
  CHECK(read_estimates_csv(dir / "quick" / "estimates.csv", "variance").size() >= 5);
}
