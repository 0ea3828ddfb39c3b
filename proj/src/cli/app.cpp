#include <CLI11.hpp>
#include <iostream>

#include "aep/cli/commands.hpp"
#include "aep/cli/output.hpp"
#include "aep/errors.hpp"

namespace aep::cli {

namespace {

struct Args {
  std::string config;
  std::string output;
  std::size_t threads = 0;
  bool timestamp = false;
  bool force = false;
  std::vector<std::string> overrides;
  std::string ks, lambdas;
  std::string curve, baseline;
};

void add_common(CLI::App* sub, Args& a, bool config_required) {
  auto* opt = sub->add_option("-c,--config", a.config, "INI config file");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  sub->add_option("-o,--output", a.output, "output directory");
  sub->add_option("--set", a.overrides, "override a config value, section.key=value");
  sub->add_flag("--timestamp", a.timestamp, "record the creation time in manifest.json");
}

Config load_config(const Args& a) {
  Config c = a.config.empty() ? Config::parse("", "<defaults>") : Config::load(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || kv.find('.') > eq) {
      fail(ErrorCode::ConfigParse, "--set expects section.key=value, got '" + kv + "'");
    }
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Finite-range asymmetric exclusion toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Args a;

  auto* sim = app.add_subcommand("simulate", "run a replica ensemble and its estimators");
  add_common(sim, a, true);
  sim->add_option("-j,--threads", a.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "regenerate golden values of the exact oracles");
  add_common(oracle, a, false);
  oracle->add_flag("--force", a.force, "overwrite golden files even when values drifted");

  auto* res = app.add_subcommand("resolvent", "closed-form vs numeric resolvent sweep");
  add_common(res, a, false);
  res->add_option("--k", a.ks, "comma-separated k values");
  res->add_option("--lambdas", a.lambdas, "comma-separated lambda values");

  auto* rep = app.add_subcommand("report", "exponent fits and weak-sense verdict over stored curves");
  add_common(rep, a, true);
  rep->add_option("--curve", a.curve, "estimates.csv of the law");
  rep->add_option("--baseline", a.baseline, "estimates.csv of the TASEP baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    Config c = load_config(a);
    CommandOptions o;
    o.output = a.output;
    if (a.threads > 0) o.threads = a.threads;
    o.timestamp = a.timestamp;
    o.force = a.force;
    if (*sim) return cmd_simulate(c, o);
    if (*oracle) return cmd_oracle(c, o);
    if (*res) {
      if (!a.ks.empty()) c.set("resolvent.k", a.ks);
      if (!a.lambdas.empty()) c.set("resolvent.lambdas", a.lambdas);
      return cmd_resolvent(c, o);
    }
    if (!a.curve.empty()) c.set("report.curve", a.curve);
    if (!a.baseline.empty()) c.set("report.baseline", a.baseline);
    return cmd_report(c, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kInputError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"aep"};
  for (const auto& s : args) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace aep::cli
