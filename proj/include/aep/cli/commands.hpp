#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aep/cli/config.hpp"

namespace aep::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kInputError = 2, kVerdictFailed = 3 };

struct CommandOptions {
  std::filesystem::path output;
  std::optional<std::size_t> threads;
  bool timestamp = false;
  bool force = false;
};

/// Simulation ensemble plus estimators; writes estimates.csv, summary.json,
/// raw.jsonl (where per-batch data exists) and manifest.json.
int cmd_simulate(const Config& config, const CommandOptions& options);

/// Golden records for the exact oracles; GoldenDrift if a stored value moved
/// beyond its tolerance, unless forced.
int cmd_oracle(const Config& config, const CommandOptions& options);

/// Closed-form vs numeric sweep of the degree-two resolvent values and the
/// lambda scaling of the current's resolvent norm.
int cmd_resolvent(const Config& config, const CommandOptions& options);

/// Exponent fits, weak-sense verdict and monotonicity over stored curves.
/// Returns kVerdictFailed when a required section fails.
int cmd_report(const Config& config, const CommandOptions& options);

/// Full command line: parses arguments and maps errors to exit codes.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace aep::cli
