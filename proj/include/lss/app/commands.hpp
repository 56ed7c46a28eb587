#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lss/app/config.hpp"
#include "lss/verify.hpp"

namespace lss::app {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigInvalid = 2, kRuntimeAbort = 3 };

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

void apply(const Overrides& o, RunConfig& cfg);

/// Runs the configured chain(s); writes samples.csv and report.json.
int cmd_run(const std::string& config_path, const Overrides& o, std::ostream& log);

/// Histogram of the primary chart parameter against both reference
/// densities; writes density.csv, tv.json and report.json.
int cmd_density(const std::string& config_path, const Overrides& o, std::ostream& log);

/// Bias and MSE sweep; writes sweep.csv and slopes.json.
int cmd_sweep(const std::string& config_path, const Overrides& o, std::ostream& log);

/// Selected oracle checks; corrupt turns every check into its negative
/// control. Prints a table and returns kVerifyFailed on any failure.
int cmd_verify(const std::string& selector, bool corrupt, std::ostream& out);

/// Selectors accepted by cmd_verify.
std::vector<std::string> verify_selectors();

/// The checks behind a selector; throws ConfigError for unknown selectors.
std::vector<CheckResult> run_checks(const std::string& selector, bool corrupt);

/// Compiler-derived platform triple recorded in reports.
std::string platform_triple();

}  // namespace lss::app
