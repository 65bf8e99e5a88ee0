#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace homocut::cli {

enum ExitCode : int { kOk = 0, kError = 1, kWarnings = 2 };

struct RunOptions {
  std::string out_dir;                  // empty: no files written
  std::optional<std::uint64_t> seed;    // overrides the config seed
  std::optional<double> tolerance;      // overrides the relative gap tolerance
  bool oracle = false;
};

/// Least-gradient solve of the problem described by a config object.
/// Writes solution.json, cut.csv and trace.csv into out_dir.
int cmd_solve(const nlohmann::json& config, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Max flow / min cut on a network file, a random network or packing graphs.
int cmd_flow(const nlohmann::json& config, const RunOptions& opts, std::ostream& out, std::ostream& err);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Names of the suites accepted by cmd_verify.
std::vector<std::string> verify_suites();

/// Runs a suite; nullopt for an unknown name.
std::optional<std::vector<CheckResult>> run_suite(const std::string& suite, std::uint64_t seed);

/// JUnit-style XML; contains no timings, so equal inputs give equal bytes.
std::string junit_xml(const std::string& suite, const std::vector<CheckResult>& checks);

/// Runs a suite, prints one line per check and writes verify-<suite>.xml.
int cmd_verify(const std::string& suite, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Worker cap from HOMOCUT_THREADS (1 when unset); throws on a malformed value.
int thread_cap();

}  // namespace homocut::cli
