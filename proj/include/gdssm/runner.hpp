// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Experiment commands. Each run writes `<out_dir>/<run_id>_manifest.json`
// before doing any work and rewrites it with the outcome afterwards; every
// other artifact is `<out_dir>/<run_id>_<name>`.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gdssm/config.hpp"

namespace gdssm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;  // verify found a failing property
inline constexpr int kExitUsage = 2;        // malformed config or flags
inline constexpr int kExitAborted = 3;      // training diverged or went non-finite
inline constexpr int kExitError = 4;        // I/O and other runtime failures

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kSpecVersion = "gdssm-spec-1";

const std::vector<std::string>& command_names();

struct VerifyCheck {
  std::string property;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

// Construction vs oracle equivalence, identities and gradient checks.
std::vector<VerifyCheck> verify_suite(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string run_id;
  std::string manifest_path;
  std::vector<std::string> artifacts;
  std::string failure;  // failing property or abort reason
};

std::string resolve_run_id(const std::string& command, const RunConfig& cfg);

// Runs one command; progress goes to `log`. Throws ConfigError for settings
// that are well-formed but unusable for the command.
RunOutcome run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace gdssm
