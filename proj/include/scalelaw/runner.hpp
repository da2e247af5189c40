#pragma once

// Executes a parsed configuration: one run, or one run per sweep value.
// Artifacts go under cfg.output; manifest.json is written last.
//
// Exit codes: 0 success, 1 configuration error, 2 solver non-convergence or
// failed sweep cells (artifacts and diagnostics are still written).

#include <iosfwd>
#include <string>
#include <vector>

#include "scalelaw/io.hpp"

namespace scalelaw {

inline constexpr const char* kToolVersion = "0.1.0";

int execute(const RunConfig& cfg, std::ostream& log);
int execute_sweep(const RunConfig& cfg, const std::string& parameter,
                  const std::vector<double>& values, std::ostream& log);

// Log-spaced time grid of the config.
std::vector<double> time_grid(const RunConfig& cfg);

}  // namespace scalelaw
