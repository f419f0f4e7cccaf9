#pragma once

#include <optional>
#include <string>

#include "growthlab/scenario.hpp"

namespace growthlab {

// Cache directory resolution: explicit argument, else $GROWTHLAB_CACHE_DIR,
// else disabled.
std::optional<std::string> resolve_cache_dir(const std::string& explicit_dir = "");

struct RunOutcome {
  bool ok = false;
  bool validation_passed = false;
  bool converged = false;
  bool cache_hit = false;
  double max_clearing_residual = 0.0;
  std::string report_path;
  std::string error;  // set when ok == false
};

// Full pipeline: validate -> build tree -> solve forecasts (policies inside)
// -> simulate -> aggregation analysis.  Writes report.json, panel.csv,
// aggregation.csv, bounds.csv under out_dir.  A converged forecast/policy
// bundle is cached under the scenario hash; a cache hit skips the solves and
// reproduces the same report apart from the timing block.
RunOutcome run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                        const std::string& cache_dir = "");

}  // namespace growthlab
