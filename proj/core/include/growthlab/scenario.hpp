#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "growthlab/aggregation.hpp"
#include "growthlab/auctioneer.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"
#include "growthlab/simulate.hpp"
#include "growthlab/solver.hpp"

namespace growthlab {

// How the period-1 cross section is formed.  Initial capital shares are
// either equal (1/N) or jittered deterministically by `spread`; period-1
// employment shares come from the class structure (or are bypassed entirely
// by kind == equal / explicit).
struct PopulationSpec {
  enum class Kind { equal, drawn, explicit_list };
  Kind kind = Kind::drawn;
  double spread = 0.0;              // capital-share jitter in [0,1)
  std::uint64_t seed = 7;           // drives the deterministic jitter & draw
  std::vector<int> classes;         // explicit_list only
  std::vector<double> omegas;       // explicit_list only
};

struct AnalysisSpec {
  std::vector<double> eps_list{0.05};
  std::vector<double> probe_omegas;  // verify-time oracle probes; empty = default
  std::vector<int> n_sweep;          // extra agent counts for TV stability tracking
};

struct ScenarioConfig {
  int spec_version = 1;
  std::string name = "scenario";
  EconomyParams params;
  ProcessSpec process;
  SolverOptions solver;
  ClearingOptions clearing;
  PopulationSpec population;
  AnalysisSpec analysis;
  SimulationOptions simulation;
  bool allow_unconverged = false;
  bool force = false;  // proceed despite a failed risk-of-unemployment check
};

// Parse / serialize the scenario JSON dialect.  parse throws
// std::runtime_error with a machine-readable "field: problem" message.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

// Content hash over the canonicalized scenario (sorted keys, volatile fields
// such as output paths excluded).  FNV-1a 64-bit, hex string "fnv1a64:...".
std::uint64_t scenario_hash(const ScenarioConfig& config);
std::string scenario_hash_hex(const ScenarioConfig& config);

// Build the period-1 population for the scenario's tree: wealth shares
// omega_j = (1-alpha) e_j1 + alpha s_j0 with Sum omega_j == 1.
PopulationState build_population(const ScenarioConfig& config, const EventTree& tree);

}  // namespace growthlab
