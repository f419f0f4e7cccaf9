#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "growthlab/grid.hpp"

namespace growthlab {

// Savings policy for one prospects class: one monotone tabulation of the
// savings rate gamma_h(omega) per tree node (terminal nodes are identically
// zero).  gamma in [0,1); the agent's capital demand is s = gamma*omega/Omega.
class Policy {
 public:
  int class_id = 0;
  std::uint64_t scenario_hash = 0;
  double foc_tol = 1e-12;
  std::string interp = "pchip";

  std::vector<WealthGrid> grids;                // per node
  std::vector<std::vector<double>> gamma;       // per node, per grid point
  std::vector<std::vector<double>> slopes;      // pchip slopes, same shape

  // Evaluate gamma at a node.  Queries below the grid floor (or above the
  // ceiling) clamp to the boundary value; *clamped is set when provided.
  double eval(int node, double omega, bool* clamped = nullptr) const;
  double eval_derivative(int node, double omega) const;

  void finalize_node(int node);  // recompute slopes after filling gamma

  bool terminal(int node) const { return gamma[static_cast<std::size_t>(node)].empty(); }
};

// Versioned JSON round-trip.  Doubles survive exactly (shortest round-trip
// representation); load verifies schema version and scenario hash unless
// expected_hash == 0.
std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text, std::uint64_t expected_hash = 0);

}  // namespace growthlab
