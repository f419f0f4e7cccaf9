#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "growthlab/aggregates.hpp"
#include "growthlab/bounds.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"
#include "growthlab/policy.hpp"

namespace growthlab {

// One prospects class's decision problem under fixed forecasts.
struct AgentProblem {
  const EventTree* tree;
  const EconomyParams* params;
  const Forecasts* forecasts;
  const NodeAggregates* agg;
  int class_id;
};

struct SolverOptions {
  std::size_t grid_points = 400;
  double omega_min = 1e-6;
  double foc_tol = 1e-12;    // bisection width on gamma
  int max_bisect = 200;
  bool secant_polish = true; // a few derivative-free steps after bisection
  std::uint64_t scenario_hash = 0;
};

struct SolveReport {
  int nodes_solved = 0;
  std::size_t grid_points = 0;
  double max_residual = 0.0;        // |FOC| at solved grid points, scale-free form
  int boundary_low = 0;             // gamma pinned at 0 (flagged corner)
  int boundary_high = 0;            // gamma pinned near 1 (flagged corner)
  long long bisection_iterations = 0;
};

// Scale-free residual of the optimality condition at (node, omega, gamma):
//   (1-gamma)^-sigma
//     - (beta*alpha/Omega_n) * E[ (W'/W)^(1-sigma) * (omega/(omega'*(1-gamma'(omega'))))^sigma ]
// where omega' = alpha*gamma*omega/Omega_n + (1-alpha)*e_eff and gamma' is the
// child-node policy.  Strictly increasing in gamma; negative below the
// optimum, positive above; -inf when a positive-probability branch would
// carry zero wealth (the unemployment asymptote).  The sigma == 1 branch uses
// log-utility arithmetic directly -- no pow() and no output levels.
double foc_residual(const AgentProblem& pb, const Policy& policy, int node,
                    double omega, double gamma);

// Backward induction over the tree: per node (leafward first), solve the FOC
// by bisection on (0,1) at every grid point; terminal nodes consume
// everything.  Grids are log-spaced with refinement near employment-share
// landmarks and capped by the reachable wealth envelope.
std::pair<Policy, SolveReport> solve_policy(const AgentProblem& pb,
                                            const SolverOptions& opts = {});

// Value and derivative of the solved problem at (node, omega):
//   value:      forward substitution of the policy into discounted utility
//   derivative: envelope form W^(1-sigma) / (omega - s*Omega)^sigma
//               (log branch: 1 / (omega - s*Omega))
//   second:     sigma * W^(1-sigma) * (s'(omega)*Omega - 1) / (omega - s*Omega)^(1+sigma)
struct ValueDerivative {
  double value;
  double derivative;
  double second;
};

ValueDerivative value_and_derivative(const AgentProblem& pb, const Policy& policy,
                                     int node, double omega);

}  // namespace growthlab
