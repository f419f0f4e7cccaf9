#pragma once

#include <vector>

#include "growthlab/aggregates.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"
#include "growthlab/policy.hpp"

namespace growthlab {

// Brute-force reference optimizer, deliberately independent of the solver:
// no first-order condition, no interpolation, no envelope algebra.  Each
// period maximizes realized discounted utility by a dense scan over the
// savings rate followed by golden-section refinement; future behavior is
// re-optimized from scratch at every evaluation point (fully nested).
// Exponential in the horizon -- intended for desk-scale instances only.
struct OracleOptions {
  int scan_points = 48;      // dense bracket scan over (0,1)
  double refine_tol = 1e-10; // golden-section interval width on gamma
  int max_depth = 3;         // refuse instances deeper than this
};

struct OracleResult {
  double gamma;  // argmax savings rate at the queried state
  double value;  // attained discounted expected utility
};

OracleResult brute_force_gamma(const EventTree& tree, const EconomyParams& params,
                               const Forecasts& forecasts, const NodeAggregates& agg,
                               int class_id, int node, double omega,
                               const OracleOptions& opts = {});

// Max |gamma_policy - gamma_oracle| over probe wealths at a node, and the
// worst probe.  The caller asserts against its tolerance.
struct PolicyComparison {
  double max_abs_diff = 0.0;
  double worst_omega = 0.0;
};

PolicyComparison compare_policy(const Policy& policy, const EventTree& tree,
                                const EconomyParams& params, const Forecasts& forecasts,
                                const NodeAggregates& agg, int class_id, int node,
                                const std::vector<double>& probe_omegas,
                                const OracleOptions& opts = {});

// Discounted expected utility of committing to savings rate `gamma` at
// (node, omega) while every later decision is re-optimized by the oracle.
// Lets callers check that the oracle's argmax really dominates any
// candidate rate on the oracle's own objective.
double oracle_value(const EventTree& tree, const EconomyParams& params,
                    const Forecasts& forecasts, const NodeAggregates& agg,
                    int class_id, int node, double omega, double gamma,
                    const OracleOptions& opts = {});

}  // namespace growthlab
