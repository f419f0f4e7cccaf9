#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "growthlab/aggregation.hpp"
#include "growthlab/solver.hpp"

namespace growthlab {

// Market-clearing residual per non-terminal node:
//   residual_n = sum_j E[ gamma(omega_j) * omega_j ] / Omega_n - 1,
// i.e. desired capital shares against the auctioneer's unit supply.  The
// root population is propagated through the tree by exact expectation over
// each agent's employment outcomes (one weighted state list per agent and
// node); only per-agent marginals enter the expected residual, so the joint
// assignment mode does not change it.  When the state count would exceed
// `enumeration_cap`, residuals are instead estimated from `sample_paths`
// joint employment realizations per aggregate path and reported with a
// standard error.
struct ClearingOptions {
  double damping = 0.5;        // lambda in the multiplicative update
  int max_iters = 200;
  double tol = 1e-8;           // max |residual| for convergence
  std::uint64_t enumeration_cap = 4'000'000;
  int sample_paths = 256;      // replications per aggregate path when sampling
  std::uint64_t seed = 0x9E1CE5EDu;  // used only in sampled mode
  double omega_floor = 1e-6;   // forecasts projected into [floor, 1-floor]
};

struct ClearingResiduals {
  std::vector<double> residual;   // per node; 0 at terminal nodes
  bool sampled = false;
  std::vector<double> std_error;  // per node, only in sampled mode
  std::uint64_t states = 0;       // enumerated agent-states (exact mode)
};

ClearingResiduals clearing_residuals(const EventTree& tree, const EconomyParams& params,
                                     const Forecasts& forecasts, const NodeAggregates& agg,
                                     const PopulationState& root_pop,
                                     const std::vector<const Policy*>& policies,
                                     const ClearingOptions& opts = {});

struct ClearingReport {
  bool converged = false;
  int iterations = 0;
  double damping = 0.5;
  double max_residual = 0.0;             // at exit
  std::vector<double> residuals;         // per node at exit
  std::vector<double> residual_history;  // max |residual| per outer pass
  int projections = 0;                   // updates pulled back into (0,1)
  bool sampled = false;
  std::vector<double> std_error;
};

// Damped multiplicative fixed-point iteration on the forecast profile:
// each outer pass re-propagates aggregates, re-solves every class's policy,
// re-propagates the population, then sweeps Omega_n <- Omega_n * (sum_j s_j)^lambda
// rootward.  Non-convergence within max_iters is a reported outcome, not an
// error.  `initial` overrides the default seed (the no-employment log-case
// upper bounds, refined once through the sigma-specific bound recursion).
std::pair<Forecasts, ClearingReport> solve_forecasts(
    const EventTree& tree, const EconomyParams& params, const PopulationState& root_pop,
    const SolverOptions& solver_opts = {}, const ClearingOptions& opts = {},
    const Forecasts* initial = nullptr);

// Convenience: residual arithmetic used by the auctioneer, exposed for
// direct inspection -- sum of desired shares against unit supply.
double residual_from_shares(const std::vector<double>& desired_shares);

}  // namespace growthlab
