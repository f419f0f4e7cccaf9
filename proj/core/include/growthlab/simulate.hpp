#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "growthlab/aggregation.hpp"
#include "growthlab/auctioneer.hpp"
#include "growthlab/employment.hpp"

namespace growthlab {

struct SimulationOptions {
  int n_paths = 1;
  std::uint64_t seed = 1;
  EmploymentMode mode = EmploymentMode::exact_fraction;
  int retry_cap = 100;
};

// One record per (path, period, agent).  Goods-unit columns use the node's
// aggregates implied by the forecasts; capital is what agents actually
// saved, so consumption plus capital exhausts agent wealth exactly.
struct PanelRow {
  int path;
  int period;
  int node;
  int agent;
  double shock;        // z at the node
  double output;       // Y_n, goods units
  double capital_next; // sum_j k_j at this node (repeated per agent row)
  double employment;   // realized share of the wage bill (real units)
  double omega;        // wealth share of effective output
  double invest_share; // s_j = gamma * omega / Omega
  double consumption;  // goods units
};

struct PanelNodeStat {
  int node = 0;
  long visits = 0;
  double mean_excess = 0.0;  // realized sum_j s_j - 1
  double max_abs_excess = 0.0;
};

struct SimulationPanel {
  std::vector<PanelRow> rows;
  std::vector<PanelNodeStat> node_stats;   // per non-terminal node
  long below_floor_evals = 0;              // policy queries clamped at the grid floor
  double max_accounting_gap = 0.0;         // |sum c + K - (sum omega) * W| over periods
  std::string rng_name;
  std::uint64_t seed = 0;
};

// Simulate n_paths forward passes through the event tree.  Aggregate
// branches are drawn from the tree probabilities; employment is realized per
// edge in the requested mode.  Wealth shares transition through each agent's
// share of realized aggregate investment, so the cross-section stays an
// exact partition of effective output regardless of clearing error.
SimulationPanel simulate_paths(const EventTree& tree, const EconomyParams& params,
                               const Forecasts& forecasts, const NodeAggregates& agg,
                               const std::vector<const Policy*>& policies,
                               const PopulationState& root_pop,
                               const SimulationOptions& opts);

std::string panel_to_csv(const SimulationPanel& panel);

}  // namespace growthlab
