#pragma once

#include <vector>

#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"

namespace growthlab {

// The auctioneer's side of the economy: the fraction of current effective
// output invested at every non-terminal node.  Capital carried out of node n
// is K_n = omega[n] * y_eff[n].  Terminal entries are ignored (set to 0).
struct Forecasts {
  std::vector<double> omega;

  double at(int node) const { return omega[static_cast<std::size_t>(node)]; }
};

// Per-node aggregate quantities implied by a forecast profile.
//   output:      real output Y_n (root pinned at params.y1)
//   wealth_base: effective output Y'_n -- the unit all shares are quoted in
//   wage_scale:  Y_n / Y'_n, multiplies real employment shares
//   capital:     K_n = omega_n * Y'_n at non-terminal nodes, else 0
// With use_effective_path == false (total depreciation only) the
// undepreciated-capital carry is skipped and wealth_base == output verbatim.
struct NodeAggregates {
  std::vector<double> output;
  std::vector<double> wealth_base;
  std::vector<double> wage_scale;
  std::vector<double> capital;
};

NodeAggregates propagate_aggregates(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts,
                                    bool use_effective_path = true);

// Reachable upper envelope of individual wealth shares per node, starting
// from omega <= 1 at the root.  Uses the no-employment upper bounds on the
// savings rate, padded slightly; grids built on (omega_min, envelope] can
// absorb any propagated population without clamping.
std::vector<double> wealth_envelope(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts,
                                    const NodeAggregates& agg,
                                    const std::vector<double>& gamma_upper);

}  // namespace growthlab
