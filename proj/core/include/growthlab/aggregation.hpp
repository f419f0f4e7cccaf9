#pragma once

#include <vector>

#include "growthlab/aggregates.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"
#include "growthlab/policy.hpp"
#include "growthlab/rng.hpp"

namespace growthlab {

// Cross-section of the population at one tree node: wealth shares of
// effective output plus each agent's prospects class.  At the root of a
// total-depreciation economy the shares sum to 1 (wage shares and initial
// capital shares each partition their factor bill).
struct PopulationState {
  int node = 0;
  std::vector<int> class_of;
  std::vector<double> omega;

  std::size_t size() const { return omega.size(); }
  double total_wealth() const;
  void validate(std::size_t n_classes) const;  // throws std::invalid_argument
};

// One wealth bin: agents of one class inside [lower, upper), represented by
// one savings rate.  Interval endpoints are spaced so the (monotone) policy
// varies by at most eps across the interval; the representative is the rate
// at the bin's poorest member (left interval endpoint when unoccupied), so a
// single-member bin aggregates its member exactly.
struct WealthBin {
  int class_id;
  double lower, upper;
  double gamma_rep;            // policy at the poorest member
  std::vector<int> members;    // agent indices
  double wealth = 0.0;         // sum of member omegas
  double output_share = 0.0;   // wealth * W_node, the bin's "Y_m"
};

struct Binning {
  int node = 0;
  double eps = 0.0;
  std::vector<WealthBin> bins;  // all intervals, occupied or not

  std::size_t total_bins() const { return bins.size(); }
  std::size_t occupied_bins() const;
};

// Partition (0, 1] per class into intervals over which the savings rate
// varies by at most eps (cut points are located by bisection on the monotone
// interpolant, so within-interval spread is at most eps by construction).
// Agents are then dealt into their class's intervals.  eps >= 1 produces a
// single bin per class.
Binning bin_agents(const PopulationState& pop,
                   const std::vector<const Policy*>& policies,
                   const NodeAggregates& agg, int node, double eps);

// Exact vs binned aggregate capital demand, in goods units:
//   exact  = sum_j gamma(omega_j) * omega_j * W_node
//   binned = sum_m gamma_rep_m * Y_m
// |exact - binned| is bounded by eps * W_node when every member's rate is
// within eps of its bin representative.
struct AggregationError {
  double exact;
  double binned;
  double error;
  double bound;  // eps * W_node
};

AggregationError aggregation_error(const Binning& binning, const PopulationState& pop,
                                   const std::vector<const Policy*>& policies,
                                   const NodeAggregates& agg);

// Redistribute wealth inside each bin by random bounded pairwise transfers:
// bin totals and memberships are preserved and every share stays inside its
// bin interval.  Used to probe insensitivity to within-bin redistribution.
PopulationState reshuffle_within_bins(const Binning& binning, const PopulationState& pop,
                                      RngStream& rng, int transfers_per_bin = 32);

// Total variation of the savings rate along the solved grid, plus the value
// recomputed on a 4x-refined evaluation grid (their difference is zero for a
// monotone interpolant; a nonzero delta flags interpolation wiggle).
struct TotalVariation {
  double tv_grid;
  double tv_refined;
  double refinement_delta;
};

TotalVariation total_variation(const Policy& policy, int node);

// Centered finite-difference checks of policy slopes on the grid interior:
// minimum slope (monotonicity), the largest omega * gamma' product, and the
// largest omega^(1-sigma)-scaled slope composite.
struct DerivativeReport {
  double min_slope;
  double max_slope;
  double max_omega_times_slope;
  double max_scaled_composite;
};

DerivativeReport derivative_checks(const Policy& policy, int node, double sigma);

}  // namespace growthlab
