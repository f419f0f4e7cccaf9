#pragma once

#include <vector>

#include "growthlab/aggregates.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"

namespace growthlab {

// Upper bounds on the savings rate: the no-employment policy.  Solves the
// wealth-independent recursion leafward-to-rootward,
//   1/(1 - gbar_n) = 1 + ( beta * alpha^(1-sigma) *
//        sum_children p * (W_c / (Omega_n W_n))^(1-sigma) * (1-gbar_c)^-sigma )^(1/sigma),
// with gbar = 0 at terminal nodes.  For sigma == 1 the output ratios drop out
// and 1 - gbar equals 1/(1 + beta + ... + beta^(h-1)) in closed form.
std::vector<double> gamma_upper_bound(const EventTree& tree, const EconomyParams& params,
                                      const Forecasts& forecasts,
                                      const NodeAggregates& agg);

// Closed-form log-utility values of the same recursion, indexed by node and
// depending only on the remaining horizon.  Used to seed the auctioneer.
std::vector<double> gamma_upper_bound_log(const EventTree& tree, const EconomyParams& params);

// Lower bounds: same recursion with the expectation restricted to the
// unemployment branch (terms are weighted by the class's mass at e == 0, an
// unnormalized expectation).  Class-specific.  On edges with no unemployment
// mass the bound degenerates to 0; `degenerate[n]` flags nodes whose bound
// lost all mass somewhere below.
struct GammaLowerBound {
  std::vector<double> value;
  std::vector<bool> degenerate;
};

GammaLowerBound gamma_lower_bound(const EventTree& tree, const EconomyParams& params,
                                  const Forecasts& forecasts, const NodeAggregates& agg,
                                  int class_id);

}  // namespace growthlab
