#pragma once

#include <vector>

#include "growthlab/event_tree.hpp"
#include "growthlab/rng.hpp"

namespace growthlab {

enum class EmploymentMode {
  exact_fraction,  // default: per-support counts fixed, assignment shuffled
  independent,     // per-agent draws, shares renormalized to sum to 1
};

// Realize employment shares for the whole population on one tree edge.
// class_of[j] gives agent j's prospects class.  Returns one real (pre
// wage-scale) share per agent; positive shares are scaled so the realized
// shares sum to exactly 1 (the wage bill is fully distributed).  If every
// class puts all mass at 0 the draw is identically zero (degenerate
// no-employment economies).  In independent mode an all-unemployed draw is
// resampled up to retry_cap times before throwing.
std::vector<double> draw_employment(const EventTree& tree, int child_node,
                                    const std::vector<int>& class_of,
                                    EmploymentMode mode, RngStream& rng,
                                    int retry_cap = 100);

}  // namespace growthlab
