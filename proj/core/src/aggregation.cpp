#include "growthlab/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace growthlab {

double PopulationState::total_wealth() const {
  return std::accumulate(omega.begin(), omega.end(), 0.0);
}

void PopulationState::validate(std::size_t n_classes) const {
  if (omega.size() != class_of.size())
    throw std::invalid_argument("PopulationState: omega/class size mismatch");
  if (omega.empty()) throw std::invalid_argument("PopulationState: empty population");
  for (std::size_t j = 0; j < omega.size(); ++j) {
    if (!(omega[j] >= 0.0))
      throw std::invalid_argument("PopulationState: negative wealth share");
    if (class_of[j] < 0 || class_of[j] >= static_cast<int>(n_classes))
      throw std::invalid_argument("PopulationState: agent class out of range");
  }
}

std::size_t Binning::occupied_bins() const {
  std::size_t n = 0;
  for (const auto& b : bins)
    if (!b.members.empty()) ++n;
  return n;
}

Binning bin_agents(const PopulationState& pop,
                   const std::vector<const Policy*>& policies,
                   const NodeAggregates& agg, int node, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("bin_agents: eps must be positive");
  Binning out;
  out.node = node;
  out.eps = eps;
  const double w_base = agg.wealth_base[static_cast<std::size_t>(node)];

  for (std::size_t cl = 0; cl < policies.size(); ++cl) {
    const Policy& pol = *policies[cl];
    // Cut points where the savings rate has risen by eps since the last cut,
    // located on the monotone interpolant itself.  Every interval's sup-inf
    // rate spread is then <= eps by construction, independent of the grid.
    std::vector<double> cuts{0.0};
    std::vector<double> reps;
    if (pol.terminal(node)) {
      reps.push_back(0.0);
    } else {
      const double hi_w = std::min(pol.grids[static_cast<std::size_t>(node)].max(), 1.0);
      double left_w = 0.0;
      double left_rate = pol.eval(node, 0.0);  // clamps to the grid floor
      reps.push_back(left_rate);
      const std::size_t max_cuts = static_cast<std::size_t>(2.0 / eps) + 16;
      while (pol.eval(node, hi_w) > left_rate + eps && cuts.back() < hi_w &&
             cuts.size() < max_cuts) {
        // Bisect for the eps-crossing; keep the side where the rate is still
        // below the target so the closing interval's spread stays <= eps.
        const double target = left_rate + eps;
        double lo = std::max(left_w, pol.grids[static_cast<std::size_t>(node)].min());
        double hi = hi_w;
        for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
          const double mid = 0.5 * (lo + hi);
          (pol.eval(node, mid) > target ? hi : lo) = mid;
        }
        cuts.push_back(lo);
        left_w = lo;
        left_rate = pol.eval(node, lo);
        reps.push_back(left_rate);
      }
    }
    cuts.push_back(1.0);
    for (std::size_t m = 0; m + 1 < cuts.size(); ++m) {
      WealthBin bin;
      bin.class_id = static_cast<int>(cl);
      bin.lower = cuts[m];
      bin.upper = cuts[m + 1];
      bin.gamma_rep = reps[m];
      out.bins.push_back(std::move(bin));
    }
  }

  // Deal agents into their class's intervals ([lower, upper); the final
  // interval of each class is closed at 1).
  for (std::size_t j = 0; j < pop.size(); ++j) {
    const double w = pop.omega[j];
    const int cl = pop.class_of[j];
    WealthBin* last = nullptr;
    bool placed = false;
    for (auto& bin : out.bins) {
      if (bin.class_id != cl) continue;
      last = &bin;
      if (w >= bin.lower && w < bin.upper) {
        bin.members.push_back(static_cast<int>(j));
        bin.wealth += w;
        placed = true;
        break;
      }
    }
    if (!placed) {
      if (!last || w > last->upper * (1.0 + 1e-9))
        throw std::invalid_argument("bin_agents: agent wealth outside (0,1]");
      last->members.push_back(static_cast<int>(j));  // omega == 1 exactly
      last->wealth += w;
    }
  }
  // Tighten each occupied bin's representative to the rate at its poorest
  // member.  The member still brackets the bin from the left, so the
  // within-bin spread (and hence the eps error bound) is preserved, and a
  // single-member bin aggregates its member exactly.
  for (auto& bin : out.bins) {
    if (bin.members.empty()) continue;
    double w_min = bin.upper;
    for (int j : bin.members) w_min = std::min(w_min, pop.omega[static_cast<std::size_t>(j)]);
    bin.gamma_rep = policies[static_cast<std::size_t>(bin.class_id)]->eval(node, w_min);
  }
  for (auto& bin : out.bins) bin.output_share = bin.wealth * w_base;
  return out;
}

AggregationError aggregation_error(const Binning& binning, const PopulationState& pop,
                                   const std::vector<const Policy*>& policies,
                                   const NodeAggregates& agg) {
  const double w_base = agg.wealth_base[static_cast<std::size_t>(binning.node)];
  double exact = 0.0;
  for (std::size_t j = 0; j < pop.size(); ++j) {
    const Policy& pol = *policies[static_cast<std::size_t>(pop.class_of[j])];
    exact += pol.eval(binning.node, pop.omega[j]) * pop.omega[j] * w_base;
  }
  double binned = 0.0;
  for (const auto& bin : binning.bins) binned += bin.gamma_rep * bin.output_share;
  return AggregationError{exact, binned, std::abs(exact - binned),
                          binning.eps * w_base};
}

PopulationState reshuffle_within_bins(const Binning& binning, const PopulationState& pop,
                                      RngStream& rng, int transfers_per_bin) {
  PopulationState out = pop;
  for (const auto& bin : binning.bins) {
    const auto k = bin.members.size();
    if (k < 2) continue;
    for (int t = 0; t < transfers_per_bin; ++t) {
      const auto a = static_cast<std::size_t>(bin.members[rng.next_below(k)]);
      const auto b = static_cast<std::size_t>(bin.members[rng.next_below(k)]);
      if (a == b) continue;
      // Transfer from a to b, bounded so both stay inside [lower, upper).
      const double upper_pad = bin.upper * (1.0 - 1e-12);
      const double room = std::min(out.omega[a] - bin.lower, upper_pad - out.omega[b]);
      if (!(room > 0.0)) continue;
      const double amount = room * rng.next_double();
      out.omega[a] -= amount;
      out.omega[b] += amount;
    }
  }
  return out;
}

TotalVariation total_variation(const Policy& policy, int node) {
  TotalVariation tv{0.0, 0.0, 0.0};
  if (policy.terminal(node)) return tv;
  const auto i = static_cast<std::size_t>(node);
  const auto& pts = policy.grids[i].points;
  const auto& rate = policy.gamma[i];
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    tv.tv_grid += std::abs(rate[k + 1] - rate[k]);
  // 4x refinement through the interpolant.
  double prev = rate.front();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    for (int s = 1; s <= 4; ++s) {
      const double x = pts[k] + (pts[k + 1] - pts[k]) * static_cast<double>(s) / 4.0;
      const double g = policy.eval(node, x);
      tv.tv_refined += std::abs(g - prev);
      prev = g;
    }
  }
  tv.refinement_delta = std::abs(tv.tv_refined - tv.tv_grid);
  return tv;
}

DerivativeReport derivative_checks(const Policy& policy, int node, double sigma) {
  DerivativeReport rep{0.0, 0.0, 0.0, 0.0};
  if (policy.terminal(node)) return rep;
  const auto i = static_cast<std::size_t>(node);
  const auto& x = policy.grids[i].points;
  const auto& y = policy.gamma[i];
  bool first = true;
  for (std::size_t k = 1; k + 1 < x.size(); ++k) {
    const double slope = (y[k + 1] - y[k - 1]) / (x[k + 1] - x[k - 1]);
    if (first || slope < rep.min_slope) rep.min_slope = slope;
    if (first || slope > rep.max_slope) rep.max_slope = slope;
    rep.max_omega_times_slope = std::max(rep.max_omega_times_slope, x[k] * slope);
    rep.max_scaled_composite =
        std::max(rep.max_scaled_composite, slope * std::pow(x[k], 1.0 - sigma));
    first = false;
  }
  return rep;
}

}  // namespace growthlab
