#include "growthlab/aggregates.hpp"

#include <cmath>
#include <stdexcept>

namespace growthlab {

NodeAggregates propagate_aggregates(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts,
                                    bool use_effective_path) {
  if (forecasts.omega.size() != tree.nodes.size())
    throw std::invalid_argument("propagate_aggregates: forecasts size mismatch");
  if (!use_effective_path && params.delta != 1.0)
    throw std::invalid_argument(
        "propagate_aggregates: the direct path requires total depreciation");

  const std::size_t n = tree.nodes.size();
  NodeAggregates agg;
  agg.output.assign(n, 0.0);
  agg.wealth_base.assign(n, 0.0);
  agg.wage_scale.assign(n, 0.0);
  agg.capital.assign(n, 0.0);

  agg.output[0] = params.y1;
  agg.wealth_base[0] = params.y1;  // no pre-period capital carry at the root
  agg.wage_scale[0] = 1.0;

  for (std::size_t i = 0; i < n; ++i) {
    const TreeNode& node = tree.nodes[i];
    if (tree.is_terminal(node.id)) continue;
    const double om = forecasts.omega[i];
    if (!(om > 0.0) || !(om < 1.0))
      throw std::invalid_argument("propagate_aggregates: omega must lie in (0,1)");
    agg.capital[i] = om * agg.wealth_base[i];
    for (int child : node.children) {
      const auto c = static_cast<std::size_t>(child);
      agg.output[c] = tree.nodes[c].shock * std::pow(agg.capital[i], params.alpha) *
                      std::pow(params.labor_norm, 1.0 - params.alpha);
      if (use_effective_path) {
        const EffectiveQuantities eff = effective_transform(
            agg.output[c], agg.wealth_base[i], om, params.delta, params.alpha);
        agg.wealth_base[c] = eff.y_eff;
        agg.wage_scale[c] = eff.wage_scale;
      } else {
        agg.wealth_base[c] = agg.output[c];
        agg.wage_scale[c] = 1.0;
      }
    }
  }
  return agg;
}

std::vector<double> wealth_envelope(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts,
                                    const NodeAggregates& agg,
                                    const std::vector<double>& gamma_upper) {
  (void)agg;
  std::vector<double> env(tree.nodes.size(), 0.0);
  env[0] = 1.0;
  for (const TreeNode& node : tree.nodes) {
    if (tree.is_terminal(node.id)) continue;
    const auto i = static_cast<std::size_t>(node.id);
    const double om = forecasts.omega[i];
    // Policy envelope via the savings-rate upper bound, and the simulation
    // bound s~ <= 1 (an agent can hold at most all the capital).
    const double invest_cap =
        std::max(gamma_upper[i] * env[i] / om, 1.0) * (1.0 + 1e-9);
    for (int child : node.children) {
      const auto c = static_cast<std::size_t>(child);
      double e_max = 0.0;
      for (const auto& cl : tree.classes)
        e_max = std::max(e_max, cl.edge_dist[c].max_support());
      env[c] = params.alpha * invest_cap + (1.0 - params.alpha) * e_max;
    }
  }
  return env;
}

}  // namespace growthlab
