#include "growthlab/bounds.hpp"

#include <cmath>

namespace growthlab {

namespace {

// Shared shape of both recursions: X_n = (beta*alpha^(1-sigma) * E_n)^1/sigma,
// gamma_n = X_n/(1+X_n), where E_n sums weight * ratio^(1-sigma) * (1-g_c)^-sigma
// over children.  The two bounds differ only in the weights.
template <typename WeightFn>
std::vector<double> solve_recursion(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts, const NodeAggregates& agg,
                                    WeightFn&& weight) {
  const double sigma = params.sigma;
  const bool log_case = params.log_utility();
  std::vector<double> g(tree.nodes.size(), 0.0);
  for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
    const TreeNode& node = *it;
    if (tree.is_terminal(node.id)) continue;  // last period saves nothing
    const auto i = static_cast<std::size_t>(node.id);
    double expect = 0.0;
    for (std::size_t b = 0; b < node.children.size(); ++b) {
      const auto c = static_cast<std::size_t>(node.children[b]);
      const double w = node.child_prob[b] * weight(node.children[b]);
      if (w == 0.0) continue;
      if (log_case) {
        expect += w / (1.0 - g[c]);
      } else {
        const double ratio =
            agg.wealth_base[c] / (forecasts.omega[i] * agg.wealth_base[i]);
        expect += w * std::pow(ratio, 1.0 - sigma) * std::pow(1.0 - g[c], -sigma);
      }
    }
    double x;
    if (log_case) {
      x = params.beta * expect;
    } else {
      x = std::pow(params.beta * std::pow(params.alpha, 1.0 - sigma) * expect,
                   1.0 / sigma);
    }
    g[i] = x / (1.0 + x);
  }
  return g;
}

}  // namespace

std::vector<double> gamma_upper_bound(const EventTree& tree, const EconomyParams& params,
                                      const Forecasts& forecasts,
                                      const NodeAggregates& agg) {
  return solve_recursion(tree, params, forecasts, agg, [](int) { return 1.0; });
}

std::vector<double> gamma_upper_bound_log(const EventTree& tree,
                                          const EconomyParams& params) {
  // 1 - gbar_h = 1 / (1 + beta + ... + beta^(h-1)); horizon-only dependence.
  std::vector<double> g(tree.nodes.size(), 0.0);
  const int depth = tree.depth();
  std::vector<double> by_horizon(static_cast<std::size_t>(depth) + 1, 0.0);
  double geom = 1.0;  // 1 + beta + ... + beta^(h-1), starting at h = 1
  for (int h = 2; h <= depth; ++h) {
    geom += std::pow(params.beta, h - 1);
    by_horizon[static_cast<std::size_t>(h)] = 1.0 - 1.0 / geom;
  }
  for (const TreeNode& node : tree.nodes) {
    int h = depth - node.period + 1;
    if (tree.is_terminal(node.id)) h = 1;  // safety for ragged explicit trees
    g[static_cast<std::size_t>(node.id)] = by_horizon[static_cast<std::size_t>(h)];
  }
  return g;
}

GammaLowerBound gamma_lower_bound(const EventTree& tree, const EconomyParams& params,
                                  const Forecasts& forecasts, const NodeAggregates& agg,
                                  int class_id) {
  const auto& cl = tree.classes[static_cast<std::size_t>(class_id)];
  GammaLowerBound out;
  out.value = solve_recursion(tree, params, forecasts, agg, [&](int child) {
    return cl.edge_dist[static_cast<std::size_t>(child)].mass_at_zero();
  });
  // A non-terminal node whose bound collapsed to exactly 0 lost all
  // unemployment mass on its outgoing edges: flagged, not an error.
  out.degenerate.assign(tree.nodes.size(), false);
  for (const TreeNode& node : tree.nodes)
    if (!tree.is_terminal(node.id))
      out.degenerate[static_cast<std::size_t>(node.id)] =
          out.value[static_cast<std::size_t>(node.id)] == 0.0;
  return out;
}

}  // namespace growthlab
