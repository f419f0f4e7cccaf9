#include "growthlab/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace growthlab {

namespace {

struct Problem {
  const EventTree* tree;
  const EconomyParams* params;
  const Forecasts* forecasts;
  const NodeAggregates* agg;
  const ProspectsClass* cls;
  const OracleOptions* opts;
};

double best_value(const Problem& pb, int node, double omega);

// Discounted expected utility of saving rate g at (node, omega), with all
// future choices re-optimized by recursion.
double evaluate(const Problem& pb, int node, double omega, double g) {
  const auto i = static_cast<std::size_t>(node);
  const double w_base = pb.agg->wealth_base[i];
  const double consumption = (1.0 - g) * omega * w_base;
  double total = crra_utility(consumption, pb.params->sigma);
  if (!std::isfinite(total)) return -std::numeric_limits<double>::infinity();
  const TreeNode& n = pb.tree->nodes[i];
  const double om = pb.forecasts->omega[i];
  for (std::size_t b = 0; b < n.children.size(); ++b) {
    const auto c = static_cast<std::size_t>(n.children[b]);
    const auto& dist = pb.cls->edge_dist[c];
    double cont = 0.0;
    for (std::size_t k = 0; k < dist.support.size(); ++k) {
      if (dist.prob[k] == 0.0) continue;
      const double e_eff = dist.support[k] * pb.agg->wage_scale[c];
      const double omega_next =
          pb.params->alpha * g * omega / om + (1.0 - pb.params->alpha) * e_eff;
      cont += dist.prob[k] * best_value(pb, n.children[b], omega_next);
    }
    total += pb.params->beta * n.child_prob[b] * cont;
    if (!std::isfinite(total)) return -std::numeric_limits<double>::infinity();
  }
  return total;
}

struct Best {
  double gamma;
  double value;
};

Best optimize(const Problem& pb, int node, double omega) {
  if (pb.tree->is_terminal(node)) {
    const double w_base = pb.agg->wealth_base[static_cast<std::size_t>(node)];
    return Best{0.0, crra_utility(omega * w_base, pb.params->sigma)};
  }
  // Dense scan for a bracket around the maximum.  Non-finite values (zero
  // consumption on a positive-probability branch) are simply discarded.
  const int m = pb.opts->scan_points;
  double best_g = std::numeric_limits<double>::quiet_NaN();
  double best_v = -std::numeric_limits<double>::infinity();
  int best_k = -1;
  for (int k = 1; k < m; ++k) {
    const double g = static_cast<double>(k) / static_cast<double>(m);
    const double v = evaluate(pb, node, omega, g);
    if (v > best_v) {
      best_v = v;
      best_g = g;
      best_k = k;
    }
  }
  if (best_k < 0)
    throw std::runtime_error("oracle: no admissible savings rate found");
  // Golden-section refinement inside the bracketing neighbors.
  double lo = static_cast<double>(best_k - 1) / static_cast<double>(m);
  double hi = static_cast<double>(best_k + 1) / static_cast<double>(m);
  lo = std::max(lo, 1e-14);
  hi = std::min(hi, 1.0 - 1e-14);
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = evaluate(pb, node, omega, x1);
  double f2 = evaluate(pb, node, omega, x2);
  while (b - a > pb.opts->refine_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = evaluate(pb, node, omega, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = evaluate(pb, node, omega, x1);
    }
  }
  const double g_star = 0.5 * (a + b);
  double v_star = evaluate(pb, node, omega, g_star);
  if (best_v > v_star) {  // keep the scan winner if refinement went nowhere
    v_star = best_v;
    return Best{best_g, v_star};
  }
  return Best{g_star, v_star};
}

double best_value(const Problem& pb, int node, double omega) {
  return optimize(pb, node, omega).value;
}

}  // namespace

OracleResult brute_force_gamma(const EventTree& tree, const EconomyParams& params,
                               const Forecasts& forecasts, const NodeAggregates& agg,
                               int class_id, int node, double omega,
                               const OracleOptions& opts) {
  const int remaining = tree.depth() - tree.nodes[static_cast<std::size_t>(node)].period + 1;
  if (remaining > opts.max_depth)
    throw std::invalid_argument("brute_force_gamma: instance exceeds the oracle depth cap");
  if (!(omega > 0.0))
    throw std::invalid_argument("brute_force_gamma: omega must be positive");
  Problem pb{&tree, &params, &forecasts, &agg,
             &tree.classes[static_cast<std::size_t>(class_id)], &opts};
  const Best b = optimize(pb, node, omega);
  return OracleResult{b.gamma, b.value};
}

double oracle_value(const EventTree& tree, const EconomyParams& params,
                    const Forecasts& forecasts, const NodeAggregates& agg,
                    int class_id, int node, double omega, double gamma,
                    const OracleOptions& opts) {
  const int remaining = tree.depth() - tree.nodes[static_cast<std::size_t>(node)].period + 1;
  if (remaining > opts.max_depth)
    throw std::invalid_argument("oracle_value: instance exceeds the oracle depth cap");
  if (!(omega > 0.0))
    throw std::invalid_argument("oracle_value: omega must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("oracle_value: gamma must lie in [0,1)");
  Problem pb{&tree, &params, &forecasts, &agg,
             &tree.classes[static_cast<std::size_t>(class_id)], &opts};
  if (tree.is_terminal(node)) {
    const double w_base = agg.wealth_base[static_cast<std::size_t>(node)];
    return crra_utility(omega * w_base, params.sigma);
  }
  return evaluate(pb, node, omega, gamma);
}

PolicyComparison compare_policy(const Policy& policy, const EventTree& tree,
                                const EconomyParams& params, const Forecasts& forecasts,
                                const NodeAggregates& agg, int class_id, int node,
                                const std::vector<double>& probe_omegas,
                                const OracleOptions& opts) {
  PolicyComparison cmp;
  for (double omega : probe_omegas) {
    const OracleResult ref =
        brute_force_gamma(tree, params, forecasts, agg, class_id, node, omega, opts);
    const double diff = std::abs(policy.eval(node, omega) - ref.gamma);
    if (diff > cmp.max_abs_diff) {
      cmp.max_abs_diff = diff;
      cmp.worst_omega = omega;
    }
  }
  return cmp;
}

}  // namespace growthlab
