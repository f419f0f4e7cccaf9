#include "growthlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace growthlab {

namespace {

constexpr double kGammaLo = 1e-12;
constexpr double kGammaHi = 1.0 - 1e-12;

// Flattened continuation branch: one entry per (child, employment support
// point) with positive weight.
struct Branch {
  int child;
  double weight;     // p(child) * q(e)
  double e_eff;      // employment share scaled into effective units
  double ratio_pow;  // (W_child / W_node)^(1-sigma); unused on the log branch
};

struct NodeContext {
  double omega_fc;   // forecast Omega_n
  double coeff;      // beta * alpha / Omega_n
  std::vector<Branch> branches;
};

NodeContext make_context(const AgentProblem& pb, int node) {
  const auto i = static_cast<std::size_t>(node);
  const TreeNode& n = pb.tree->nodes[i];
  const auto& cls = pb.tree->classes[static_cast<std::size_t>(pb.class_id)];
  NodeContext ctx;
  ctx.omega_fc = pb.forecasts->omega[i];
  ctx.coeff = pb.params->beta * pb.params->alpha / ctx.omega_fc;
  const bool log_case = pb.params->log_utility();
  for (std::size_t b = 0; b < n.children.size(); ++b) {
    const auto c = static_cast<std::size_t>(n.children[b]);
    const auto& dist = cls.edge_dist[c];
    const double ratio_pow =
        log_case ? 1.0
                 : std::pow(pb.agg->wealth_base[c] / pb.agg->wealth_base[i],
                            1.0 - pb.params->sigma);
    for (std::size_t k = 0; k < dist.support.size(); ++k) {
      const double w = n.child_prob[b] * dist.prob[k];
      if (w == 0.0) continue;
      ctx.branches.push_back(Branch{n.children[b], w,
                                    dist.support[k] * pb.agg->wage_scale[c],
                                    ratio_pow});
    }
  }
  return ctx;
}

// Scale-free FOC residual; see the header for the formula.  Strictly
// increasing in gamma with the unemployment asymptote at gamma -> 0.
double residual_impl(const AgentProblem& pb, const Policy& policy,
                     const NodeContext& ctx, double omega, double gamma) {
  const double sigma = pb.params->sigma;
  const bool log_case = pb.params->log_utility();
  const double invest = pb.params->alpha * gamma * omega / ctx.omega_fc;
  double expect = 0.0;
  for (const Branch& br : ctx.branches) {
    const double omega_next = invest + (1.0 - pb.params->alpha) * br.e_eff;
    if (!(omega_next > 0.0)) return -std::numeric_limits<double>::infinity();
    const double keep = 1.0 - policy.eval(br.child, omega_next);
    const double marginal_arg = omega / (omega_next * keep);
    expect += log_case ? br.weight * marginal_arg
                       : br.weight * br.ratio_pow * std::pow(marginal_arg, sigma);
  }
  const double lhs = log_case ? 1.0 / (1.0 - gamma) : std::pow(1.0 - gamma, -sigma);
  const double rhs = ctx.coeff * expect;
  if (std::isinf(rhs)) return -std::numeric_limits<double>::infinity();
  return lhs - rhs;
}

struct PointSolution {
  double gamma;
  double residual;   // at the returned gamma; 0 is unattainable at corners
  int iterations;
  int boundary;      // -1 pinned low, +1 pinned high, 0 interior
};

PointSolution solve_point(const AgentProblem& pb, const Policy& policy,
                          const NodeContext& ctx, double omega,
                          const SolverOptions& opts) {
  double a = kGammaLo, b = kGammaHi;
  double ra = residual_impl(pb, policy, ctx, omega, a);
  double rb = residual_impl(pb, policy, ctx, omega, b);
  if (ra >= 0.0) return PointSolution{0.0, ra, 0, -1};  // corner: save nothing
  if (rb <= 0.0) return PointSolution{b, rb, 0, +1};    // corner: save almost all

  int iters = 0;
  while (b - a > opts.foc_tol && iters < opts.max_bisect) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;  // bracket at machine resolution
    const double rm = residual_impl(pb, policy, ctx, omega, mid);
    ++iters;
    if (rm < 0.0) {
      a = mid;
      ra = rm;
    } else {
      b = mid;
      rb = rm;
    }
  }

  double g = 0.5 * (a + b);
  double rg = residual_impl(pb, policy, ctx, omega, g);
  if (opts.secant_polish) {
    // A few derivative-free steps squeeze the root to machine precision;
    // the residual is smooth and strictly increasing inside the bracket.
    double x0 = a, r0 = ra, x1 = b, r1 = rb;
    for (int k = 0; k < 4; ++k) {
      if (r1 == r0) break;
      double x2 = x1 - r1 * (x1 - x0) / (r1 - r0);
      if (!(x2 > a) || !(x2 < b)) break;
      const double r2 = residual_impl(pb, policy, ctx, omega, x2);
      ++iters;
      x0 = x1;
      r0 = r1;
      x1 = x2;
      r1 = r2;
      if (std::abs(r2) <= std::abs(rg)) {
        g = x2;
        rg = r2;
      }
      if (r2 == 0.0) break;
    }
  }
  return PointSolution{g, rg, iters, 0};
}

}  // namespace

double foc_residual(const AgentProblem& pb, const Policy& policy, int node,
                    double omega, double gamma) {
  if (pb.tree->is_terminal(node))
    throw std::invalid_argument("foc_residual: terminal nodes have no savings choice");
  if (!(omega > 0.0)) throw std::invalid_argument("foc_residual: omega must be positive");
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("foc_residual: gamma must lie in [0,1)");
  const NodeContext ctx = make_context(pb, node);
  return residual_impl(pb, policy, ctx, omega, gamma);
}

std::pair<Policy, SolveReport> solve_policy(const AgentProblem& pb,
                                            const SolverOptions& opts) {
  const EventTree& tree = *pb.tree;
  const std::size_t n_nodes = tree.nodes.size();

  Policy policy;
  policy.class_id = pb.class_id;
  policy.scenario_hash = opts.scenario_hash;
  policy.foc_tol = opts.foc_tol;
  policy.grids.resize(n_nodes);
  policy.gamma.resize(n_nodes);
  policy.slopes.resize(n_nodes);

  SolveReport report;
  report.grid_points = opts.grid_points;

  const std::vector<double> upper =
      gamma_upper_bound(tree, *pb.params, *pb.forecasts, *pb.agg);
  const std::vector<double> envelope =
      wealth_envelope(tree, *pb.params, *pb.forecasts, *pb.agg, upper);

  // Leafward order: parents precede children by construction, so reverse id
  // order visits every child before its parent.
  for (std::size_t idx = n_nodes; idx-- > 0;) {
    const int node = static_cast<int>(idx);
    if (tree.is_terminal(node)) continue;  // terminal: consume everything

    const auto& cls = tree.classes[static_cast<std::size_t>(pb.class_id)];
    std::vector<double> landmarks;
    for (int child : tree.nodes[idx].children) {
      const auto c = static_cast<std::size_t>(child);
      for (double e : cls.edge_dist[c].support) {
        if (e <= 0.0) continue;
        const double e_eff = e * pb.agg->wage_scale[c];
        landmarks.push_back(e_eff);
        landmarks.push_back((1.0 - pb.params->alpha) * e_eff);
      }
    }
    policy.grids[idx] = make_wealth_grid(opts.omega_min, envelope[idx],
                                         opts.grid_points, landmarks);

    const NodeContext ctx = make_context(pb, node);
    const auto& pts = policy.grids[idx].points;
    auto& gam = policy.gamma[idx];
    gam.resize(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const PointSolution sol = solve_point(pb, policy, ctx, pts[k], opts);
      gam[k] = sol.gamma;
      report.bisection_iterations += sol.iterations;
      if (sol.boundary < 0)
        ++report.boundary_low;
      else if (sol.boundary > 0)
        ++report.boundary_high;
      else
        report.max_residual = std::max(report.max_residual, std::abs(sol.residual));
    }
    policy.finalize_node(node);
    ++report.nodes_solved;
  }
  return {std::move(policy), report};
}

ValueDerivative value_and_derivative(const AgentProblem& pb, const Policy& policy,
                                     int node, double omega) {
  if (!(omega > 0.0))
    throw std::domain_error("value_and_derivative: omega must be positive");
  const auto i = static_cast<std::size_t>(node);
  const double w_base = pb.agg->wealth_base[i];
  const double sigma = pb.params->sigma;
  const double gamma = policy.eval(node, omega);
  const double kept = omega * (1.0 - gamma);  // omega - s*Omega

  // Value by forward substitution of the policy over the subtree.
  double value = crra_utility(kept * w_base, sigma);
  if (!pb.tree->is_terminal(node)) {
    const TreeNode& n = pb.tree->nodes[i];
    const auto& cls = pb.tree->classes[static_cast<std::size_t>(pb.class_id)];
    const double om = pb.forecasts->omega[i];
    for (std::size_t b = 0; b < n.children.size(); ++b) {
      const auto c = static_cast<std::size_t>(n.children[b]);
      const auto& dist = cls.edge_dist[c];
      double cont = 0.0;
      for (std::size_t k = 0; k < dist.support.size(); ++k) {
        if (dist.prob[k] == 0.0) continue;
        const double e_eff = dist.support[k] * pb.agg->wage_scale[c];
        const double omega_next = pb.params->alpha * gamma * omega / om +
                                  (1.0 - pb.params->alpha) * e_eff;
        cont += dist.prob[k] *
                value_and_derivative(pb, policy, n.children[b], omega_next).value;
      }
      value += pb.params->beta * n.child_prob[b] * cont;
    }
  }

  // Envelope derivative and the closed-form second derivative.
  ValueDerivative out;
  out.value = value;
  const double keep_slope =
      gamma + omega * policy.eval_derivative(node, omega);  // d(s*Omega)/d omega
  if (pb.params->log_utility()) {
    out.derivative = 1.0 / kept;
    out.second = (keep_slope - 1.0) / (kept * kept);
  } else {
    const double scale = std::pow(w_base, 1.0 - sigma);
    out.derivative = scale / std::pow(kept, sigma);
    out.second = sigma * scale * (keep_slope - 1.0) / std::pow(kept, 1.0 + sigma);
  }
  return out;
}

}  // namespace growthlab
