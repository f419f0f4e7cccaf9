#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "growthlab/bounds.hpp"
#include "growthlab/oracle.hpp"
#include "growthlab/policy.hpp"
#include "growthlab/solver.hpp"

#include "helpers.hpp"

using namespace growthlab;
using namespace testlab;

namespace {

// The worked two-period instance used throughout: log utility, one class,
// unemployed w.p. 0.1 else wage share 0.15, root forecast Omega = 0.3.
struct WorkedInstance {
  EventTree tree = two_point_chain(2, 0.1, 0.15);
  EconomyParams params;
  SolvedClass solved;

  WorkedInstance() {
    params.alpha = 0.36;
    params.beta = 0.95;
    params.sigma = 1.0;
    params.delta = 1.0;
    params.horizon = 2;
    params.n_agents = 1;
    params.y1 = 1.0;
    solved = solve_fixed(tree, params, flat_forecasts(tree, 0.3));
  }

  // Independent restatement of the optimality condition for this instance
  // (derived by hand from the primitives, not from the solver formula):
  //   residual(g) = 1/(1-g) - 1.14 * [0.02/(0.24 g) + 0.18/(0.24 g + 0.096)]
  // with 1.14 = beta*alpha/Omega, 0.24 = alpha*omega/Omega at omega = 0.2,
  // and 0.096 = (1-alpha)*0.15.
  static double hand_residual(double g) {
    return 1.0 / (1.0 - g) -
           1.14 * (0.02 / (0.24 * g) + 0.18 / (0.24 * g + 0.096));
  }
};

// Root of the optimality condition at (node 0, omega) by plain bisection on
// foc_residual -- no interpolation, independent of the tabulated policy.
double resolve_gamma(const AgentProblem& pb, const Policy& pol, double omega) {
  double a = 1e-12, b = 1.0 - 1e-12;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double mid = 0.5 * (a + b);
    (foc_residual(pb, pol, 0, omega, mid) < 0.0 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("log closed form: no-employment savings rates, all horizons") {
  for (int horizon = 2; horizon <= 6; ++horizon) {
    const EventTree tree = two_point_chain(horizon, 0.1, 0.125);
    for (double beta : {0.9, 0.95, 0.99}) {
      EconomyParams p;
      p.beta = beta;
      p.horizon = horizon;
      const std::vector<double> gbar = gamma_upper_bound_log(tree, p);
      for (const TreeNode& n : tree.nodes) {
        const int remaining = horizon - n.period + 1;
        CHECK(gbar[static_cast<std::size_t>(n.id)] ==
              doctest::Approx(log_gbar_closed_form(beta, remaining)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sigma = 1 general upper bound collapses to the log closed form") {
  const EventTree tree = binary_tree(3, 0.1, 0.2);
  EconomyParams p;
  p.sigma = 1.0;
  p.horizon = 3;
  const Forecasts fc = flat_forecasts(tree, 0.3);
  const NodeAggregates agg = propagate_aggregates(tree, p, fc);
  const auto general = gamma_upper_bound(tree, p, fc, agg);
  const auto closed = gamma_upper_bound_log(tree, p);
  REQUIRE(general.size() == closed.size());
  for (std::size_t i = 0; i < general.size(); ++i)
    CHECK(general[i] == doctest::Approx(closed[i]).epsilon(1e-12));
}

TEST_CASE("sigma = 2 upper bound on a ratio-2 deterministic step") {
  // Child output engineered so W_child / (Omega * W_root) == 2 exactly:
  // z_child = 2^alpha with Omega = 1/2 and y1 = 1.
  EconomyParams p;
  p.alpha = 0.36;
  p.beta = 0.9;
  p.sigma = 2.0;
  p.horizon = 2;
  const EventTree tree =
      chain_tree(2, {0.0}, {1.0}, {1.0, std::pow(2.0, 0.36)});
  const Forecasts fc = flat_forecasts(tree, 0.5);
  const NodeAggregates agg = propagate_aggregates(tree, p, fc);
  CHECK(agg.wealth_base[1] == doctest::Approx(1.0).epsilon(1e-14));

  const auto gbar = gamma_upper_bound(tree, p, fc, agg);
  // 1/(1-gbar) = 1 + sqrt(beta/alpha * (1/ratio)) = 1 + sqrt(1.25)
  const double expected = 1.0 - 1.0 / (1.0 + std::sqrt(1.25));
  CHECK(gbar[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(gbar[1] == 0.0);  // terminal

  // The no-employment policy is wealth independent and equals the bound.
  SolvedClass sc = solve_fixed(tree, p, fc);
  const auto& rates = sc.policy.gamma[0];
  for (double g : rates) CHECK(g == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log no-employment policy equals beta/(1+beta) at every grid point") {
  EconomyParams p;
  p.beta = 0.95;
  p.horizon = 2;
  const EventTree tree = no_employment_chain(2);
  SolvedClass sc = solve_fixed(tree, p, flat_forecasts(tree, 0.4));
  const double expected = 0.95 / 1.95;
  for (double g : sc.policy.gamma[0])
    CHECK(g == doctest::Approx(expected).epsilon(1e-12));
  CHECK(sc.report.nodes_solved == 1);
  CHECK(sc.policy.terminal(1));
}

TEST_CASE("lower bound: coincides with the upper bound when unemployment is sure") {
  const EventTree tree = no_employment_chain(3);
  EconomyParams p;
  p.horizon = 3;
  const Forecasts fc = flat_forecasts(tree, 0.3);
  const NodeAggregates agg = propagate_aggregates(tree, p, fc);
  const auto upper = gamma_upper_bound(tree, p, fc, agg);
  const GammaLowerBound lower = gamma_lower_bound(tree, p, fc, agg, 0);
  for (std::size_t i = 0; i < upper.size(); ++i) {
    CHECK(lower.value[i] == doctest::Approx(upper[i]).epsilon(1e-12));
    CHECK_FALSE(lower.degenerate[i]);
  }
}

TEST_CASE("lower bound: closed form at u = 0.1 and sandwich on the solved policy") {
  WorkedInstance w;
  const NodeAggregates& agg = w.solved.agg;
  const GammaLowerBound lower =
      gamma_lower_bound(w.tree, w.params, w.solved.forecasts, agg, 0);
  // 1/(1 - lb) = 1 + beta * u  =>  lb = 0.095 / 1.095
  CHECK(lower.value[0] == doctest::Approx(0.095 / 1.095).epsilon(1e-12));
  CHECK_FALSE(lower.degenerate[0]);

  const auto upper =
      gamma_upper_bound(w.tree, w.params, w.solved.forecasts, agg);
  const auto& grid = w.solved.policy.grids[0].points;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double g = w.solved.policy.gamma[0][k];
    CHECK(g >= lower.value[0] - 1e-12);
    CHECK(g <= upper[0] + 1e-12);
  }
}

TEST_CASE("lower bound degenerates when some edge has no unemployment mass") {
  const EventTree tree = chain_tree(2, {0.125}, {1.0});  // surely employed
  EconomyParams p;
  p.horizon = 2;
  const Forecasts fc = flat_forecasts(tree, 0.3);
  const NodeAggregates agg = propagate_aggregates(tree, p, fc);
  const GammaLowerBound lower = gamma_lower_bound(tree, p, fc, agg, 0);
  CHECK(lower.value[0] == 0.0);
  CHECK(lower.degenerate[0]);
  CHECK_FALSE(lower.degenerate[1]);  // terminal nodes have nothing below
}

TEST_CASE("optimality-condition residual on the worked instance") {
  WorkedInstance w;
  const AgentProblem pb = w.solved.problem(w.tree);
  const Policy& pol = w.solved.policy;

  SUBCASE("matches the hand-derived restatement and brackets the root") {
    const double r32 = foc_residual(pb, pol, 0, 0.2, 0.32);
    const double r325 = foc_residual(pb, pol, 0, 0.2, 0.325);
    CHECK(r32 == doctest::Approx(WorkedInstance::hand_residual(0.32)).epsilon(1e-12));
    CHECK(r325 == doctest::Approx(WorkedInstance::hand_residual(0.325)).epsilon(1e-12));
    CHECK(r32 < 0.0);    // below the optimum
    CHECK(r325 > 0.0);   // above it
    CHECK(pol.eval(0, 0.2) > 0.32);
    CHECK(pol.eval(0, 0.2) < 0.325);
  }

  SUBCASE("monotone in gamma, asymptotes at the corners") {
    double prev = foc_residual(pb, pol, 0, 0.2, 0.05);
    for (double g : {0.2, 0.4, 0.6, 0.8, 0.95}) {
      const double r = foc_residual(pb, pol, 0, 0.2, g);
      CHECK(r > prev);
      prev = r;
    }
    CHECK(foc_residual(pb, pol, 0, 0.2, 1e-9) < -1e3);        // unemployment asymptote
    CHECK(foc_residual(pb, pol, 0, 0.2, 1.0 - 1e-9) > 1e6);   // consumption asymptote
  }

  SUBCASE("residual at the tabulated policy is numerically zero") {
    const auto& grid = pol.grids[0].points;
    for (std::size_t k = 0; k < grid.size(); k += 37) {
      const double g = pol.gamma[0][k];
      CHECK(std::abs(foc_residual(pb, pol, 0, grid[k], g)) <= 1e-8);
    }
    CHECK(w.solved.report.max_residual <= 1e-8);
  }

  SUBCASE("rejects terminal nodes and out-of-domain arguments") {
    CHECK_THROWS_AS(foc_residual(pb, pol, 1, 0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(foc_residual(pb, pol, 0, -0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(foc_residual(pb, pol, 0, 0.2, 1.0), std::invalid_argument);
  }
}

TEST_CASE("solved policy: monotone, inside [0,1), zero at terminal nodes") {
  const EventTree tree = two_point_chain(3, 0.1, 0.125);
  EconomyParams p;
  p.horizon = 3;
  p.sigma = 2.0;
  SolvedClass sc = solve_fixed(tree, p, log_bound_forecasts(tree, p));
  for (const TreeNode& n : tree.nodes) {
    const auto i = static_cast<std::size_t>(n.id);
    if (tree.is_terminal(n.id)) {
      CHECK(sc.policy.terminal(n.id));
      continue;
    }
    const auto& g = sc.policy.gamma[i];
    REQUIRE(g.size() >= 2);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(g[k] >= 0.0);
      CHECK(g[k] < 1.0);
      if (k > 0) CHECK(g[k] >= g[k - 1] - 1e-12);
    }
  }
}

TEST_CASE("tabulated rate agrees with a direct bisection re-solve") {
  WorkedInstance w;
  const AgentProblem pb = w.solved.problem(w.tree);
  for (double omega : {0.05, 0.1, 0.2, 0.5, 0.9}) {
    const double direct = resolve_gamma(pb, w.solved.policy, omega);
    // Between knots the tabulated policy carries monotone-interpolation
    // error of order (grid spacing)^2, well above solver tolerance.
    CHECK(w.solved.policy.eval(0, omega) ==
          doctest::Approx(direct).epsilon(2e-5));
  }
  // At grid points themselves the agreement is at solver tolerance.
  const auto& grid = w.solved.policy.grids[0].points;
  for (std::size_t k = 0; k < grid.size(); k += 53) {
    const double direct = resolve_gamma(pb, w.solved.policy, grid[k]);
    CHECK(std::abs(w.solved.policy.gamma[0][k] - direct) <= 1e-9);
  }
}

TEST_CASE("policy slope matches the implicitly differentiated optimality condition") {
  WorkedInstance w;
  const AgentProblem pb = w.solved.problem(w.tree);
  const double omega = 0.2;
  const double g = resolve_gamma(pb, w.solved.policy, omega);

  // Implicit function theorem on F(g, w) = 0 for this instance:
  //   F   = 1/(1-g) - C*w*sum_k q_k / (c1*g*w + b_k),   C = beta*alpha/Omega,
  //   F_g = 1/(1-g)^2 + C*c1*w^2 * sum_k q_k / w'_k^2,  c1 = alpha/Omega,
  //   F_w = -C * sum_k q_k b_k / w'_k^2.
  const double C = 0.95 * 0.36 / 0.3;
  const double c1 = 0.36 / 0.3;
  const double q[2] = {0.1, 0.9};
  const double b[2] = {0.0, 0.64 * 0.15};
  double f_g = 1.0 / ((1.0 - g) * (1.0 - g));
  double f_w = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double wn = c1 * g * omega + b[k];
    f_g += C * c1 * omega * omega * q[k] / (wn * wn);
    f_w += -C * q[k] * b[k] / (wn * wn);
  }
  const double implicit_slope = -f_w / f_g;

  // Finite differences of freshly re-solved roots (no interpolation).
  const double h = 1e-6;
  const double fd = (resolve_gamma(pb, w.solved.policy, omega + h) -
                     resolve_gamma(pb, w.solved.policy, omega - h)) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(implicit_slope).epsilon(1e-6));
  CHECK(w.solved.policy.eval_derivative(0, omega) ==
        doctest::Approx(implicit_slope).epsilon(1e-3));
  CHECK(implicit_slope > 0.0);  // richer agents save at a higher rate here
}

TEST_CASE("value function: envelope derivative and concavity") {
  for (double sigma : {1.0, 2.0}) {
    EconomyParams p;
    p.sigma = sigma;
    p.horizon = 2;
    const EventTree tree = two_point_chain(2, 0.1, 0.15);
    SolvedClass sc = solve_fixed(tree, p, flat_forecasts(tree, 0.3));
    const AgentProblem pb = sc.problem(tree);

    const auto& grid = sc.policy.grids[0].points;
    for (std::size_t k = 5; k + 5 < grid.size(); k += 29) {
      const double omega = grid[k];
      // Relative step: the grid is log-spaced and V' grows like
      // omega^-sigma, so an absolute step would swamp small points with
      // truncation error.
      const double h = 1e-5 * omega;
      if (omega - h <= grid.front() || omega + h >= grid.back()) continue;
      const ValueDerivative vd = value_and_derivative(pb, sc.policy, 0, omega);
      const double up = value_and_derivative(pb, sc.policy, 0, omega + h).value;
      const double dn = value_and_derivative(pb, sc.policy, 0, omega - h).value;
      const double fd = (up - dn) / (2.0 * h);
      CHECK(vd.derivative == doctest::Approx(fd).epsilon(1e-5));
      CHECK(vd.second <= 1e-10);  // strict concavity up to roundoff

      // Closed form: marginal value is W^(1-sigma) / (omega - s*Omega)^sigma.
      const double kept = omega * (1.0 - sc.policy.eval(0, omega));
      const double w_base = sc.agg.wealth_base[0];
      const double closed = std::pow(w_base, 1.0 - sigma) / std::pow(kept, sigma);
      CHECK(vd.derivative == doctest::Approx(closed).epsilon(1e-12));
    }

    // Terminal node: V(omega) = u(omega * W), V' = W^(1-sigma) / omega^sigma.
    const double w_t = sc.agg.wealth_base[1];
    const ValueDerivative vt = value_and_derivative(pb, sc.policy, 1, 0.7);
    CHECK(vt.value == doctest::Approx(crra_utility(0.7 * w_t, sigma)).epsilon(1e-14));
    CHECK(vt.derivative ==
          doctest::Approx(std::pow(w_t, 1.0 - sigma) / std::pow(0.7, sigma)).epsilon(1e-12));
  }
}

TEST_CASE("log-utility policies are bitwise scale invariant at full depreciation") {
  const EventTree tree = two_point_chain(3, 0.1, 0.125);
  EconomyParams base;
  base.sigma = 1.0;
  base.delta = 1.0;
  base.horizon = 3;
  const Forecasts fc = log_bound_forecasts(tree, base);

  std::vector<SolvedClass> runs;
  for (double y1 : {0.5, 1.0, 2.0}) {
    EconomyParams p = base;
    p.y1 = y1;
    runs.push_back(solve_fixed(tree, p, fc));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      REQUIRE(runs[r].policy.gamma[i].size() == runs[0].policy.gamma[i].size());
      for (std::size_t k = 0; k < runs[r].policy.gamma[i].size(); ++k) {
        CHECK(runs[r].policy.gamma[i][k] == runs[0].policy.gamma[i][k]);
        CHECK(runs[r].policy.grids[i].points[k] == runs[0].policy.grids[i].points[k]);
      }
    }
  }
}

TEST_CASE("corner detection: a sure-employment impatient agent saves nothing") {
  const EventTree tree = chain_tree(2, {1.0}, {1.0});  // whole wage bill, surely
  EconomyParams p;
  p.sigma = 0.5;
  p.beta = 0.1;
  p.horizon = 2;
  SolvedClass sc = solve_fixed(tree, p, flat_forecasts(tree, 0.9));
  CHECK(sc.report.boundary_low ==
        static_cast<int>(sc.policy.gamma[0].size()));
  for (double g : sc.policy.gamma[0]) CHECK(g == 0.0);
  CHECK(sc.report.boundary_high == 0);
}

TEST_CASE("policy JSON round-trip is bit exact and hash checked") {
  WorkedInstance w;
  w.solved.policy.scenario_hash = 0xABCDEF0123456789ULL;
  const std::string text = policy_to_json(w.solved.policy);
  const Policy back = policy_from_json(text, 0xABCDEF0123456789ULL);
  CHECK(back.class_id == w.solved.policy.class_id);
  CHECK(back.scenario_hash == w.solved.policy.scenario_hash);
  CHECK(back.foc_tol == w.solved.policy.foc_tol);
  REQUIRE(back.gamma.size() == w.solved.policy.gamma.size());
  for (std::size_t i = 0; i < back.gamma.size(); ++i) {
    REQUIRE(back.gamma[i].size() == w.solved.policy.gamma[i].size());
    for (std::size_t k = 0; k < back.gamma[i].size(); ++k) {
      CHECK(back.gamma[i][k] == w.solved.policy.gamma[i][k]);
      CHECK(back.grids[i].points[k] == w.solved.policy.grids[i].points[k]);
      CHECK(back.slopes[i][k] == w.solved.policy.slopes[i][k]);
    }
  }
  CHECK_THROWS_AS(policy_from_json(text, 0x1111111111111111ULL), std::runtime_error);
  CHECK_THROWS_AS(policy_from_json("{\"schema_version\": 2}"), std::runtime_error);
}

TEST_CASE("oracle: terminal value, closed-form argmax, and the dominance property") {
  SUBCASE("single-period economy consumes everything") {
    const EventTree tree = chain_tree(1, {0.0}, {1.0});
    EconomyParams p;
    p.horizon = 1;
    const Forecasts fc = flat_forecasts(tree, 0.0);
    const NodeAggregates agg = propagate_aggregates(tree, p, fc);
    const OracleResult r = brute_force_gamma(tree, p, fc, agg, 0, 0, 0.45);
    CHECK(r.gamma == 0.0);
    CHECK(r.value == crra_utility(0.45 * agg.wealth_base[0], p.sigma));
  }

  SUBCASE("log no-employment argmax is beta/(1+beta)") {
    const EventTree tree = no_employment_chain(2);
    EconomyParams p;
    p.beta = 0.95;
    p.horizon = 2;
    const Forecasts fc = flat_forecasts(tree, 0.4);
    const NodeAggregates agg = propagate_aggregates(tree, p, fc);
    const OracleResult r = brute_force_gamma(tree, p, fc, agg, 0, 0, 0.3);
    // Value-based search can localize the argmax only to about
    // sqrt(machine eps): the objective is flat to second order there.
    CHECK(r.gamma == doctest::Approx(0.95 / 1.95).epsilon(1e-7));

    const OracleResult again = brute_force_gamma(tree, p, fc, agg, 0, 0, 0.3);
    CHECK(again.gamma == r.gamma);   // bitwise deterministic
    CHECK(again.value == r.value);
  }

  SUBCASE("depth cap and domain errors") {
    const EventTree tree = two_point_chain(4, 0.1, 0.125);
    EconomyParams p;
    p.horizon = 4;
    const Forecasts fc = flat_forecasts(tree, 0.3);
    const NodeAggregates agg = propagate_aggregates(tree, p, fc);
    CHECK_THROWS_AS(brute_force_gamma(tree, p, fc, agg, 0, 0, 0.3),
                    std::invalid_argument);
    CHECK_NOTHROW(brute_force_gamma(tree, p, fc, agg, 0, 1, 0.3));  // depth 3 from node 1
    CHECK_THROWS_AS(brute_force_gamma(tree, p, fc, agg, 0, 1, -1.0),
                    std::invalid_argument);
  }

  SUBCASE("oracle argmax never loses to the solver on the oracle's objective") {
    const EventTree tree = two_point_chain(3, 0.1, 0.15);
    EconomyParams p;
    p.sigma = 2.0;
    p.horizon = 3;
    SolvedClass sc = solve_fixed(tree, p, log_bound_forecasts(tree, p));
    for (double omega : {0.05, 0.2, 0.5, 1.0}) {
      const OracleResult best =
          brute_force_gamma(tree, p, sc.forecasts, sc.agg, 0, 0, omega);
      const double g_pol = sc.policy.eval(0, omega);
      const double v_best =
          oracle_value(tree, p, sc.forecasts, sc.agg, 0, 0, omega, best.gamma);
      const double v_pol =
          oracle_value(tree, p, sc.forecasts, sc.agg, 0, 0, omega, g_pol);
      CHECK(v_best >= v_pol - 1e-12);
      CHECK(std::abs(best.gamma - g_pol) <= 1e-4);
    }
  }
}
