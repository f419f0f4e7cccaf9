#pragma once

#include <stdexcept>

namespace growthlab {

// Deep parameters of the finite-horizon growth economy.  All quantities that
// agents trade are expressed as shares of current (effective) output, so the
// only level parameter is y1, the initial output in goods units.
struct EconomyParams {
  double alpha = 0.36;   // capital share, in (0,1]
  double beta = 0.95;    // discount factor, in (0,1)
  double sigma = 1.0;    // CRRA curvature, > 0; sigma == 1 is the log branch
  double delta = 1.0;    // depreciation, in (0,1]
  int horizon = 2;       // T >= 1, number of periods
  int n_agents = 1;      // N >= 1
  double y1 = 1.0;       // initial output in goods units, > 0
  double labor_norm = 1.0;  // aggregate labor endowment, fixed at 1 by convention

  bool log_utility() const { return sigma == 1.0; }
  void validate() const;  // throws std::invalid_argument on the first violation
};

struct FactorPrices {
  double rental_rate;  // R = alpha * z * (K/L)^(alpha-1)
  double wage;         // w = (1-alpha) * z * (K/L)^alpha
};

// Competitive factor prices for Cobb-Douglas technology z * K^alpha * L^(1-alpha).
// R*K + w*L exhausts output exactly (constant returns).
FactorPrices factor_prices(double capital, double labor, double shock, double alpha);

// Effective output and the wage rescaling used when delta < 1.  Undepreciated
// capital is folded into the capital share so the total-depreciation recursion
// applies verbatim: y_eff = y_t + ((1-delta)/alpha) * omega_prev * y_prev.
// Real employment shares are multiplied by wage_scale = y_t / y_eff.
// At delta == 1 this is the identity (y_eff == y_t bitwise, wage_scale == 1).
struct EffectiveQuantities {
  double y_eff;
  double wage_scale;
};
EffectiveQuantities effective_transform(double y_t, double y_prev,
                                        double omega_prev, double delta,
                                        double alpha);

// Next-period wealth share of an agent that invested share s of aggregate
// capital and draws effective employment share e_eff:
//   omega' = alpha * s + (1 - alpha) * e_eff.
double wealth_transition(double invest_share, double employment_eff, double alpha);

// CRRA period utility and marginal utility.  sigma == 1 takes the log branch
// exactly (no numeric limit).  u(0) is -inf for sigma >= 1 and the finite
// value -1/(1-sigma) for sigma < 1; marginal utility diverges at 0 for all
// sigma > 0.
double crra_utility(double consumption, double sigma);
double crra_marginal(double consumption, double sigma);

}  // namespace growthlab
