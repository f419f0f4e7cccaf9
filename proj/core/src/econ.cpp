#include "growthlab/econ.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace growthlab {

void EconomyParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("EconomyParams: " + msg); };
  if (!(alpha > 0.0) || !(alpha <= 1.0)) fail("alpha must lie in (0,1]");
  if (!(beta > 0.0) || !(beta < 1.0)) fail("beta must lie in (0,1)");
  if (!(sigma > 0.0)) fail("sigma must be positive");
  if (!(delta > 0.0) || !(delta <= 1.0)) fail("delta must lie in (0,1]");
  if (horizon < 1) fail("horizon must be at least 1");
  if (n_agents < 1) fail("n_agents must be at least 1");
  if (!(y1 > 0.0)) fail("y1 must be positive");
  if (!(labor_norm > 0.0)) fail("labor_norm must be positive");
}

FactorPrices factor_prices(double capital, double labor, double shock, double alpha) {
  if (!(capital > 0.0)) throw std::invalid_argument("factor_prices: capital must be positive");
  if (!(labor > 0.0)) throw std::invalid_argument("factor_prices: labor must be positive");
  if (!(shock > 0.0)) throw std::invalid_argument("factor_prices: shock must be positive");
  if (!(alpha > 0.0) || !(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("factor_prices: alpha must lie in (0,1]");
  const double ratio = capital / labor;
  return FactorPrices{alpha * shock * std::pow(ratio, alpha - 1.0),
                      (1.0 - alpha) * shock * std::pow(ratio, alpha)};
}

EffectiveQuantities effective_transform(double y_t, double y_prev, double omega_prev,
                                        double delta, double alpha) {
  if (!(y_t > 0.0)) throw std::invalid_argument("effective_transform: y_t must be positive");
  if (!(y_prev >= 0.0)) throw std::invalid_argument("effective_transform: y_prev must be nonnegative");
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw std::invalid_argument("effective_transform: delta must lie in (0,1]");
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("effective_transform: alpha must lie in (0,1]");
  // At delta == 1 the carry term is exactly 0.0, so y_eff == y_t bit-for-bit.
  const double carry = ((1.0 - delta) / alpha) * omega_prev * y_prev;
  const double y_eff = y_t + carry;
  return EffectiveQuantities{y_eff, y_t / y_eff};
}

double wealth_transition(double invest_share, double employment_eff, double alpha) {
  return alpha * invest_share + (1.0 - alpha) * employment_eff;
}

double crra_utility(double consumption, double sigma) {
  if (consumption < 0.0) return -std::numeric_limits<double>::infinity();
  if (sigma == 1.0) {
    return consumption == 0.0 ? -std::numeric_limits<double>::infinity()
                              : std::log(consumption);
  }
  if (consumption == 0.0 && sigma > 1.0)
    return -std::numeric_limits<double>::infinity();
  return (std::pow(consumption, 1.0 - sigma) - 1.0) / (1.0 - sigma);
}

double crra_marginal(double consumption, double sigma) {
  if (consumption <= 0.0) return std::numeric_limits<double>::infinity();
  if (sigma == 1.0) return 1.0 / consumption;
  return std::pow(consumption, -sigma);
}

}  // namespace growthlab
