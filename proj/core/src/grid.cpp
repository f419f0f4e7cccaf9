#include "growthlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace growthlab {

std::size_t WealthGrid::bracket(double x) const {
  if (x <= points.front()) return 0;
  if (x >= points.back()) return points.size() - 2;
  const auto it = std::upper_bound(points.begin(), points.end(), x);
  return static_cast<std::size_t>(it - points.begin()) - 1;
}

WealthGrid make_wealth_grid(double omega_min, double omega_max,
                            std::size_t base_points,
                            const std::vector<double>& landmarks) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min))
    throw std::invalid_argument("make_wealth_grid: need 0 < omega_min < omega_max");
  if (base_points < 2) throw std::invalid_argument("make_wealth_grid: need >= 2 points");

  std::vector<double> pts;
  pts.reserve(base_points + 32 * landmarks.size());
  const double lo = std::log(omega_min), hi = std::log(omega_max);
  for (std::size_t i = 0; i < base_points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(base_points - 1);
    pts.push_back(std::exp(lo + f * (hi - lo)));
  }
  pts.front() = omega_min;
  pts.back() = omega_max;

  // Linear refinement around each landmark (+-40% window, clipped to range).
  constexpr std::size_t kWindowPoints = 17;
  for (double mark : landmarks) {
    if (!(mark > 0.0)) continue;
    const double a = std::max(omega_min, 0.6 * mark);
    const double b = std::min(omega_max, 1.4 * mark);
    if (!(b > a)) continue;
    for (std::size_t i = 0; i < kWindowPoints; ++i)
      pts.push_back(a + (b - a) * static_cast<double>(i) /
                            static_cast<double>(kWindowPoints - 1));
  }

  std::sort(pts.begin(), pts.end());
  // Drop near-duplicates (relative spacing below 1e-12 adds nothing).
  std::vector<double> out;
  out.reserve(pts.size());
  for (double p : pts)
    if (out.empty() || p - out.back() > 1e-12 * p) out.push_back(p);
  if (out.back() != omega_max) out.push_back(omega_max);
  return WealthGrid{std::move(out)};
}

std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("pchip_slopes: bad input");
  std::vector<double> h(n - 1), d(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) throw std::invalid_argument("pchip_slopes: x must be increasing");
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    m[0] = m[1] = d[0];
    return m;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;  // local extremum or flat: keep shape
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // One-sided endpoint formulas with the standard monotonicity clip.
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  m[0] = endpoint(h[0], h[1], d[0], d[1]);
  m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return m;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& slopes, std::size_t seg, double xq) {
  const double h = x[seg + 1] - x[seg];
  const double t = (xq - x[seg]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y[seg] + h10 * h * slopes[seg] + h01 * y[seg + 1] +
         h11 * h * slopes[seg + 1];
}

double pchip_eval_derivative(const std::vector<double>& x,
                             const std::vector<double>& y,
                             const std::vector<double>& slopes,
                             std::size_t seg, double xq) {
  const double h = x[seg + 1] - x[seg];
  const double t = (xq - x[seg]) / h;
  const double t2 = t * t;
  const double dh00 = (6.0 * t2 - 6.0 * t) / h;
  const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
  const double dh11 = 3.0 * t2 - 2.0 * t;
  return dh00 * y[seg] + dh10 * slopes[seg] + dh01 * y[seg + 1] +
         dh11 * slopes[seg + 1];
}

}  // namespace growthlab
