#pragma once

#include <cstddef>
#include <vector>

namespace growthlab {

// Strictly increasing wealth grid on (0, omega_max].  Base points are
// log-spaced from omega_min; linear refinement windows are added around
// employment-share landmarks, where the savings rate bends most.
struct WealthGrid {
  std::vector<double> points;

  double min() const { return points.front(); }
  double max() const { return points.back(); }
  std::size_t size() const { return points.size(); }
  // index of the left bracket for x (clamped to [0, size-2])
  std::size_t bracket(double x) const;
};

WealthGrid make_wealth_grid(double omega_min, double omega_max,
                            std::size_t base_points,
                            const std::vector<double>& landmarks);

// Monotone shape-preserving piecewise-cubic interpolant (Fritsch-Carlson
// slope limiting on cubic Hermite segments).  Given monotone data the
// interpolant is monotone on every segment.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y);

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& slopes, std::size_t seg, double xq);

double pchip_eval_derivative(const std::vector<double>& x,
                             const std::vector<double>& y,
                             const std::vector<double>& slopes,
                             std::size_t seg, double xq);

}  // namespace growthlab
