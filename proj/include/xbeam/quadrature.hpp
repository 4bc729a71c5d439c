#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace xbeam {

/// Trapezoidal weights for integrating samples f_i = f(i * step) over
/// [0, upper]. A trailing partial interval is handled by integrating the
/// linear interpolant. Requires the grid to reach `upper`.
inline std::vector<double> trapezoid_weights(std::size_t grid_len, double step, double upper) {
  std::vector<double> w(grid_len, 0.0);
  if (grid_len < 2 || upper <= 0.0) return w;
  const double x = upper / step;
  auto n = static_cast<std::size_t>(std::floor(x + 1e-9));
  if (n > grid_len - 1) n = grid_len - 1;
  for (std::size_t i = 0; i <= n; ++i) w[i] = step;
  w[0] = 0.5 * step;
  w[n] = n == 0 ? 0.0 : w[n] - 0.5 * step;
  if (n == 0) w[0] = 0.0;
  const double rem = (x - static_cast<double>(n)) * step;
  if (rem > 1e-9 * step && n + 1 < grid_len) {
    w[n] += rem - rem * rem / (2.0 * step);
    w[n + 1] += rem * rem / (2.0 * step);
  }
  return w;
}

} // namespace xbeam
