#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "xbeam/acoustic_sim.hpp"

namespace xbeam::testing {

inline constexpr double kC = 1540.0;

// Two reflectors at 1 cm and 2 cm seen by a 16-element, 0.3 mm array.
inline ArrayGeometry two_reflector_geometry() { return {16, 0.3e-3, kC}; }

inline Scene two_reflector_scene() {
  Scene s;
  s.scatterers = {{0.01 / kC, 1.0}, {0.02 / kC, 1.0}};
  return s;
}

// Random noiseless scene: L reflectors with two-way delays in [10, 90] us,
// pairwise separated by at least `min_sep` (two-way), |r| in [0.5, 1].
inline Scene random_scene(std::mt19937_64& rng, int L, double min_sep = 2e-6) {
  std::uniform_real_distribution<double> delay(10e-6, 90e-6);
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution sign(0.5);
  Scene s;
  std::vector<double> taken;
  while (static_cast<int>(taken.size()) < L) {
    const double d = delay(rng);
    bool ok = true;
    for (double t : taken) ok = ok && std::abs(t - d) >= min_sep;
    if (!ok) continue;
    taken.push_back(d);
    s.scatterers.push_back({0.5 * d, (sign(rng) ? -1.0 : 1.0) * mag(rng)});
  }
  return s;
}

// Composite Simpson on [a, b] with n (even) intervals.
inline std::complex<double> simpson(const std::function<std::complex<double>(double)>& f, double a,
                                    double b, int n) {
  const double h = (b - a) / n;
  std::complex<double> acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

inline double rel_l2(const std::vector<std::complex<double>>& a,
                     const std::vector<std::complex<double>>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

} // namespace xbeam::testing
