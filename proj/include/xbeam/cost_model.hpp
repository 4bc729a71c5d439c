#pragma once

#include <vector>

namespace xbeam {

// Operation counts: one Op is one multiply-accumulate.

struct SampleCounts {
  int K = 0;
  int samples_per_element_per_line = 0; // 2K = |kappa|
};

[[nodiscard]] SampleCounts sample_counts(int L, int rho);

/// Block-sum cost of one Xampled line with pencil parameter K/3:
///   output summation     (p - 1)(2M + 1)
///   unmixing             K p
///   Hankel SVD           (2K/3)(K/3)^2
///   rank-L rebuild, x2   (2K/3) L^2 + L^2 (K/3)
///   pseudoinverse        (2K/3)^3 + (K/3)^3
///   pencil product       (2K/3)(K/3)^2
///   eigendecomposition   (K/3)^3
///   least squares        2 K L + K^3 + L^3
/// `num_elements` is 2M + 1.
[[nodiscard]] double xampled_ops(int L, int K, int p, int num_elements);

inline constexpr double kDefaultFftConstant = 1.0;

/// Nyquist-path cost: samples * (num_elements - 1) adds plus a two-FFT
/// Hilbert transform, 2 * C_fft * n log2 n.
[[nodiscard]] double standard_ops(int samples_per_line, int num_elements,
                                  double fft_constant = kDefaultFftConstant);

// Add operations of the delay-and-sum step alone.
[[nodiscard]] double standard_adds(int samples_per_line, int num_elements);

/// Nyquist-rate samples needed per element for a line of the given depth.
[[nodiscard]] int standard_samples_per_line(double depth_m, double rate_hz, double c);

struct CostRow {
  int L = 0;
  int rho = 0;
  int K = 0;
  int samples_per_element_per_line = 0;
  double xampled_ops = 0.0;
  double standard_ops = 0.0;
  int standard_samples = 0;
  double reduction_factor = 0.0; // standard_samples / samples_per_element_per_line
};

[[nodiscard]] std::vector<CostRow> cost_report(int L, const std::vector<int>& rhos,
                                               int num_elements, int standard_samples,
                                               double fft_constant = kDefaultFftConstant);

} // namespace xbeam
