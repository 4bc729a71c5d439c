#include "xbeam/cost_model.hpp"

#include <cmath>

#include "xbeam/error.hpp"

namespace xbeam {

SampleCounts sample_counts(int L, int rho) {
  if (L < 1 || rho < 1) throw Error(ErrorCode::Validation, "L and rho must be >= 1");
  const int K = 2 * rho * L;
  return {K, 2 * K};
}

double xampled_ops(int L, int K, int p, int num_elements) {
  if (L < 1 || K < 2 * L || p < 1 || num_elements < 1) {
    throw Error(ErrorCode::Validation, "xampled_ops needs L >= 1, K >= 2L, p >= 1, elements >= 1");
  }
  const double l = L;
  const double k = K;
  const double big = 2.0 * k / 3.0; // Hankel rows
  const double small = k / 3.0;     // pencil parameter

  double ops = 0.0;
  ops += (p - 1.0) * num_elements;
  ops += k * p;
  ops += big * small * small;
  // The rank-L reconstruction block is counted twice.
  ops += 2.0 * (big * l * l + l * l * small);
  ops += big * big * big + small * small * small;
  ops += big * small * small;
  ops += small * small * small;
  ops += k * l;
  ops += k * k * k + l * l * l;
  ops += k * l;
  return ops;
}

double standard_adds(int samples_per_line, int num_elements) {
  if (samples_per_line < 1 || num_elements < 1) {
    throw Error(ErrorCode::Validation, "standard cost needs positive counts");
  }
  return static_cast<double>(samples_per_line) * (num_elements - 1);
}

double standard_ops(int samples_per_line, int num_elements, double fft_constant) {
  const double n = samples_per_line;
  return standard_adds(samples_per_line, num_elements) + 2.0 * fft_constant * n * std::log2(n);
}

int standard_samples_per_line(double depth_m, double rate_hz, double c) {
  if (!(depth_m > 0.0) || !(rate_hz > 0.0) || !(c > 0.0)) {
    throw Error(ErrorCode::Validation, "depth, rate and speed of sound must be positive");
  }
  return static_cast<int>(std::lround(2.0 * depth_m / c * rate_hz));
}

std::vector<CostRow> cost_report(int L, const std::vector<int>& rhos, int num_elements,
                                 int standard_samples, double fft_constant) {
  if (rhos.empty()) throw Error(ErrorCode::Validation, "at least one rho is required");
  std::vector<CostRow> rows;
  const double std_ops = standard_ops(standard_samples, num_elements, fft_constant);
  for (int rho : rhos) {
    const auto counts = sample_counts(L, rho);
    CostRow row;
    row.L = L;
    row.rho = rho;
    row.K = counts.K;
    row.samples_per_element_per_line = counts.samples_per_element_per_line;
    row.xampled_ops = xampled_ops(L, counts.K, counts.samples_per_element_per_line, num_elements);
    row.standard_ops = std_ops;
    row.standard_samples = standard_samples;
    row.reduction_factor =
        static_cast<double>(standard_samples) / counts.samples_per_element_per_line;
    rows.push_back(row);
  }
  return rows;
}

} // namespace xbeam
