#pragma once

#include <cstdint>
#include <vector>

#include "xbeam/pulse_model.hpp"
#include "xbeam/recovery.hpp"

namespace xbeam {

inline constexpr double kDefaultDynamicRangeDb = 50.0;
inline constexpr int kDefaultNumLines = 113;

struct AxialGrid {
  std::size_t samples = 0;
  double step = 50e-9;
};

/// Gray-scale image, row = axial sample, column = image line.
struct ImageGrid {
  std::size_t num_lines = 0;
  std::size_t axial_samples = 0;
  double axial_step = 0.0;
  double dynamic_range_db = kDefaultDynamicRangeDb;
  std::vector<std::uint8_t> pixels; // axial_samples x num_lines, row-major

  [[nodiscard]] std::uint8_t at(std::size_t row, std::size_t line) const {
    return pixels[row * num_lines + line];
  }
};

/// Pulse stream sum_l b_l delta(t - t_l) convolved with the pulse's
/// Gaussian envelope, using |b_l|.
[[nodiscard]] std::vector<double> render_line(const LineEstimate& est, const PulseModel& pulse,
                                              const AxialGrid& grid);

/// Log compression against the global maximum:
/// pixel = clamp(255 * (1 + 20 log10(v / v_max) / DR), 0, 255), 0 where v == 0.
/// Throws AllZero when every trace is zero.
[[nodiscard]] ImageGrid assemble_image(const std::vector<std::vector<double>>& lines,
                                       double dynamic_range_db = kDefaultDynamicRangeDb,
                                       double axial_step = 0.0);

} // namespace xbeam
