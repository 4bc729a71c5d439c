#include "xbeam/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "xbeam/error.hpp"

namespace xbeam {

std::vector<double> render_line(const LineEstimate& est, const PulseModel& pulse,
                                const AxialGrid& grid) {
  std::vector<double> trace(grid.samples, 0.0);
  const double reach = pulse.support_half_width();
  for (std::size_t l = 0; l < est.delays.size(); ++l) {
    const double t_l = est.delays[l];
    const double b = std::abs(est.amplitudes[l]);
    const auto i0 = static_cast<long>(std::max(0.0, std::floor((t_l - reach) / grid.step)));
    const auto i1 = std::min(static_cast<long>(grid.samples) - 1,
                             static_cast<long>(std::ceil((t_l + reach) / grid.step)));
    for (long i = i0; i <= i1; ++i) {
      trace[static_cast<std::size_t>(i)] +=
          b * pulse_envelope(pulse, static_cast<double>(i) * grid.step - t_l);
    }
  }
  return trace;
}

ImageGrid assemble_image(const std::vector<std::vector<double>>& lines, double dynamic_range_db,
                         double axial_step) {
  if (!(dynamic_range_db > 0.0)) {
    throw Error(ErrorCode::Validation, "dynamic range must be positive");
  }
  ImageGrid img;
  img.num_lines = lines.size();
  img.axial_samples = lines.empty() ? 0 : lines.front().size();
  img.axial_step = axial_step;
  img.dynamic_range_db = dynamic_range_db;
  double vmax = 0.0;
  for (const auto& line : lines) {
    if (line.size() != img.axial_samples) {
      throw Error(ErrorCode::Precondition, "all traces must have the same length");
    }
    for (double v : line) vmax = std::max(vmax, v);
  }
  if (!(vmax > 0.0)) throw Error(ErrorCode::AllZero, "image has no positive samples");

  img.pixels.assign(img.num_lines * img.axial_samples, 0);
  for (std::size_t j = 0; j < img.num_lines; ++j) {
    for (std::size_t i = 0; i < img.axial_samples; ++i) {
      const double v = lines[j][i];
      std::uint8_t px = 0;
      if (v > 0.0) {
        const double level = 255.0 * (1.0 + 20.0 * std::log10(v / vmax) / dynamic_range_db);
        px = static_cast<std::uint8_t>(std::lround(std::clamp(level, 0.0, 255.0)));
      }
      img.pixels[i * img.num_lines + j] = px;
    }
  }
  return img;
}

} // namespace xbeam
