#pragma once

#include <string>
#include <vector>

#include "xbeam/acoustic_sim.hpp"

namespace xbeam {

enum class FocusMode {
  dynamic,  // one delay law per output sample
  infinity, // plain sum, delta_m forced to 0
  zoned,    // piecewise-constant delays over num_focal_zones segments
};

const char* to_string(FocusMode mode);
FocusMode focus_mode_from_string(const std::string& name);

enum class Interp { linear, cubic };

inline constexpr double kDefaultOutStep = 50e-9;

struct BeamformOptions {
  FocusMode mode = FocusMode::dynamic;
  int num_focal_zones = 100; // used by FocusMode::zoned
  double out_step = kDefaultOutStep;
  Interp interp = Interp::linear;
};

struct BeamformedLine {
  std::vector<double> samples; // t_j = j * grid_step, covering [0, tau]
  double grid_step = 0.0;
  double alpha = 0.0;
  FocusMode focus_mode = FocusMode::dynamic;
};

/// Delay compensating the element's extra path length,
/// theta_m = tau_0(t_n) - tau_m(t_n). Possibly negative.
[[nodiscard]] double focus_delay(double t_n, double alpha, double delta_m, double c);

// phi_m sampled at time t on the channel grid. Zero outside the grid.
[[nodiscard]] double sample_channel(const ChannelSet& ch, int m, double t,
                                    Interp interp = Interp::linear);

/// The warped trace hat-phi_m(t): phi_m evaluated at
/// 0.5 * (t + sqrt(t^2 + 4 d (d - t sin(alpha)))), d = delta_m / c.
[[nodiscard]] double distort_channel(const ChannelSet& ch, int m, double alpha, double t,
                                     Interp interp = Interp::linear);

[[nodiscard]] BeamformedLine beamform_line(const ChannelSet& ch, double alpha,
                                           const BeamformOptions& opts = {});

/// Magnitude of the analytic signal.
[[nodiscard]] std::vector<double> envelope_detect(const BeamformedLine& line);
[[nodiscard]] std::vector<double> envelope_detect(const std::vector<double>& samples);

} // namespace xbeam
