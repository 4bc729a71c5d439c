#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xbeam/pulse_model.hpp"

namespace xbeam {

inline constexpr double kNyquistRateHz = 20e6;
inline constexpr int kMinSimOversample = 16;

/// Linear array centred on the beam line. Element i sits at
/// delta_i = (i - (N - 1) / 2) * pitch, so offsets come in +- pairs
/// (and the centre element is at 0 when N is odd).
struct ArrayGeometry {
  int num_elements = 1;
  double pitch = 0.3e-3;          // m
  double speed_of_sound = 1540.0; // m/s

  [[nodiscard]] double offset(int element) const {
    return (element - 0.5 * (num_elements - 1)) * pitch;
  }
  // delta_i / c
  [[nodiscard]] double offset_time(int element) const { return offset(element) / speed_of_sound; }
  [[nodiscard]] double max_offset_time() const { return offset_time(0) < 0 ? -offset_time(0) : offset_time(0); }
  // Element with the mirrored offset.
  [[nodiscard]] int mirror(int element) const { return num_elements - 1 - element; }
};

void validate(const ArrayGeometry& geom);

struct Scatterer {
  double axial_time = 0.0; // t_n, s (depth = c * t_n)
  double reflectivity = 1.0;
};

struct NoiseSpec {
  std::optional<double> snr_db; // disabled when empty
  int speckle_count = 0;
  std::uint64_t seed = 0;
};

struct Scene {
  std::vector<Scatterer> scatterers;
  double alpha = 0.0; // beam angle, rad
  double tau = 102.4e-6;
  NoiseSpec noise;
};

// Throws InvariantViolation on non-positive times, echoes past tau, or
// repeated delays.
void validate(const Scene& scene);

/// Densely sampled per-element received signals on t_i = i * grid_step.
struct ChannelSet {
  double grid_step = 0.0;
  std::size_t grid_len = 0;
  std::vector<double> samples; // num_elements x grid_len, row-major
  ArrayGeometry geometry;
  double tau = 0.0;

  [[nodiscard]] int num_elements() const { return geometry.num_elements; }
  [[nodiscard]] std::span<double> channel(int m) {
    return {samples.data() + static_cast<std::size_t>(m) * grid_len, grid_len};
  }
  [[nodiscard]] std::span<const double> channel(int m) const {
    return {samples.data() + static_cast<std::size_t>(m) * grid_len, grid_len};
  }
  [[nodiscard]] double grid_end() const {
    return grid_len == 0 ? 0.0 : static_cast<double>(grid_len - 1) * grid_step;
  }
};

// Simulation grid step for a given oversampling of the 20 MHz Nyquist rate.
[[nodiscard]] double sim_grid_step(int oversample);

/// Two-way travel time of an echo from the on-beam point at t_n to the
/// element at offset delta_m.
[[nodiscard]] double arrival_time(double t_n, double alpha, double delta_m, double c);

/// Synthesizes phi_m(t) on a grid spanning [0, grid_end]. grid_end defaults
/// to the widened integration bound of the given window so that the
/// generalized kernels can integrate over it.
[[nodiscard]] ChannelSet synthesize_channels(const Scene& scene, const ArrayGeometry& geom,
                                             const PulseModel& pulse, double grid_step,
                                             std::optional<double> grid_end = std::nullopt);

/// Adds white noise plus a weak on-beam speckle surrogate so that the
/// per-channel SNR matches snr_db. Deterministic given seed.
[[nodiscard]] ChannelSet add_interference(const ChannelSet& ch, const PulseModel& pulse,
                                          std::optional<double> snr_db, int speckle_count,
                                          std::uint64_t seed);

// Per-channel power ratio (dB) of `clean` against `noisy - clean`.
[[nodiscard]] std::vector<double> measured_snr_db(const ChannelSet& clean, const ChannelSet& noisy);

} // namespace xbeam
