#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace xbeam {

/// Known-shape transmit pulse: a Gaussian-windowed cosine,
/// h(t) = A exp(-t^2 / (2 sigma^2)) cos(2 pi f_c t).
struct PulseModel {
  double carrier_hz = 5.142e6;
  double envelope_sigma = 100e-9;
  double amplitude = 1.0;

  // Half-width beyond which |h| < 1e-6 of its peak.
  [[nodiscard]] double support_half_width() const { return 6.0 * envelope_sigma; }
};

// Throws Error(InvariantViolation) if carrier or sigma is not positive.
void validate(const PulseModel& model);

[[nodiscard]] double eval_pulse(const PulseModel& model, double t);

// Gaussian window of the pulse, normalized to 1 at t = 0.
[[nodiscard]] double pulse_envelope(const PulseModel& model, double t);

/// Closed-form CTFT of eval_pulse. Real and even for this pulse family.
[[nodiscard]] std::complex<double> pulse_spectrum(const PulseModel& model, double omega);

// Maximum of |H(omega)| over omega >= 0.
[[nodiscard]] double pulse_spectrum_peak(const PulseModel& model);

inline constexpr double kDefaultHarmonicThreshold = 1e-9;

/// Diagonal of H for the harmonics omega_k = 2 pi k / tau, in the order of
/// `kappa`. Throws SingularHarmonic when any |H(omega_k)| falls at or below
/// `rel_threshold` times the spectrum peak.
[[nodiscard]] Eigen::VectorXcd build_H(const PulseModel& model, std::span<const int> kappa,
                                       double tau, double rel_threshold = kDefaultHarmonicThreshold);

} // namespace xbeam
