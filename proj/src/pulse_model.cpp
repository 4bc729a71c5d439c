#include "xbeam/pulse_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "xbeam/error.hpp"

namespace xbeam {

using std::numbers::pi;

void validate(const PulseModel& model) {
  if (!(model.carrier_hz > 0.0) || !std::isfinite(model.carrier_hz)) {
    throw Error(ErrorCode::InvariantViolation, "pulse.carrier_hz must be positive");
  }
  if (!(model.envelope_sigma > 0.0) || !std::isfinite(model.envelope_sigma)) {
    throw Error(ErrorCode::InvariantViolation, "pulse.sigma_s must be positive");
  }
  if (!std::isfinite(model.amplitude)) {
    throw Error(ErrorCode::InvariantViolation, "pulse.amplitude must be finite");
  }
}

double pulse_envelope(const PulseModel& model, double t) {
  const double u = t / model.envelope_sigma;
  return std::exp(-0.5 * u * u);
}

double eval_pulse(const PulseModel& model, double t) {
  return model.amplitude * pulse_envelope(model, t) * std::cos(2.0 * pi * model.carrier_hz * t);
}

std::complex<double> pulse_spectrum(const PulseModel& model, double omega) {
  const double s = model.envelope_sigma;
  const double wc = 2.0 * pi * model.carrier_hz;
  const double scale = model.amplitude * s * std::sqrt(2.0 * pi) / 2.0;
  const double dm = s * (omega - wc);
  const double dp = s * (omega + wc);
  return {scale * (std::exp(-0.5 * dm * dm) + std::exp(-0.5 * dp * dp)), 0.0};
}

double pulse_spectrum_peak(const PulseModel& model) {
  // |H| is a sum of two Gaussian lobes at +-omega_c; on omega >= 0 the peak
  // lies in [0, omega_c]. Golden-section search on that interval.
  const double wc = 2.0 * pi * model.carrier_hz;
  auto mag = [&](double w) { return std::abs(pulse_spectrum(model, w)); };
  double lo = 0.0;
  double hi = wc;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo);
  double b = lo + g * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * wc; ++it) {
    if (mag(a) > mag(b)) {
      hi = b;
    } else {
      lo = a;
    }
    a = hi - g * (hi - lo);
    b = lo + g * (hi - lo);
  }
  return std::max({mag(0.5 * (lo + hi)), mag(0.0), mag(wc)});
}

Eigen::VectorXcd build_H(const PulseModel& model, std::span<const int> kappa, double tau,
                         double rel_threshold) {
  const double floor = rel_threshold * pulse_spectrum_peak(model);
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(kappa.size()));
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const double omega = 2.0 * pi * kappa[i] / tau;
    const auto value = pulse_spectrum(model, omega);
    if (!(std::abs(value) > floor)) {
      std::ostringstream os;
      os << "harmonic k=" << kappa[i] << " has |H|=" << std::abs(value)
         << " below threshold " << floor;
      throw Error(ErrorCode::SingularHarmonic, os.str());
    }
    diag[static_cast<Eigen::Index>(i)] = value;
  }
  return diag;
}

} // namespace xbeam
