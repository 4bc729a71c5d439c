#include "xbeam/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

#include "xbeam/error.hpp"

namespace xbeam {

const char* to_string(FocusMode mode) {
  switch (mode) {
  case FocusMode::dynamic: return "dynamic";
  case FocusMode::infinity: return "infinity";
  case FocusMode::zoned: return "zoned";
  }
  return "dynamic";
}

FocusMode focus_mode_from_string(const std::string& name) {
  if (name == "dynamic") return FocusMode::dynamic;
  if (name == "infinity") return FocusMode::infinity;
  if (name == "zoned") return FocusMode::zoned;
  throw Error(ErrorCode::Validation, "unknown focus mode '" + name + "'");
}

double focus_delay(double t_n, double alpha, double delta_m, double c) {
  const double d = delta_m / c;
  return t_n - std::sqrt(t_n * t_n + d * d - 2.0 * t_n * d * std::sin(alpha));
}

double sample_channel(const ChannelSet& ch, int m, double t, Interp interp) {
  if (t < 0.0 || ch.grid_len == 0) return 0.0;
  const double x = t / ch.grid_step;
  const auto i = static_cast<std::size_t>(x);
  if (i >= ch.grid_len - 1) {
    return (i == ch.grid_len - 1 && x == static_cast<double>(i)) ? ch.channel(m)[i] : 0.0;
  }
  const auto row = ch.channel(m);
  const double f = x - static_cast<double>(i);
  if (interp == Interp::cubic && i >= 1 && i + 2 < ch.grid_len) {
    // Catmull-Rom
    const double p0 = row[i - 1];
    const double p1 = row[i];
    const double p2 = row[i + 1];
    const double p3 = row[i + 2];
    return p1 + 0.5 * f *
                    (p2 - p0 +
                     f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  }
  return (1.0 - f) * row[i] + f * row[i + 1];
}

double distort_channel(const ChannelSet& ch, int m, double alpha, double t, Interp interp) {
  const double d = ch.geometry.offset_time(m);
  if (d == 0.0) return sample_channel(ch, m, t, interp);
  const double warped = 0.5 * (t + std::sqrt(t * t + 4.0 * d * (d - t * std::sin(alpha))));
  return sample_channel(ch, m, warped, interp);
}

BeamformedLine beamform_line(const ChannelSet& ch, double alpha, const BeamformOptions& opts) {
  if (!(opts.out_step >= ch.grid_step * (1.0 - 1e-12))) {
    throw Error(ErrorCode::Precondition, "out_step must be >= the channel grid step");
  }
  if (opts.mode == FocusMode::zoned && opts.num_focal_zones < 1) {
    throw Error(ErrorCode::Precondition, "num_focal_zones must be >= 1");
  }
  BeamformedLine line;
  line.grid_step = opts.out_step;
  line.alpha = alpha;
  line.focus_mode = opts.mode;
  const auto n = static_cast<std::size_t>(std::ceil(ch.tau / opts.out_step - 1e-9)) + 1;
  line.samples.assign(n, 0.0);

  const int n_el = ch.num_elements();
  const double c = ch.geometry.speed_of_sound;
  const double zone_width = ch.tau / std::max(1, opts.num_focal_zones);

  for (int m = 0; m < n_el; ++m) {
    const double delta = ch.geometry.offset(m);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) * opts.out_step;
      double v = 0.0;
      switch (opts.mode) {
      case FocusMode::dynamic:
        v = distort_channel(ch, m, alpha, t, opts.interp);
        break;
      case FocusMode::infinity:
        v = sample_channel(ch, m, t, opts.interp);
        break;
      case FocusMode::zoned: {
        const auto zone = std::min<double>(opts.num_focal_zones - 1, std::floor(t / zone_width));
        const double centre = (zone + 0.5) * zone_width;
        v = sample_channel(ch, m, t - focus_delay(0.5 * centre, alpha, delta, c), opts.interp);
        break;
      }
      }
      line.samples[j] += v;
    }
  }
  return line;
}

std::vector<double> envelope_detect(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, samples);
  // One-sided doubling: keep DC (and Nyquist for even n), double positives.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spec[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      spec[k] = 0.0;
    }
  }
  std::vector<std::complex<double>> analytic;
  fft.inv(analytic, spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]);
  return env;
}

std::vector<double> envelope_detect(const BeamformedLine& line) {
  return envelope_detect(line.samples);
}

} // namespace xbeam
