#include "xbeam/acoustic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "xbeam/error.hpp"
#include "xbeam/xampling.hpp"

namespace xbeam {

namespace {

// Reflectivity std-dev used for the speckle surrogate when no SNR target is set.
constexpr double kDefaultSpeckleSigma = 0.05;

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

} // namespace

void validate(const ArrayGeometry& geom) {
  if (geom.num_elements < 1) {
    throw Error(ErrorCode::InvariantViolation, "array.num_elements must be >= 1");
  }
  if (!(geom.pitch > 0.0) || !std::isfinite(geom.pitch)) {
    throw Error(ErrorCode::InvariantViolation, "array.pitch_m must be positive");
  }
  if (!(geom.speed_of_sound > 0.0) || !std::isfinite(geom.speed_of_sound)) {
    throw Error(ErrorCode::InvariantViolation, "speed_of_sound_m_s must be positive");
  }
}

void validate(const Scene& scene) {
  if (!(scene.tau > 0.0) || !std::isfinite(scene.tau)) {
    throw Error(ErrorCode::InvariantViolation, "tau_s must be positive");
  }
  if (!std::isfinite(scene.alpha)) {
    throw Error(ErrorCode::InvariantViolation, "alpha_rad must be finite");
  }
  std::vector<double> times;
  for (const auto& s : scene.scatterers) {
    if (!(s.axial_time > 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "scatterer t_n_s must be positive");
    }
    if (!(2.0 * s.axial_time < scene.tau)) {
      std::ostringstream os;
      os << "scatterer echo 2*t_n=" << 2.0 * s.axial_time << " s is outside tau=" << scene.tau;
      throw Error(ErrorCode::InvariantViolation, os.str());
    }
    if (!std::isfinite(s.reflectivity)) {
      throw Error(ErrorCode::InvariantViolation, "scatterer reflectivity must be finite");
    }
    times.push_back(s.axial_time);
  }
  std::sort(times.begin(), times.end());
  if (std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw Error(ErrorCode::InvariantViolation, "scatterer delays must be distinct");
  }
  if (scene.noise.speckle_count < 0) {
    throw Error(ErrorCode::InvariantViolation, "noise.speckle_count must be >= 0");
  }
  if (scene.noise.snr_db && !std::isfinite(*scene.noise.snr_db)) {
    throw Error(ErrorCode::InvariantViolation, "noise.snr_db must be finite");
  }
}

double sim_grid_step(int oversample) {
  if (oversample < 1) {
    throw Error(ErrorCode::Validation, "oversample must be >= 1");
  }
  return 1.0 / (oversample * kNyquistRateHz);
}

double arrival_time(double t_n, double alpha, double delta_m, double c) {
  const double lateral = c * t_n * std::sin(alpha) - delta_m;
  const double axial = c * t_n * std::cos(alpha);
  return t_n + std::hypot(lateral, axial) / c;
}

ChannelSet synthesize_channels(const Scene& scene, const ArrayGeometry& geom,
                               const PulseModel& pulse, double grid_step,
                               std::optional<double> grid_end) {
  validate(geom);
  validate(pulse);
  validate(scene);
  if (!(grid_step > 0.0) || grid_step > sim_grid_step(kMinSimOversample) * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "grid step " << grid_step << " s exceeds 1/(16 * 20 MHz)";
    throw Error(ErrorCode::GridTooCoarse, os.str());
  }
  const double end = grid_end.value_or(tau_hat(scene.tau, geom));

  ChannelSet ch;
  ch.grid_step = grid_step;
  ch.grid_len = static_cast<std::size_t>(std::ceil(end / grid_step - 1e-9)) + 1;
  ch.geometry = geom;
  ch.tau = scene.tau;
  ch.samples.assign(static_cast<std::size_t>(geom.num_elements) * ch.grid_len, 0.0);

  const double half = pulse.support_half_width() + 2.0 * grid_step;
  const auto last = static_cast<long>(ch.grid_len) - 1;
  for (int m = 0; m < geom.num_elements; ++m) {
    auto row = ch.channel(m);
    for (const auto& s : scene.scatterers) {
      const double t0 = arrival_time(s.axial_time, scene.alpha, geom.offset(m), geom.speed_of_sound);
      const long i0 = std::max(0L, static_cast<long>(std::floor((t0 - half) / grid_step)));
      const long i1 = std::min(last, static_cast<long>(std::ceil((t0 + half) / grid_step)));
      for (long i = i0; i <= i1; ++i) {
        row[static_cast<std::size_t>(i)] +=
            s.reflectivity * eval_pulse(pulse, static_cast<double>(i) * grid_step - t0);
      }
    }
  }
  return ch;
}

ChannelSet add_interference(const ChannelSet& ch, const PulseModel& pulse,
                            std::optional<double> snr_db, int speckle_count,
                            std::uint64_t seed) {
  if (snr_db && !std::isfinite(*snr_db)) {
    throw Error(ErrorCode::Precondition, "snr_db must be finite or disabled");
  }
  ChannelSet out = ch;
  if (!snr_db && speckle_count <= 0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n_el = ch.num_elements();

  std::vector<double> budget(static_cast<std::size_t>(n_el), 0.0);
  if (snr_db) {
    const double ratio = std::pow(10.0, *snr_db / 10.0);
    for (int m = 0; m < n_el; ++m) budget[static_cast<std::size_t>(m)] = mean_square(ch.channel(m)) / ratio;
  }

  std::vector<double> speckle_power(static_cast<std::size_t>(n_el), 0.0);
  if (speckle_count > 0) {
    // Weak on-beam scatterers spread over the part of the window where a
    // full pulse fits.
    const double margin = pulse.support_half_width();
    const double t_lo = margin;
    const double t_hi = 0.5 * (ch.tau - margin);
    std::uniform_real_distribution<double> where(t_lo, std::max(t_lo, t_hi));
    Scene speckle;
    speckle.tau = ch.tau;
    for (int i = 0; i < speckle_count; ++i) {
      const double t = where(rng);
      speckle.scatterers.push_back({t, gauss(rng)});
    }
    ChannelSet field = synthesize_channels(speckle, ch.geometry, pulse, ch.grid_step, ch.grid_end());

    double eps = kDefaultSpeckleSigma;
    if (snr_db) {
      // Half of the noise budget goes to speckle, the rest to white noise.
      double field_power = 0.0;
      double target = 0.0;
      for (int m = 0; m < n_el; ++m) {
        field_power += mean_square(field.channel(m));
        target += 0.5 * budget[static_cast<std::size_t>(m)];
      }
      eps = field_power > 0.0 ? std::sqrt(target / field_power) : 0.0;
    }
    for (int m = 0; m < n_el; ++m) {
      auto dst = out.channel(m);
      auto src = field.channel(m);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += eps * src[i];
      speckle_power[static_cast<std::size_t>(m)] = eps * eps * mean_square(src);
    }
  }

  if (snr_db) {
    std::vector<double> w(ch.grid_len);
    for (int m = 0; m < n_el; ++m) {
      for (auto& v : w) v = gauss(rng);
      const double target = std::max(0.0, budget[static_cast<std::size_t>(m)] -
                                              speckle_power[static_cast<std::size_t>(m)]);
      const double p = mean_square(w);
      const double scale = p > 0.0 ? std::sqrt(target / p) : 0.0;
      auto dst = out.channel(m);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * w[i];
    }
  }
  return out;
}

std::vector<double> measured_snr_db(const ChannelSet& clean, const ChannelSet& noisy) {
  std::vector<double> out;
  for (int m = 0; m < clean.num_elements(); ++m) {
    auto a = clean.channel(m);
    auto b = noisy.channel(m);
    double ps = 0.0;
    double pn = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ps += a[i] * a[i];
      pn += (b[i] - a[i]) * (b[i] - a[i]);
    }
    out.push_back(10.0 * std::log10(ps / pn));
  }
  return out;
}

} // namespace xbeam
