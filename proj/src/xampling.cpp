#include "xbeam/xampling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "xbeam/error.hpp"
#include "xbeam/quadrature.hpp"

namespace xbeam {

using std::numbers::pi;
using cd = std::complex<double>;

std::vector<int> select_kappa(int L, int rho, double tau, const PulseModel& pulse,
                              double rel_threshold) {
  if (L < 1 || rho < 1) {
    throw Error(ErrorCode::Validation, "L and rho must be >= 1");
  }
  if (!(tau > 0.0) || !(pulse.carrier_hz > 0.0)) {
    throw Error(ErrorCode::Validation, "tau and carrier frequency must be positive");
  }
  const int K = 2 * rho * L;
  const auto kc = static_cast<int>(std::lround(pulse.carrier_hz * tau));
  std::vector<int> kappa;
  kappa.reserve(static_cast<std::size_t>(2 * K));
  for (int k = kc - K / 2 + 1; k <= kc + K / 2; ++k) kappa.push_back(k);
  for (int i = 0; i < K; ++i) kappa.push_back(-kappa[static_cast<std::size_t>(i)]);

  try {
    (void)build_H(pulse, std::span<const int>(kappa.data(), static_cast<std::size_t>(K)), tau,
                  rel_threshold);
  } catch (const Error& e) {
    throw Error(ErrorCode::OffBand, std::string("kappa is off the pulse band: ") + e.what());
  }
  if (kappa.front() <= 0) {
    throw Error(ErrorCode::OffBand, "kappa reaches non-positive harmonics; increase tau or carrier");
  }
  return kappa;
}

XampleConfig make_xample_config(int L, int rho, double tau, const PulseModel& pulse,
                                const ArrayGeometry& geometry, FocusMode mode) {
  validate(geometry);
  XampleConfig cfg;
  cfg.L = L;
  cfg.rho = rho;
  cfg.tau = tau;
  cfg.carrier_hz = pulse.carrier_hz;
  cfg.kappa = select_kappa(L, rho, tau, pulse);
  cfg.p = static_cast<int>(cfg.kappa.size());
  cfg.focus_mode = mode;
  cfg.geometry = geometry;
  return cfg;
}

MixingMatrix build_S(int p) {
  if (p < 2 || p % 2 != 0) {
    throw Error(ErrorCode::Precondition, "branch count p must be even and positive");
  }
  const Eigen::Index h = p / 2;
  MixingMatrix S;
  S.structure = MixingMatrix::Structure::cos_sin;
  S.entries = Eigen::MatrixXcd::Zero(p, p);
  const cd inv2j = 1.0 / cd(0.0, 2.0);
  for (Eigen::Index i = 0; i < h; ++i) {
    S.entries(i, i) = 0.5;
    S.entries(i, h + i) = 0.5;
    S.entries(h + i, i) = inv2j;
    S.entries(h + i, h + i) = -inv2j;
  }
  return S;
}

MixingMatrix custom_S(const Eigen::MatrixXcd& entries) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(entries);
  if (cod.rank() < entries.cols()) {
    throw Error(ErrorCode::RankDeficient, "mixing matrix must have full column rank");
  }
  return {entries, MixingMatrix::Structure::custom};
}

double tau_hat(double tau, const ArrayGeometry& geometry) {
  double best = tau;
  for (int m = 0; m < geometry.num_elements; ++m) {
    const double d = geometry.offset_time(m);
    best = std::max(best, 0.5 * (tau + std::sqrt(tau * tau + 4.0 * d * d)));
  }
  return best;
}

namespace {

double effective_offset_time(const XampleConfig& cfg, int m) {
  return cfg.focus_mode == FocusMode::infinity ? 0.0 : cfg.geometry.offset_time(m);
}

void check_kernel_bank(const XampleConfig& cfg, const MixingMatrix& S) {
  if (S.entries.cols() != static_cast<Eigen::Index>(cfg.kappa.size())) {
    throw Error(ErrorCode::Precondition, "mixing matrix columns must match |kappa|");
  }
  if (cfg.kappa.size() % 2 != 0) {
    throw Error(ErrorCode::Precondition, "kappa must be symmetric");
  }
}

// Real part of S * F, where F holds the positive-half integrals and the
// negative half is their conjugate (real integrands).
Eigen::VectorXd mix(const MixingMatrix& S, const Eigen::VectorXcd& positive_half) {
  const Eigen::Index K = positive_half.size();
  Eigen::VectorXcd full(2 * K);
  full.head(K) = positive_half;
  full.tail(K) = positive_half.conjugate();
  return (S.entries * full).real();
}

} // namespace

double kernel_value(const XampleConfig& cfg, const MixingMatrix& S, int q, int m, double t) {
  check_kernel_bank(cfg, S);
  if (q < 0 || q >= S.p() || m < 0 || m >= cfg.geometry.num_elements) {
    throw Error(ErrorCode::Precondition, "kernel index out of range");
  }
  const double d = effective_offset_time(cfg, m);
  double jacobian = 1.0;
  double warped = t;
  if (d == 0.0) {
    if (t < 0.0) return 0.0;
  } else {
    if (t < std::abs(d)) return 0.0;
    jacobian = 1.0 + (d / t) * (d / t);
    warped = t - d * d / t;
  }
  cd acc = 0.0;
  for (std::size_t i = 0; i < cfg.kappa.size(); ++i) {
    const double phase = -2.0 * pi * cfg.kappa[i] * warped / cfg.tau;
    acc += S.entries(q, static_cast<Eigen::Index>(i)) * std::polar(1.0, phase);
  }
  return jacobian * acc.real();
}

XampleOutput xample_channels(const ChannelSet& ch, const XampleConfig& cfg,
                             const MixingMatrix& S, const XampleOptions& opts) {
  check_kernel_bank(cfg, S);
  if (ch.num_elements() != cfg.geometry.num_elements) {
    throw Error(ErrorCode::Precondition, "channel count does not match the configured array");
  }
  const double upper = tau_hat(cfg.tau, cfg.geometry);
  if (ch.grid_end() < upper * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "channel grid ends at " << ch.grid_end() << " s, before tau_hat=" << upper << " s";
    throw Error(ErrorCode::GridTooShort, os.str());
  }

  const int n_el = ch.num_elements();
  XampleOutput out;
  for (int m = 0; m < n_el; ++m) {
    const int mirror = cfg.geometry.mirror(m);
    if (!opts.fold_symmetric) {
      out.groups.emplace_back(m, m);
    } else if (m <= mirror) {
      out.groups.emplace_back(m, mirror);
    }
  }

  const int K = cfg.K();
  const double h = ch.grid_step;
  const auto weights = trapezoid_weights(ch.grid_len, h, upper);
  const double w_base = 2.0 * pi * cfg.kappa.front() / cfg.tau;
  const double w_step = 2.0 * pi / cfg.tau;

  out.c_qm = Eigen::MatrixXd::Zero(S.p(), static_cast<Eigen::Index>(out.groups.size()));
  std::vector<double> summed(ch.grid_len);
  std::vector<cd> acc(static_cast<std::size_t>(K));

  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    const auto [a, b] = out.groups[g];
    const auto ra = ch.channel(a);
    if (a == b) {
      std::copy(ra.begin(), ra.end(), summed.begin());
    } else {
      const auto rb = ch.channel(b);
      for (std::size_t i = 0; i < ch.grid_len; ++i) summed[i] = ra[i] + rb[i];
    }

    const double d = effective_offset_time(cfg, a);
    const double d2 = d * d;
    const double start = std::abs(d);
    std::fill(acc.begin(), acc.end(), cd(0.0));
    for (std::size_t i = 0; i < ch.grid_len; ++i) {
      const double f = summed[i];
      if (f == 0.0 || weights[i] == 0.0) continue;
      const double t = static_cast<double>(i) * h;
      if (t < start) continue;
      double jac = 1.0;
      double warped = t;
      if (d != 0.0) {
        jac = 1.0 + d2 / (t * t);
        warped = t - d2 / t;
      }
      // e^{-j w_k warped} for consecutive k by recurrence.
      cd z = std::polar(1.0, -w_base * warped);
      const cd step = std::polar(1.0, -w_step * warped);
      const double amp = weights[i] * jac * f;
      for (int k = 0; k < K; ++k) {
        acc[static_cast<std::size_t>(k)] += amp * z;
        z *= step;
      }
    }
    Eigen::VectorXcd half(K);
    for (int k = 0; k < K; ++k) half[k] = acc[static_cast<std::size_t>(k)] / cfg.tau;
    out.c_qm.col(static_cast<Eigen::Index>(g)) = mix(S, half);
  }

  // Fixed summation order over groups.
  out.c = Eigen::VectorXd::Zero(S.p());
  for (Eigen::Index g = 0; g < out.c_qm.cols(); ++g) out.c += out.c_qm.col(g);
  return out;
}

Eigen::VectorXcd fourier_coefficients(const std::vector<double>& samples, double step, double tau,
                                      const std::vector<int>& ks) {
  const auto weights = trapezoid_weights(samples.size(), step, tau);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(ks.size()));
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const double omega = 2.0 * pi * ks[j] / tau;
    cd acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (weights[i] == 0.0 || samples[i] == 0.0) continue;
      acc += weights[i] * samples[i] * std::polar(1.0, -omega * static_cast<double>(i) * step);
    }
    out[static_cast<Eigen::Index>(j)] = acc / tau;
  }
  return out;
}

Eigen::VectorXd xample_beamformed_oracle(const BeamformedLine& line, const XampleConfig& cfg,
                                         const MixingMatrix& S) {
  check_kernel_bank(cfg, S);
  const auto half = fourier_coefficients(line.samples, line.grid_step, cfg.tau, cfg.kappa_positive());
  return mix(S, half);
}

} // namespace xbeam
