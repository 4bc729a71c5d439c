#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "xbeam/acoustic_sim.hpp"
#include "xbeam/beamform.hpp"
#include "xbeam/pulse_model.hpp"

namespace xbeam {

/// Sampling configuration for one image line. Fully determines the kernel
/// bank and the recovery problem sizes.
struct XampleConfig {
  int L = 30;   // upper bound on reflectors per line
  int rho = 1;  // oversampling factor, K = 2 * rho * L
  double tau = 102.4e-6;
  double carrier_hz = 5.142e6;
  // Positive half ascending, then the negated positive half in the same
  // order, so kappa[i + K] == -kappa[i].
  std::vector<int> kappa;
  int p = 0; // branch count
  FocusMode focus_mode = FocusMode::dynamic;
  ArrayGeometry geometry;

  [[nodiscard]] int K() const { return static_cast<int>(kappa.size() / 2); }
  [[nodiscard]] std::vector<int> kappa_positive() const {
    return {kappa.begin(), kappa.begin() + K()};
  }
};

/// Harmonic index set around round(f_c * tau). Throws OffBand when the
/// pulse spectrum is (relatively) null on any selected harmonic.
[[nodiscard]] std::vector<int> select_kappa(int L, int rho, double tau, const PulseModel& pulse,
                                            double rel_threshold = kDefaultHarmonicThreshold);

[[nodiscard]] XampleConfig make_xample_config(int L, int rho, double tau, const PulseModel& pulse,
                                              const ArrayGeometry& geometry,
                                              FocusMode mode = FocusMode::dynamic);

struct MixingMatrix {
  enum class Structure { cos_sin, custom };
  Eigen::MatrixXcd entries; // p x |kappa|
  Structure structure = Structure::custom;

  [[nodiscard]] int p() const { return static_cast<int>(entries.rows()); }
};

/// [[I/2, I/2], [I/(2j), -I/(2j)]] with I of size p/2. With the kappa
/// ordering above, row q < p/2 yields cos(2 pi k_q t / tau) and row
/// p/2 + q yields -sin(2 pi k_q t / tau).
[[nodiscard]] MixingMatrix build_S(int p);

// Wraps a user matrix; throws RankDeficient unless it has full column rank.
[[nodiscard]] MixingMatrix custom_S(const Eigen::MatrixXcd& entries);

/// Generalized kernel hat-s_{q,m}(t) for 0-based branch q and element index
/// m. Zero for t < |delta_m / c|. In infinity mode delta is taken as 0.
[[nodiscard]] double kernel_value(const XampleConfig& cfg, const MixingMatrix& S, int q, int m,
                                  double t);

/// Widened integration bound max_m 0.5 * (tau + sqrt(tau^2 + 4 (delta_m/c)^2)).
[[nodiscard]] double tau_hat(double tau, const ArrayGeometry& geometry);

struct XampleOutput {
  // p x (number of element groups). Column g integrates the elements in
  // groups[g]; unfolded runs have one element per group.
  Eigen::MatrixXd c_qm;
  std::vector<std::pair<int, int>> groups;
  Eigen::VectorXd c; // length p, c[q] = sum over columns of c_qm
};

struct XampleOptions {
  // Sum mirrored element pairs before modulation.
  bool fold_symmetric = true;
};

/// Low-rate samples c_{q,m} = (1/tau) int_0^tau_hat hat-s_{q,m}(t) phi_m(t) dt
/// by trapezoidal quadrature on the channel grid.
[[nodiscard]] XampleOutput xample_channels(const ChannelSet& ch, const XampleConfig& cfg,
                                           const MixingMatrix& S, const XampleOptions& opts = {});

/// (1/tau) int_0^tau signal(t) exp(-j 2 pi k t / tau) dt for each k, by
/// trapezoidal quadrature on the signal's grid.
[[nodiscard]] Eigen::VectorXcd fourier_coefficients(const std::vector<double>& samples,
                                                    double step, double tau,
                                                    const std::vector<int>& ks);

/// Reference path: applies the plain kernels s_q(t) to an already
/// beamformed line, c_q = (1/tau) int_0^tau s_q(t) Phi(t) dt.
[[nodiscard]] Eigen::VectorXd xample_beamformed_oracle(const BeamformedLine& line,
                                                       const XampleConfig& cfg,
                                                       const MixingMatrix& S);

} // namespace xbeam
