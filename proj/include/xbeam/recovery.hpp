#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xbeam/pulse_model.hpp"
#include "xbeam/xampling.hpp"

namespace xbeam {

/// Positive-half Fourier data of the beamformed line.
struct FourierCoeffs {
  Eigen::VectorXcd phi; // S^+ c, positive half (Fourier coefficients of Phi)
  Eigen::VectorXcd y;   // phi_k / H(omega_k)
  std::vector<int> kappa_pos;
  double tau = 0.0;

  [[nodiscard]] int K() const { return static_cast<int>(y.size()); }
};

/// y = H^{-1} (S^+ c), keeping the positive half. `H_diag` follows the
/// ordering of `kappa`. Throws RankDeficient when S lacks full column rank.
[[nodiscard]] FourierCoeffs recover_fourier(const Eigen::VectorXd& c, const MixingMatrix& S,
                                            const Eigen::VectorXcd& H_diag,
                                            const std::vector<int>& kappa, double tau);

inline constexpr double kNoisySvThreshold = 1e-2;
inline constexpr double kNoiselessSvThreshold = 1e-8;

struct PencilOptions {
  std::optional<int> eta; // default: floor(K/3), clamped into [L_max, K - L_max]
  double sv_threshold = kNoisySvThreshold;
  int L_max = 1;
  // Truncate the estimated order at L_max instead of failing.
  bool cap_order = false;
};

struct DelayEstimate {
  std::vector<double> delays; // ascending, in [0, tau)
  std::vector<double> singular_values;
  int model_order = 0;
};

// Pencil parameter actually used for a K-coefficient problem.
[[nodiscard]] int resolve_eta(int K, const PencilOptions& opts);

/// Matrix-pencil delay estimation from y_k = sum_l a_l exp(-j 2 pi k t_l / tau).
/// Throws Precondition when eta violates L_max <= eta <= K - L_max,
/// OrderOverflow when more than L_max components are detected (and
/// cap_order is off), ConditioningFailure when the eigen-solve fails.
[[nodiscard]] DelayEstimate matrix_pencil(const FourierCoeffs& y, const PencilOptions& opts);

/// Annihilating-filter delay estimation for a given order. Throws
/// SingularSystem when the annihilation system has no unique solution.
[[nodiscard]] std::vector<double> annihilating_filter(const FourierCoeffs& y, int L_est);

struct AmplitudeFit {
  std::vector<double> amplitudes; // real parts, same order as the delays
  double max_imag_ratio = 0.0;
  bool imag_warning = false;
  double residual = 0.0; // ||y - V a|| / ||y||
};

inline constexpr double kMaxVandermondeCondition = 1e10;

/// Least-squares fit of y against V_{k,l} = exp(-j 2 pi k t_l / tau).
/// Throws IllConditioned if cond(V) exceeds 1e10.
[[nodiscard]] AmplitudeFit least_squares_amplitudes(const FourierCoeffs& y,
                                                    const std::vector<double>& delays);

enum class DelayMethod { pencil, annihilating };

const char* to_string(DelayMethod m);
DelayMethod delay_method_from_string(const std::string& name);

struct RecoveryOptions {
  DelayMethod method = DelayMethod::pencil;
  std::optional<int> eta;
  double sv_threshold = kNoisySvThreshold;
  bool cap_order = true;
};

struct LineEstimate {
  std::vector<double> delays;     // ascending
  std::vector<double> amplitudes; // beamformed-line amplitudes b_l
  int model_order = 0;
  std::vector<double> singular_values;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

/// Fourier unmixing, delay estimation and amplitude fit for one line.
[[nodiscard]] LineEstimate recover_line(const Eigen::VectorXd& c, const XampleConfig& cfg,
                                        const MixingMatrix& S, const PulseModel& pulse,
                                        const RecoveryOptions& opts = {});

} // namespace xbeam
