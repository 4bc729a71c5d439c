#include "xbeam/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "xbeam/error.hpp"

namespace xbeam {

using std::numbers::pi;
using cd = std::complex<double>;

const char* to_string(DelayMethod m) {
  return m == DelayMethod::pencil ? "pencil" : "annihilating";
}

DelayMethod delay_method_from_string(const std::string& name) {
  if (name == "pencil") return DelayMethod::pencil;
  if (name == "annihilating") return DelayMethod::annihilating;
  throw Error(ErrorCode::Validation, "unknown method '" + name + "'");
}

FourierCoeffs recover_fourier(const Eigen::VectorXd& c, const MixingMatrix& S,
                              const Eigen::VectorXcd& H_diag, const std::vector<int>& kappa,
                              double tau) {
  const Eigen::Index n_cols = S.entries.cols();
  if (c.size() != S.entries.rows() || H_diag.size() != n_cols ||
      static_cast<Eigen::Index>(kappa.size()) != n_cols || n_cols % 2 != 0) {
    throw Error(ErrorCode::Precondition, "recover_fourier: inconsistent dimensions");
  }
  Eigen::VectorXcd phi;
  if (S.structure == MixingMatrix::Structure::cos_sin) {
    // S is square and invertible: S^{-1} = [[I, jI], [I, -jI]].
    const Eigen::Index h = n_cols / 2;
    phi.resize(n_cols);
    for (Eigen::Index i = 0; i < h; ++i) {
      phi[i] = cd(c[i], c[h + i]);
      phi[h + i] = cd(c[i], -c[h + i]);
    }
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(S.entries);
    if (cod.rank() < n_cols) {
      throw Error(ErrorCode::RankDeficient, "mixing matrix is not full column rank");
    }
    phi = cod.solve(c.cast<cd>());
  }
  for (Eigen::Index i = 0; i < n_cols; ++i) {
    if (std::abs(H_diag[i]) == 0.0) {
      throw Error(ErrorCode::SingularHarmonic, "H has a zero diagonal entry");
    }
  }
  const Eigen::Index K = n_cols / 2;
  FourierCoeffs out;
  out.phi = phi.head(K);
  out.y = phi.head(K).cwiseQuotient(H_diag.head(K));
  out.kappa_pos.assign(kappa.begin(), kappa.begin() + K);
  out.tau = tau;
  return out;
}

int resolve_eta(int K, const PencilOptions& opts) {
  const int lo = opts.L_max;
  const int hi = K - opts.L_max;
  if (lo > hi) {
    std::ostringstream os;
    os << "no pencil parameter satisfies " << lo << " <= eta <= " << hi << " (K=" << K << ")";
    throw Error(ErrorCode::Precondition, os.str());
  }
  if (opts.eta) {
    if (*opts.eta < lo || *opts.eta > hi) {
      std::ostringstream os;
      os << "pencil parameter eta=" << *opts.eta << " outside [" << lo << ", " << hi << "]";
      throw Error(ErrorCode::Precondition, os.str());
    }
    return *opts.eta;
  }
  return std::clamp(K / 3, lo, hi);
}

namespace {

double phase_to_delay(cd z, double tau) {
  double t = -tau * std::arg(z) / (2.0 * pi);
  if (t < 0.0) t += tau;
  if (t >= tau) t -= tau;
  return t;
}

Eigen::MatrixXcd hankel(const Eigen::VectorXcd& y, int eta) {
  const Eigen::Index rows = y.size() - eta;
  const Eigen::Index cols = eta + 1;
  Eigen::MatrixXcd Y(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) Y(i, j) = y[i + j];
  }
  return Y;
}

} // namespace

DelayEstimate matrix_pencil(const FourierCoeffs& y, const PencilOptions& opts) {
  const int K = y.K();
  if (opts.L_max < 1) throw Error(ErrorCode::Precondition, "L_max must be >= 1");
  const int eta = resolve_eta(K, opts);

  const Eigen::MatrixXcd Y = hankel(y.y, eta);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();

  DelayEstimate out;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  if (sv.size() == 0 || !(sv[0] > 0.0)) return out;

  int order = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] / sv[0] > opts.sv_threshold) ++order;
  }
  if (order > opts.L_max) {
    if (!opts.cap_order) {
      std::ostringstream os;
      os << "estimated model order " << order << " exceeds L_max=" << opts.L_max;
      throw Error(ErrorCode::OrderOverflow, os.str());
    }
    order = opts.L_max;
  }
  out.model_order = order;

  const Eigen::MatrixXcd Vs = svd.matrixV().leftCols(order);
  const Eigen::MatrixXcd V1h = Vs.topRows(eta).adjoint();
  const Eigen::MatrixXcd V2h = Vs.bottomRows(eta).adjoint();
  const Eigen::MatrixXcd pencil =
      V2h * V1h.completeOrthogonalDecomposition().pseudoInverse();

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(pencil, false);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::ConditioningFailure, "pencil eigen-solve did not converge");
  }
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    out.delays.push_back(phase_to_delay(eig.eigenvalues()[i], y.tau));
  }
  std::sort(out.delays.begin(), out.delays.end());
  return out;
}

std::vector<double> annihilating_filter(const FourierCoeffs& y, int L_est) {
  const int K = y.K();
  if (L_est < 0 || K < 2 * L_est) {
    throw Error(ErrorCode::Precondition, "annihilating filter needs K >= 2 * L_est");
  }
  if (L_est == 0) return {};

  // Rows n = L..K-1: sum_i h_i y[n - i] = 0.
  const Eigen::Index rows = K - L_est;
  Eigen::MatrixXcd T(rows, L_est + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index i = 0; i <= L_est; ++i) T(r, i) = y.y[r + L_est - i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0)) {
    throw Error(ErrorCode::SingularSystem, "annihilation system is identically zero");
  }
  // With L_est + 1 unknowns the null space must be exactly one-dimensional.
  const Eigen::Index n_sv = sv.size();
  const int rank_needed = L_est;
  if (n_sv < rank_needed || sv[rank_needed - 1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::SingularSystem, "annihilation system is rank-deficient");
  }
  const Eigen::VectorXcd h = svd.matrixV().col(L_est);
  if (std::abs(h[0]) <= 1e-14 * h.norm()) {
    throw Error(ErrorCode::SingularSystem, "annihilating filter has a vanishing leading tap");
  }

  // Roots of z^L + (h_1/h_0) z^{L-1} + ... + h_L/h_0 via the companion matrix.
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(L_est, L_est);
  for (int i = 0; i < L_est; ++i) companion(0, i) = -h[i + 1] / h[0];
  for (int i = 1; i < L_est; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(companion, false);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "annihilating polynomial root-finding failed");
  }
  std::vector<double> delays;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    delays.push_back(phase_to_delay(eig.eigenvalues()[i], y.tau));
  }
  std::sort(delays.begin(), delays.end());
  return delays;
}

AmplitudeFit least_squares_amplitudes(const FourierCoeffs& y, const std::vector<double>& delays) {
  AmplitudeFit fit;
  const double y_norm = y.y.norm();
  if (delays.empty()) {
    fit.residual = y_norm > 0.0 ? 1.0 : 0.0;
    return fit;
  }
  const auto K = static_cast<Eigen::Index>(y.K());
  const auto L = static_cast<Eigen::Index>(delays.size());
  if (L > K) throw Error(ErrorCode::Precondition, "more delays than Fourier coefficients");

  Eigen::MatrixXcd V(K, L);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index l = 0; l < L; ++l) {
      const double phase = -2.0 * pi * y.kappa_pos[static_cast<std::size_t>(k)] *
                           delays[static_cast<std::size_t>(l)] / y.tau;
      V(k, l) = std::polar(1.0, phase);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv[L - 1] > 0.0 ? sv[0] / sv[L - 1] : INFINITY;
  if (!(cond <= kMaxVandermondeCondition)) {
    std::ostringstream os;
    os << "Vandermonde condition number " << cond << " exceeds 1e10 (near-coincident delays)";
    throw Error(ErrorCode::IllConditioned, os.str());
  }
  const Eigen::VectorXcd a = svd.solve(y.y);
  for (Eigen::Index l = 0; l < L; ++l) {
    fit.amplitudes.push_back(a[l].real());
    if (a[l].real() != 0.0) {
      fit.max_imag_ratio = std::max(fit.max_imag_ratio, std::abs(a[l].imag()) / std::abs(a[l].real()));
    } else if (a[l].imag() != 0.0) {
      fit.max_imag_ratio = INFINITY;
    }
  }
  fit.imag_warning = fit.max_imag_ratio > 1e-3;
  fit.residual = y_norm > 0.0 ? (y.y - V * a).norm() / y_norm : 0.0;
  return fit;
}

LineEstimate recover_line(const Eigen::VectorXd& c, const XampleConfig& cfg,
                          const MixingMatrix& S, const PulseModel& pulse,
                          const RecoveryOptions& opts) {
  const auto H = build_H(pulse, cfg.kappa, cfg.tau);
  const FourierCoeffs y = recover_fourier(c, S, H, cfg.kappa, cfg.tau);

  PencilOptions po;
  po.eta = opts.eta;
  po.sv_threshold = opts.sv_threshold;
  po.L_max = cfg.L;
  po.cap_order = opts.cap_order;
  DelayEstimate est = matrix_pencil(y, po);

  LineEstimate out;
  out.singular_values = est.singular_values;
  out.model_order = est.model_order;
  if (opts.method == DelayMethod::annihilating) {
    est.delays = annihilating_filter(y, est.model_order);
  }
  const AmplitudeFit fit = least_squares_amplitudes(y, est.delays);
  out.delays = est.delays;
  // y carries the 1/tau of the Fourier-series normalization.
  for (double a : fit.amplitudes) out.amplitudes.push_back(a * cfg.tau);
  out.residual = fit.residual;
  if (fit.imag_warning) {
    std::ostringstream os;
    os << "amplitude imaginary/real ratio " << fit.max_imag_ratio << " exceeds 1e-3";
    out.warnings.push_back(os.str());
  }
  return out;
}

} // namespace xbeam
