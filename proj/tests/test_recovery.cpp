#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "xbeam/error.hpp"
#include "xbeam/recovery.hpp"

using namespace xbeam;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

constexpr double kTau = 102.4e-6;

FourierCoeffs make_y(const std::vector<double>& t, const std::vector<cd>& a, int K, int k0 = 0) {
  FourierCoeffs y;
  y.tau = kTau;
  y.y = Eigen::VectorXcd::Zero(K);
  for (int k = 0; k < K; ++k) {
    y.kappa_pos.push_back(k0 + k);
    for (std::size_t l = 0; l < t.size(); ++l) {
      y.y[k] += a[l] * std::polar(1.0, -2 * pi * (k0 + k) * t[l] / kTau);
    }
  }
  y.phi = y.y;
  return y;
}

void check_delays(const std::vector<double>& got, std::vector<double> want, double tol) {
  std::sort(want.begin(), want.end());
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

} // namespace

TEST_CASE("recover_fourier") {
  MixingMatrix one{Eigen::MatrixXcd::Identity(2, 2), MixingMatrix::Structure::custom};
  Eigen::VectorXd c(2);
  c << 4.0, 4.0;
  Eigen::VectorXcd H(2);
  H << 2.0, 2.0;
  const auto y = recover_fourier(c, one, H, {5, -5}, kTau);
  REQUIRE(y.K() == 1);
  CHECK(std::abs(y.y[0] - cd(2.0, 0.0)) < 1e-15);
  CHECK(y.kappa_pos == std::vector<int>{5});

  // Closed-form inverse vs generic pseudo-inverse.
  const auto S = build_S(6);
  MixingMatrix generic{S.entries, MixingMatrix::Structure::custom};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::VectorXd cc(6);
  for (int i = 0; i < 6; ++i) cc[i] = g(rng);
  Eigen::VectorXcd H6 = Eigen::VectorXcd::Constant(6, cd(0.3, 0.0));
  const std::vector<int> kap{10, 11, 12, -10, -11, -12};
  const auto a = recover_fourier(cc, S, H6, kap, kTau);
  const auto b = recover_fourier(cc, generic, H6, kap, kTau);
  CHECK((a.y - b.y).norm() <= 1e-12 * a.y.norm());
  const auto scaled = recover_fourier(-3.5 * cc, S, H6, kap, kTau);
  CHECK((scaled.y + 3.5 * a.y).norm() <= 1e-12 * a.y.norm());

  CHECK_THROWS_AS((void)recover_fourier(Eigen::VectorXd::Zero(4), S, H6, kap, kTau), Error);
  Eigen::VectorXcd Hz = H6;
  Hz[1] = 0.0;
  CHECK_THROWS_AS((void)recover_fourier(cc, S, Hz, kap, kTau), Error);
}

TEST_CASE("pencil parameter guard") {
  PencilOptions o;
  o.L_max = 3;
  CHECK(resolve_eta(12, o) == 4);
  o.eta = 2;
  CHECK_THROWS_AS((void)resolve_eta(12, o), Error);
  o.eta = 10;
  CHECK_THROWS_AS((void)resolve_eta(12, o), Error);
  o.eta = 9;
  CHECK(resolve_eta(12, o) == 9);
  const auto y = make_y({13e-6}, {1.0}, 12);
  o.eta = 11;
  try {
    (void)matrix_pencil(y, o);
    FAIL("expected Precondition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Precondition);
  }
}

TEST_CASE("matrix pencil, single cisoid") {
  const auto y = make_y({13e-6}, {1.0}, 8);
  PencilOptions o;
  o.eta = 3;
  o.sv_threshold = kNoiselessSvThreshold;
  const auto est = matrix_pencil(y, o);
  CHECK(est.model_order == 1);
  check_delays(est.delays, {13e-6}, 1e-12 * kTau);
  int above = 0;
  for (double s : est.singular_values) above += s > 1e-8 * est.singular_values[0];
  CHECK(above == 1);
}

TEST_CASE("matrix pencil, three delays") {
  const std::vector<double> t{11e-6, 47.3e-6, 80.05e-6};
  const auto y = make_y(t, {1.0, -0.6, 0.8}, 12, 500);
  PencilOptions o;
  o.L_max = 3;
  o.sv_threshold = kNoiselessSvThreshold;
  const auto est = matrix_pencil(y, o);
  CHECK(est.model_order == 3);
  check_delays(est.delays, t, 1e-9 * kTau);
  for (std::size_t i = 3; i < est.singular_values.size(); ++i) {
    CHECK(est.singular_values[i] <= 1e-8 * est.singular_values[0]);
  }
}

TEST_CASE("order overflow") {
  const auto y = make_y({11e-6, 47.3e-6, 80.05e-6}, {1.0, 1.0, 1.0}, 12);
  PencilOptions o;
  o.L_max = 2;
  o.sv_threshold = kNoiselessSvThreshold;
  try {
    (void)matrix_pencil(y, o);
    FAIL("expected OrderOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OrderOverflow);
  }
  o.cap_order = true;
  CHECK(matrix_pencil(y, o).model_order == 2);
}

TEST_CASE("annihilating filter") {
  const auto one = make_y({13e-6}, {1.0}, 8);
  PencilOptions o;
  o.eta = 3;
  o.sv_threshold = kNoiselessSvThreshold;
  const auto pen = matrix_pencil(one, o);
  const auto ann = annihilating_filter(one, 1);
  REQUIRE(ann.size() == 1);
  CHECK(std::abs(ann[0] - pen.delays[0]) <= 1e-9 * kTau);

  const std::vector<double> t{20e-6, 61.7e-6};
  check_delays(annihilating_filter(make_y(t, {0.9, -1.2}, 10, 498), 2), t, 1e-9 * kTau);

  try {
    (void)annihilating_filter(make_y({}, {}, 8), 1);
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
  // Over-specified order: the null space is not one-dimensional.
  CHECK_THROWS_AS((void)annihilating_filter(one, 3), Error);
  CHECK(annihilating_filter(one, 0).empty());
}

TEST_CASE("least-squares amplitudes") {
  const auto y = make_y({13e-6}, {2.5}, 8, 520);
  const auto fit = least_squares_amplitudes(y, {13e-6});
  REQUIRE(fit.amplitudes.size() == 1);
  CHECK(std::abs(fit.amplitudes[0] - 2.5) <= 1e-9);
  CHECK_FALSE(fit.imag_warning);
  CHECK(fit.residual <= 1e-12);

  const auto zero = make_y({}, {}, 8);
  for (double a : least_squares_amplitudes(zero, {10e-6, 30e-6}).amplitudes) CHECK(a == 0.0);

  const std::vector<double> t{10e-6, 30e-6, 55e-6};
  const auto y3 = make_y(t, {1.0, -2.0, 0.5}, 12, 500);
  const auto fwd = least_squares_amplitudes(y3, t);
  const auto rev = least_squares_amplitudes(y3, {t[2], t[0], t[1]});
  CHECK(rev.amplitudes[0] == doctest::Approx(fwd.amplitudes[2]));
  CHECK(rev.amplitudes[1] == doctest::Approx(fwd.amplitudes[0]));
  CHECK(rev.amplitudes[2] == doctest::Approx(fwd.amplitudes[1]));

  const auto complex_amp = make_y({13e-6}, {cd(1.0, 0.5)}, 8);
  CHECK(least_squares_amplitudes(complex_amp, {13e-6}).imag_warning);

  try {
    (void)least_squares_amplitudes(y3, {10e-6, 10e-6});
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
}

TEST_CASE("shift covariance and scale equivariance") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> td(5e-6, 60e-6), shift(0.0, 30e-6), gain(0.1, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> t{td(rng), td(rng) + 20e-6};
    const auto y = make_y(t, {1.0, 0.7}, 16, 510);
    PencilOptions o;
    o.L_max = 2;
    o.sv_threshold = kNoiselessSvThreshold;
    const auto base = matrix_pencil(y, o);

    const double d = shift(rng);
    auto ys = y;
    for (int k = 0; k < ys.K(); ++k) ys.y[k] *= std::polar(1.0, -2 * pi * ys.kappa_pos[k] * d / kTau);
    const auto shifted = matrix_pencil(ys, o);
    std::vector<double> want;
    for (double v : base.delays) want.push_back(std::fmod(v + d, kTau));
    check_delays(shifted.delays, want, 1e-9 * kTau);
    check_delays(annihilating_filter(ys, 2), want, 1e-9 * kTau);

    const double g = gain(rng);
    auto yg = y;
    yg.y *= g;
    check_delays(matrix_pencil(yg, o).delays, base.delays, 1e-9 * kTau);
    const auto a0 = least_squares_amplitudes(y, base.delays);
    const auto a1 = least_squares_amplitudes(yg, base.delays);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a1.amplitudes[i] == doctest::Approx(g * a0.amplitudes[i]));
  }
}

TEST_CASE("method names") {
  CHECK(delay_method_from_string("pencil") == DelayMethod::pencil);
  CHECK(delay_method_from_string("annihilating") == DelayMethod::annihilating);
  CHECK(std::string(to_string(DelayMethod::annihilating)) == "annihilating");
  CHECK_THROWS_AS((void)delay_method_from_string("music"), Error);
}

TEST_CASE("end-to-end on the two-reflector scene") {
  const PulseModel pulse;
  const auto geom = testing::two_reflector_geometry();
  const auto cfg = make_xample_config(30, 2, kTau, pulse, geom);
  const auto S = build_S(cfg.p);
  const auto ch = synthesize_channels(testing::two_reflector_scene(), geom, pulse, sim_grid_step(16));
  const auto c = xample_channels(ch, cfg, S).c;
  for (auto method : {DelayMethod::pencil, DelayMethod::annihilating}) {
    RecoveryOptions o;
    o.method = method;
    const auto est = recover_line(c, cfg, S, pulse, o);
    CHECK(est.model_order == 2);
    check_delays(est.delays, {2 * 0.01 / testing::kC, 2 * 0.02 / testing::kC}, 50e-9);
    for (double b : est.amplitudes) CHECK(b == doctest::Approx(16.0).epsilon(0.05));
    // Off-axis echoes are slightly stretched by the warp, so the line is not
    // an exact pulse stream.
    CHECK(est.residual <= 1e-2);
  }

  // Single element: the line is an exact stream of pulse replicas.
  const ArrayGeometry one{1, 0.3e-3, testing::kC};
  const auto cfg1 = make_xample_config(30, 2, kTau, pulse, one);
  const auto ch1 = synthesize_channels(testing::two_reflector_scene(), one, pulse, sim_grid_step(16));
  const auto est1 = recover_line(xample_channels(ch1, cfg1, S).c, cfg1, S, pulse);
  CHECK(est1.model_order == 2);
  CHECK(est1.residual <= 1e-3);

  const auto silent = synthesize_channels(Scene{}, geom, pulse, sim_grid_step(16));
  const auto none = recover_line(xample_channels(silent, cfg, S).c, cfg, S, pulse);
  CHECK(none.model_order == 0);
  CHECK(none.delays.empty());
  CHECK(none.amplitudes.empty());
}
