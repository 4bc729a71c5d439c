#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "xbeam/error.hpp"
#include "xbeam/pipeline.hpp"

using namespace xbeam;

namespace {

SceneFile two_reflector_file(int lines = 1) {
  SceneFile sf;
  sf.array = testing::two_reflector_geometry();
  for (int i = 0; i < lines; ++i) {
    SceneLine ln;
    ln.scatterers = testing::two_reflector_scene().scatterers;
    ln.scatterers[1].reflectivity = 0.6; // no tie for the brightest row
    sf.lines.push_back(ln);
  }
  return sf;
}

ErrorCode code_of(const RunConfig& cfg) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config unexpectedly valid");
  return ErrorCode::Validation;
}

} // namespace

TEST_CASE("run configuration checks") {
  CHECK_NOTHROW(validate(RunConfig{}));
  RunConfig c;
  c.rho = 0;
  CHECK(code_of(c) == ErrorCode::Validation);
  c = RunConfig{};
  c.eta = 5;
  CHECK(code_of(c) == ErrorCode::Precondition);
  c.eta = 100;
  CHECK(code_of(c) == ErrorCode::Precondition);
  c.eta = 60;
  CHECK_NOTHROW(validate(c));
  c = RunConfig{};
  c.sim_oversample = 8;
  CHECK(code_of(c) == ErrorCode::Validation);
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h.load() == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw Error(ErrorCode::Io, "boom");
                               }),
                  Error);
}

TEST_CASE("axial grid") {
  const auto g = image_axial_grid(102.4e-6);
  CHECK(g.samples == 2048);
  CHECK(g.step == 50e-9);
}

TEST_CASE("reference and xampled pipelines on the two-reflector scene") {
  auto sf = two_reflector_file(2);
  sf.noise.seed = 3;
  const auto channels = simulate_scene(sf, 16, 2);
  REQUIRE(channels.size() == 2);
  CHECK(channels[0].samples == channels[1].samples);

  BeamformOptions dyn;
  const auto ref = run_reference(sf, channels, dyn, 50.0, 2);
  CHECK(ref.image.num_lines == 2);
  CHECK(ref.image.axial_samples == 2048);
  const auto truth_row = [](double depth) { return std::lround(2 * depth / testing::kC / 50e-9); };
  // Bright bands at both depths.
  for (double depth : {0.01, 0.02}) {
    const auto row = static_cast<std::size_t>(truth_row(depth));
    std::uint8_t best = 0;
    for (std::size_t r = row - 1; r <= row + 1; ++r) best = std::max(best, ref.image.at(r, 0));
    CHECK(best >= 200);
  }
  BeamformOptions inf;
  inf.mode = FocusMode::infinity;
  const auto flat = run_reference(sf, channels, inf, 50.0, 2);
  CHECK(ref.peak_amplitude >= flat.peak_amplitude);
  CHECK(ref.peak_to_background_db >= flat.peak_to_background_db);

  RunConfig cfg;
  cfg.threads = 2;
  const auto xr = run_xampled(sf, channels, cfg);
  REQUIRE(xr.estimates.size() == 2);
  CHECK(xr.estimates[0].delays.size() == 2);
  CHECK(xr.image.pixels != std::vector<std::uint8_t>(xr.image.pixels.size()));

  std::stringstream csv;
  write_estimates_csv(csv, xr.estimates);
  const auto rows = read_estimates_csv(csv);
  const auto metrics = compare_estimates(sf, rows, &ref.image, &xr.image);
  for (const auto& m : metrics) {
    CHECK(m.num_matched == 2);
    CHECK(m.delay_rmse_s <= 50e-9);
    CHECK(m.amplitude_rel_error <= 0.05);
    CHECK(std::abs(m.ref_peak_row - m.xampled_peak_row) <= 2);
  }
}

TEST_CASE("comparison against ground truth") {
  const auto sf = two_reflector_file(1);
  std::vector<EstimateRow> exact;
  for (const auto& s : sf.lines[0].scatterers) exact.push_back({0, 2 * s.axial_time, 16 * s.reflectivity, 0});
  const auto m = compare_estimates(sf, exact, nullptr, nullptr);
  REQUIRE(m.size() == 1);
  CHECK(m[0].delay_rmse_s == 0.0);
  CHECK(m[0].amplitude_rel_error == 0.0);
  CHECK(m[0].num_matched == 2);
  CHECK(m[0].ref_peak_row == -1);

  std::vector<EstimateRow> stray = exact;
  stray.push_back({3, 1e-6, 1.0, 0});
  CHECK_THROWS_AS((void)compare_estimates(sf, stray, nullptr, nullptr), Error);
  ImageGrid two;
  two.num_lines = 2;
  two.axial_samples = 1;
  two.pixels = {0, 0};
  CHECK_THROWS_AS((void)compare_estimates(sf, exact, &two, nullptr), Error);

  std::ostringstream os;
  write_metrics_csv(os, m);
  CHECK(os.str().rfind("line_index,", 0) == 0);
}

TEST_CASE("xampled image of an empty scene is dark") {
  SceneFile sf;
  sf.array = testing::two_reflector_geometry();
  sf.lines.resize(1);
  const auto channels = simulate_scene(sf, 16);
  const auto xr = run_xampled(sf, channels, RunConfig{});
  CHECK(xr.estimates[0].model_order == 0);
  CHECK(std::all_of(xr.image.pixels.begin(), xr.image.pixels.end(), [](auto p) { return p == 0; }));
}
