#include "xbeam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "xbeam/cost_model.hpp"
#include "xbeam/error.hpp"

namespace xbeam {

void validate(const RunConfig& cfg) {
  if (cfg.L < 1) throw Error(ErrorCode::Validation, "L must be >= 1");
  if (cfg.rho < 1) throw Error(ErrorCode::Validation, "rho must be >= 1");
  if (cfg.sim_oversample < kMinSimOversample) {
    throw Error(ErrorCode::Validation, "oversample must be >= 16");
  }
  if (!(cfg.sv_threshold > 0.0 && cfg.sv_threshold < 1.0)) {
    throw Error(ErrorCode::Validation, "sv-threshold must lie in (0, 1)");
  }
  if (cfg.focus_mode == FocusMode::zoned) {
    throw Error(ErrorCode::Validation, "xampling supports dynamic or infinity focus only");
  }
  PencilOptions po;
  po.eta = cfg.eta;
  po.L_max = cfg.L;
  (void)resolve_eta(sample_counts(cfg.L, cfg.rho).K, po);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int env_threads() {
  if (const char* v = std::getenv("XBEAM_THREADS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return 1;
}

std::optional<std::uint64_t> env_seed() {
  if (const char* v = std::getenv("XBEAM_SEED")) {
    char* end = nullptr;
    const auto seed = std::strtoull(v, &end, 10);
    if (end != v && *end == '\0') return seed;
  }
  return std::nullopt;
}

std::vector<ChannelSet> simulate_scene(const SceneFile& scene, int oversample, int threads) {
  if (oversample < kMinSimOversample) {
    throw Error(ErrorCode::GridTooCoarse, "oversample must be >= 16");
  }
  const double step = sim_grid_step(oversample);
  std::vector<ChannelSet> out(scene.lines.size());
  parallel_for(scene.lines.size(), threads, [&](std::size_t i) {
    const Scene s = scene.scene(i);
    ChannelSet clean = synthesize_channels(s, scene.array, scene.pulse, step);
    out[i] = add_interference(clean, scene.pulse, s.noise.snr_db, s.noise.speckle_count,
                              s.noise.seed + i);
  });
  return out;
}

AxialGrid image_axial_grid(double tau, double step) {
  return {static_cast<std::size_t>(std::floor(tau / step + 1e-9)), step};
}

ReferenceResult run_reference(const SceneFile& scene, const std::vector<ChannelSet>& channels,
                              const BeamformOptions& opts, double dynamic_range_db, int threads) {
  if (channels.size() != scene.lines.size()) {
    throw Error(ErrorCode::Validation, "channel file count does not match scene lines");
  }
  const AxialGrid grid = image_axial_grid(scene.tau, opts.out_step);
  ReferenceResult res;
  res.lines.resize(channels.size());
  res.envelopes.resize(channels.size());
  parallel_for(channels.size(), threads, [&](std::size_t i) {
    res.lines[i] = beamform_line(channels[i], scene.lines[i].alpha, opts);
    auto env = envelope_detect(res.lines[i]);
    env.resize(grid.samples);
    res.envelopes[i] = std::move(env);
  });
  std::vector<double> all;
  double env_max = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (double v : res.lines[i].samples) res.peak_amplitude = std::max(res.peak_amplitude, std::abs(v));
    for (double v : res.envelopes[i]) {
      env_max = std::max(env_max, v);
      all.push_back(v);
    }
  }
  if (!all.empty()) {
    auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    const double floor = std::max(*mid, 1e-300);
    res.peak_to_background_db = env_max > 0.0 ? 20.0 * std::log10(env_max / floor) : 0.0;
  }
  res.image = assemble_image(res.envelopes, dynamic_range_db, grid.step);
  return res;
}

XampledResult run_xampled(const SceneFile& scene, const std::vector<ChannelSet>& channels,
                          const RunConfig& cfg) {
  validate(cfg);
  if (channels.size() != scene.lines.size()) {
    throw Error(ErrorCode::Validation, "channel file count does not match scene lines");
  }
  for (const auto& ln : scene.lines) {
    if (ln.alpha != 0.0) {
      throw Error(ErrorCode::Validation, "xampling requires linear scan (alpha_rad = 0)");
    }
  }
  const XampleConfig xc =
      make_xample_config(cfg.L, cfg.rho, scene.tau, scene.pulse, scene.array, cfg.focus_mode);
  const MixingMatrix S = build_S(xc.p);
  RecoveryOptions ro;
  ro.method = cfg.method;
  ro.eta = cfg.eta;
  ro.sv_threshold = cfg.sv_threshold;
  ro.cap_order = true;

  XampledResult res;
  res.estimates.resize(channels.size());
  parallel_for(channels.size(), cfg.threads, [&](std::size_t i) {
    const auto out = xample_channels(channels[i], xc, S);
    res.estimates[i] = recover_line(out.c, xc, S, scene.pulse, ro);
  });

  const AxialGrid grid = image_axial_grid(scene.tau, cfg.axial_step);
  std::vector<std::vector<double>> traces;
  for (const auto& est : res.estimates) traces.push_back(render_line(est, scene.pulse, grid));
  bool any = false;
  for (const auto& t : traces) any = any || std::any_of(t.begin(), t.end(), [](double v) { return v > 0.0; });
  if (any) {
    res.image = assemble_image(traces, cfg.dynamic_range_db, grid.step);
  } else {
    res.image.num_lines = traces.size();
    res.image.axial_samples = grid.samples;
    res.image.axial_step = grid.step;
    res.image.dynamic_range_db = cfg.dynamic_range_db;
    res.image.pixels.assign(traces.size() * grid.samples, 0);
  }
  return res;
}

namespace {

long peak_row(const ImageGrid& img, std::size_t line) {
  long best = -1;
  int best_v = -1;
  for (std::size_t r = 0; r < img.axial_samples; ++r) {
    const int v = img.at(r, line);
    if (v > best_v) {
      best_v = v;
      best = static_cast<long>(r);
    }
  }
  return best_v > 0 ? best : -1;
}

} // namespace

std::vector<LineMetrics> compare_estimates(const SceneFile& scene,
                                           const std::vector<EstimateRow>& estimates,
                                           const ImageGrid* reference, const ImageGrid* xampled) {
  const std::size_t n_lines = scene.lines.size();
  for (const auto& row : estimates) {
    if (row.line_index >= n_lines) {
      throw Error(ErrorCode::Validation, "estimate line_index " + std::to_string(row.line_index) +
                                             " exceeds the scene's " + std::to_string(n_lines) +
                                             " lines");
    }
  }
  for (const ImageGrid* img : {reference, xampled}) {
    if (img && img->num_lines != n_lines) {
      throw Error(ErrorCode::Validation, "image has " + std::to_string(img->num_lines) +
                                             " lines, scene has " + std::to_string(n_lines));
    }
  }

  std::vector<LineMetrics> out;
  const double gain = scene.array.num_elements;
  for (std::size_t i = 0; i < n_lines; ++i) {
    LineMetrics m;
    m.line_index = i;
    std::vector<std::pair<double, double>> est;
    for (const auto& row : estimates) {
      if (row.line_index == i) est.emplace_back(row.t_l_s, row.b_l);
    }
    const auto& truth = scene.lines[i].scatterers;
    m.num_true = truth.size();
    m.num_estimated = est.size();
    double sq_delay = 0.0;
    double sq_amp = 0.0;
    for (const auto& s : truth) {
      const double t_true = 2.0 * s.axial_time;
      const double b_true = gain * s.reflectivity;
      if (est.empty()) {
        sq_delay = std::numeric_limits<double>::infinity();
        sq_amp = std::numeric_limits<double>::infinity();
        continue;
      }
      const auto nearest = std::min_element(est.begin(), est.end(), [&](const auto& a, const auto& b) {
        return std::abs(a.first - t_true) < std::abs(b.first - t_true);
      });
      const double dt = nearest->first - t_true;
      if (std::abs(dt) <= kMatchToleranceS) ++m.num_matched;
      sq_delay += dt * dt;
      const double rel = (nearest->second - b_true) / std::abs(b_true);
      sq_amp += rel * rel;
    }
    if (!truth.empty()) {
      m.delay_rmse_s = std::sqrt(sq_delay / static_cast<double>(truth.size()));
      m.amplitude_rel_error = std::sqrt(sq_amp / static_cast<double>(truth.size()));
    }
    if (reference) m.ref_peak_row = peak_row(*reference, i);
    if (xampled) m.xampled_peak_row = peak_row(*xampled, i);
    out.push_back(m);
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<LineMetrics>& metrics) {
  CsvWriter csv(os);
  csv.row({"line_index", "num_true", "num_estimated", "num_matched", "delay_rmse_s",
           "amplitude_rel_error", "ref_peak_row", "xampled_peak_row"});
  for (const auto& m : metrics) {
    csv.row({std::to_string(m.line_index), std::to_string(m.num_true),
             std::to_string(m.num_estimated), std::to_string(m.num_matched),
             format_double(m.delay_rmse_s), format_double(m.amplitude_rel_error),
             std::to_string(m.ref_peak_row), std::to_string(m.xampled_peak_row)});
  }
}

} // namespace xbeam
